//! Closed algebra of finite Mittag-Leffler term sums.
//!
//! A term is c · x^{μ-1} E^γ_{α,μ}(δ x^α); a series is a finite sum of
//! terms sharing (α, δ). The Prabhakar integral maps a term (μ, γ) to
//! (μ+β, γ+γ_op), the classical derivative maps it to (μ-1, γ), and the
//! n-level Prabhakar derivative is a composition of the two — so the
//! algebra is closed under every operator in this crate and gives an
//! exact symbolic path complementing quadrature.
//!
//! Pure powers embed as x^r = Γ(r+1) · x^{(r+1)-1} E^0_{α,r+1}(δx^α),
//! which makes the γ = 0 reduction to Riemann-Liouville calculus exact
//! at the data-structure level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::gamma;
use crate::mlf::{prabhakar_e, SeriesControl};
use crate::operators::NthLevelSpec;

/// One term c · x^{mu-1} E^gamma_{alpha,mu}(delta x^alpha).
///
/// `alpha` and `delta` live on the enclosing [`MLSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MLTerm {
    pub coeff: f64,
    pub mu: f64,
    pub gamma: f64,
}

/// Finite sum of [`MLTerm`]s with shared (alpha, delta), kept in
/// canonical form: terms sorted by (mu, gamma), duplicates merged by
/// coefficient addition, zero coefficients dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MLSeries {
    pub alpha: f64,
    pub delta: f64,
    terms: Vec<MLTerm>,
}

/// Relative slack used to recognize integer mu values produced by
/// float parameter arithmetic (e.g. (β+s)-β+... landing 1 ulp off an
/// integer). Only used where an integer mu has exact consequences.
const MU_INT_EPS: f64 = 1e-9;

fn is_near_positive_integer(mu: f64) -> Option<i64> {
    let r = mu.round();
    if r >= 1.0 && (mu - r).abs() <= MU_INT_EPS * mu.abs().max(1.0) {
        Some(r as i64)
    } else {
        None
    }
}

impl MLSeries {
    /// Build a canonical series; every term must have mu > 0 and a
    /// finite coefficient, and alpha must be > 0.
    pub fn new(alpha: f64, delta: f64, terms: Vec<MLTerm>) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParams(format!("alpha must be > 0, got {alpha}")));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParams(format!("delta must be finite, got {delta}")));
        }
        for t in &terms {
            if !(t.mu > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "term exponent parameter mu must be > 0, got {}",
                    t.mu
                )));
            }
            if !t.coeff.is_finite() || !t.gamma.is_finite() || !t.mu.is_finite() {
                return Err(Error::InvalidParams("non-finite term field".into()));
            }
        }
        let mut s = MLSeries { alpha, delta, terms };
        s.canonicalize();
        Ok(s)
    }

    /// Series with no terms (the zero function).
    pub fn zero(alpha: f64, delta: f64) -> Result<Self> {
        MLSeries::new(alpha, delta, Vec::new())
    }

    /// Embed the power x^r (r > -1) as Γ(r+1) x^{(r+1)-1} E^0_{α,r+1}.
    pub fn from_power(r: f64, alpha: f64, delta: f64) -> Result<Self> {
        if !(r > -1.0) {
            return Err(Error::InvalidParams(format!(
                "power exponent must be > -1 for local integrability, got {r}"
            )));
        }
        MLSeries::new(
            alpha,
            delta,
            vec![MLTerm { coeff: gamma(r + 1.0), mu: r + 1.0, gamma: 0.0 }],
        )
    }

    pub fn terms(&self) -> &[MLTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest exponent parameter; `None` for the zero series.
    pub fn min_mu(&self) -> Option<f64> {
        self.terms.first().map(|t| t.mu)
    }

    /// Exact-equality canonicalization: sort by (mu, gamma), merge
    /// bitwise-equal parameter pairs, drop zero coefficients. No
    /// epsilon merging — operator images repeat parameters exactly
    /// when they repeat at all.
    fn canonicalize(&mut self) {
        self.terms.sort_by(|a, b| {
            a.mu.total_cmp(&b.mu).then(a.gamma.total_cmp(&b.gamma))
        });
        let mut merged: Vec<MLTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.mu == t.mu && last.gamma == t.gamma => {
                    last.coeff += t.coeff;
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        self.terms = merged;
    }

    /// Pointwise value at x > 0: Σ c x^{μ-1} E^γ_{α,μ}(δ x^α).
    ///
    /// Each term's Mittag-Leffler factor is evaluated with the series
    /// absolute tolerance scaled by the term's weight |c x^{μ-1}|, so
    /// low-weight terms (deep resolvent layers) are not held to an
    /// absolute accuracy they cannot reach and do not need.
    pub fn evaluate(&self, x: f64, ctl: &SeriesControl) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::InvalidParams(format!("evaluation point must be > 0, got {x}")));
        }
        let arg = self.delta * x.powf(self.alpha);
        let mut sum = 0.0;
        for t in &self.terms {
            let weight = (t.coeff * x.powf(t.mu - 1.0)).abs();
            let scaled = SeriesControl {
                abs_tol: (ctl.abs_tol / weight.max(f64::MIN_POSITIVE)).max(ctl.abs_tol),
                ..*ctl
            };
            sum += t.coeff
                * x.powf(t.mu - 1.0)
                * prabhakar_e(self.alpha, t.mu, t.gamma, arg, &scaled)?;
        }
        Ok(sum)
    }

    /// Multiply every coefficient by c.
    pub fn scale(&self, c: f64) -> MLSeries {
        let mut s = self.clone();
        for t in &mut s.terms {
            t.coeff *= c;
        }
        s.canonicalize();
        s
    }

    /// Sum of two series sharing (alpha, delta).
    pub fn add(&self, other: &MLSeries) -> Result<MLSeries> {
        if self.alpha != other.alpha || self.delta != other.delta {
            return Err(Error::InvalidParams(format!(
                "cannot add series with different kernels: ({}, {}) vs ({}, {})",
                self.alpha, self.delta, other.alpha, other.delta
            )));
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        MLSeries::new(self.alpha, self.delta, terms)
    }

    /// Left Prabhakar integral of order `beta_op` with upper parameter
    /// `gamma_op`, sharing this series' (alpha, delta): each term
    /// (c, μ, γ) maps to (c, μ+β, γ+γ_op) by the kernel convolution
    /// semigroup.
    pub fn prabhakar_integrate(&self, beta_op: f64, gamma_op: f64) -> Result<MLSeries> {
        if !(beta_op > 0.0) {
            return Err(Error::InvalidParams(format!(
                "integral order must be > 0, got {beta_op}"
            )));
        }
        if !beta_op.is_finite() || !gamma_op.is_finite() {
            return Err(Error::InvalidParams("non-finite operator parameter".into()));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| MLTerm { coeff: t.coeff, mu: t.mu + beta_op, gamma: t.gamma + gamma_op })
            .collect();
        MLSeries::new(self.alpha, self.delta, terms)
    }

    /// n-fold classical derivative: (c, μ, γ) maps to (c, μ-n, γ).
    ///
    /// Terms with γ = 0 and μ within float wobble of an integer m ≤ n
    /// are pure polynomials x^{m-1}/Γ(m) of degree < n; their n-th
    /// derivative vanishes and they are dropped. Any other term with
    /// μ ≤ n would leave the algebra and is an error.
    pub fn differentiate(&self, n: u32) -> Result<MLSeries> {
        if n == 0 {
            return Ok(self.clone());
        }
        let nf = n as f64;
        let mut out = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if t.gamma == 0.0 {
                if let Some(m) = is_near_positive_integer(t.mu) {
                    if m <= n as i64 {
                        continue;
                    }
                }
            }
            if t.mu <= nf {
                return Err(Error::LeavesAlgebra(format!(
                    "d^{n} of term with mu = {} (gamma = {}) has no representation with mu > 0",
                    t.mu, t.gamma
                )));
            }
            out.push(MLTerm { coeff: t.coeff, mu: t.mu - nf, gamma: t.gamma });
        }
        MLSeries::new(self.alpha, self.delta, out)
    }

    /// n-level Prabhakar derivative: outer integral (s_n, -γΘ_n) after
    /// the n-fold derivative after the inner integral (n-β-s_n, -γ(n-Θ_n)).
    ///
    /// Zero-order edges (s_n = 0 or n-β-s_n = 0) degenerate to the
    /// identity; [`NthLevelSpec`] validation guarantees the paired
    /// upper parameter vanishes there.
    ///
    /// Terms whose inner image lands exactly at μ = n (original
    /// μ = β+s_n) differentiate to the boundary kernel x^{-1}E^g_{α,0},
    /// which is not an algebra element itself; convolving it with the
    /// outer kernel removes the j = 0 series entry, giving
    /// e_{s_n, g-γΘ_n} - e_{s_n, -γΘ_n}. Those terms are routed around
    /// the generic differentiate step.
    pub fn nth_level_derivative(&self, spec: &NthLevelSpec) -> Result<MLSeries> {
        spec.validate()?;
        if self.alpha != spec.alpha || self.delta != spec.delta {
            return Err(Error::InvalidParams(format!(
                "series kernel ({}, {}) does not match operator kernel ({}, {})",
                self.alpha, self.delta, spec.alpha, spec.delta
            )));
        }
        let n = spec.level() as u32;
        let inner = if spec.inner_order() == 0.0 {
            self.clone()
        } else {
            self.prabhakar_integrate(spec.inner_order(), spec.inner_gamma_op())?
        };
        let mut regular = Vec::new();
        let mut post_outer = Vec::new();
        for t in inner.terms() {
            let at_boundary = t.gamma != 0.0
                && (t.mu - n as f64).abs() <= MU_INT_EPS * t.mu.abs().max(1.0);
            if !at_boundary {
                regular.push(*t);
                continue;
            }
            if spec.outer_order() == 0.0 {
                return Err(Error::LeavesAlgebra(format!(
                    "term at mu = beta + s_n with gamma = {} differentiates to the \
                     order-zero boundary kernel and s_n = 0 provides no integral to absorb it",
                    t.gamma
                )));
            }
            let g_out = spec.outer_gamma_op();
            post_outer.push(MLTerm {
                coeff: t.coeff,
                mu: spec.outer_order(),
                gamma: t.gamma + g_out,
            });
            post_outer.push(MLTerm { coeff: -t.coeff, mu: spec.outer_order(), gamma: g_out });
        }
        let diff = MLSeries::new(self.alpha, self.delta, regular)?.differentiate(n)?;
        let main = if spec.outer_order() == 0.0 {
            diff
        } else {
            diff.prabhakar_integrate(spec.outer_order(), spec.outer_gamma_op())?
        };
        main.add(&MLSeries::new(self.alpha, self.delta, post_outer)?)
    }

    /// Structural equality within a tolerance: same term count, each
    /// (coeff, mu, gamma) triple within `tol` (relative on the
    /// coefficient, absolute on the parameters).
    pub fn approx_eq(&self, other: &MLSeries, tol: f64) -> bool {
        self.alpha == other.alpha
            && self.delta == other.delta
            && self.terms.len() == other.terms.len()
            && self.terms.iter().zip(&other.terms).all(|(a, b)| {
                (a.mu - b.mu).abs() <= tol * a.mu.abs().max(1.0)
                    && (a.gamma - b.gamma).abs() <= tol * a.gamma.abs().max(1.0)
                    && (a.coeff - b.coeff).abs() <= tol * a.coeff.abs().max(1.0)
            })
    }

    /// Serialize as the interchange JSON object
    /// `{alpha, delta, terms: [{coeff, mu, gamma}]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("MLSeries serialization cannot fail")
    }

    /// Parse the interchange JSON, re-canonicalizing and validating.
    pub fn from_json(s: &str) -> Result<MLSeries> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParams(format!("bad MLSeries JSON: {e}")))
    }
}

impl<'de> Deserialize<'de> for MLSeries {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            alpha: f64,
            delta: f64,
            terms: Vec<MLTerm>,
        }
        let raw = Raw::deserialize(deserializer)?;
        MLSeries::new(raw.alpha, raw.delta, raw.terms).map_err(serde::de::Error::custom)
    }
}
