//! Randomized identity-verification harness.
//!
//! Each suite turns one of the operator identities into a randomized
//! property over a seeded corpus and reports per-case defects.
//! Failures are data (rows with `pass = false`), not panics; reports
//! are byte-identical for a fixed (name, seed, cases).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::algebra::{MLSeries, MLTerm};
use crate::error::{Error, Result};
use crate::gamma::gamma;
use crate::mlf::SeriesControl;
use crate::operators::{inversion_residual, theorem31_decomposition, NthLevelSpec};
use crate::solvers::{
    evaluate_ivp, ivp_residual, recovered_initial_values, solve_ivp, IVPProblem,
};

/// Identity suite selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    /// Sequential vs combined Prabhakar integration (parameter semigroup).
    Semigroup,
    /// Prabhakar integral of the n-level derivative recovers f minus
    /// initial-value corrections.
    Inversion,
    /// Decomposition of the n-level derivative into an RL-type
    /// Prabhakar derivative minus a boundary sum.
    Thm31,
    /// γ = 0 / δ = 0 power-kernel reductions and the first-level
    /// structural (Hilfer) form.
    Reductions,
    /// Cauchy-problem residual and initial-value recovery.
    IvpResidual,
    /// Heat-equation single-mode closed form (γ = 0 reduction).
    HeatMode,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 6] = [
        SuiteKind::Semigroup,
        SuiteKind::Inversion,
        SuiteKind::Thm31,
        SuiteKind::Reductions,
        SuiteKind::IvpResidual,
        SuiteKind::HeatMode,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SuiteKind::Semigroup => "semigroup",
            SuiteKind::Inversion => "inversion",
            SuiteKind::Thm31 => "thm31",
            SuiteKind::Reductions => "reductions",
            SuiteKind::IvpResidual => "ivp_residual",
            SuiteKind::HeatMode => "heat_mode",
        }
    }
}

impl FromStr for SuiteKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SuiteKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseRow {
    pub index: usize,
    pub description: String,
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentitySuite {
    pub name: String,
    pub corpus_seed: u64,
    pub cases: usize,
    pub tolerance: f64,
    pub rows: Vec<CaseRow>,
}

impl IdentitySuite {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn max_defect(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.defect))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("case,description,lhs,rhs,defect,pass\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.17e},{:.17e},{:.17e},{}",
                r.index, r.description, r.lhs, r.rhs, r.defect, r.pass
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite serialization cannot fail")
    }
}

const CTL: SeriesControl = SeriesControl { abs_tol: 1e-15, rel_tol: 1e-14, max_terms: 10_000 };
const RETRIES: usize = 1000;

/// Normalized defect (1 + max magnitude) so values spanning many
/// orders of magnitude compare on one scale.
fn defect(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / (1.0 + lhs.abs().max(rhs.abs()))
}

fn fmt_params(parts: &[(&str, f64)]) -> String {
    let mut s = String::new();
    for (i, (k, v)) in parts.iter().enumerate() {
        if i > 0 {
            s.push(';');
        }
        let _ = write!(s, "{k}={v:.6}");
    }
    s
}

/// Draw an operator spec with α ∈ [0.2, 1.8], γ ∈ [-2, 2], δ ∈ [-1, 1],
/// n ∈ {1, 2, 3}, and kernel orders inside the paper's constraint zone.
fn draw_spec(rng: &mut ChaCha8Rng, min_beta: f64) -> NthLevelSpec {
    loop {
        let n = rng.random_range(1..=3usize);
        let alpha = rng.random_range(0.2..1.8);
        let beta_hi: f64 = if n == 1 { 0.85 } else { 1.35 };
        let beta = rng.random_range(min_beta..beta_hi.max(min_beta + 0.1));
        // Keep β + s_n away from integers so A is stable, and keep the
        // inner order strictly positive.
        let s_max = (0.95 - beta).max(0.0).min(n as f64 - beta - 0.1);
        let s_n = if s_max > 0.05 { rng.random_range(0.05..s_max) } else { continue };
        let mut beta_i = vec![s_n / n as f64; n];
        // Make the split uneven but preserve the sum.
        if n > 1 {
            let shift = rng.random_range(0.0..beta_i[0] * 0.9);
            beta_i[0] -= shift;
            beta_i[n - 1] += shift;
        }
        let theta_i: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let gamma = rng.random_range(-2.0..2.0);
        let delta = rng.random_range(-1.0..1.0);
        if let Ok(s) = NthLevelSpec::new(alpha, beta, gamma, delta, beta_i, theta_i) {
            return s;
        }
    }
}

/// Random series with all exponent parameters at or above `mu_min`;
/// the first term sits exactly at `mu_min` when `pin_first` is set
/// (so one initial value is structurally nonzero).
fn draw_series(
    rng: &mut ChaCha8Rng,
    alpha: f64,
    delta: f64,
    mu_min: f64,
    pin_first: bool,
) -> MLSeries {
    let extra = rng.random_range(1..=2usize);
    let mut terms = Vec::new();
    if pin_first {
        terms.push(MLTerm {
            coeff: rng.random_range(0.5..2.0),
            mu: mu_min,
            gamma: rng.random_range(-2.0..2.0),
        });
    }
    for _ in 0..extra {
        terms.push(MLTerm {
            coeff: rng.random_range(-2.0..2.0),
            mu: mu_min + rng.random_range(0.1..2.0),
            gamma: rng.random_range(-2.0..2.0),
        });
    }
    MLSeries::new(alpha, delta, terms).expect("draw_series produced invalid series")
}

pub fn run_suite(kind: SuiteKind, seed: u64, cases: usize, tolerance: f64) -> IdentitySuite {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(cases);
    for index in 0..cases {
        let mut row = None;
        for _ in 0..RETRIES {
            match run_case(kind, &mut rng) {
                Ok(Some((description, lhs, rhs, d))) => {
                    row = Some(CaseRow { index, description, lhs, rhs, defect: d, pass: d <= tolerance });
                    break;
                }
                Ok(None) => continue, // invariant-violating draw; resample
                Err(e) => {
                    row = Some(CaseRow {
                        index,
                        description: format!("error: {e}").replace(',', ";"),
                        lhs: f64::NAN,
                        rhs: f64::NAN,
                        defect: f64::INFINITY,
                        pass: false,
                    });
                    break;
                }
            }
        }
        rows.push(row.unwrap_or(CaseRow {
            index,
            description: "corpus draw retries exhausted".into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            defect: f64::INFINITY,
            pass: false,
        }));
    }
    IdentitySuite {
        name: kind.name().to_string(),
        corpus_seed: seed,
        cases,
        tolerance,
        rows,
    }
}

type CaseOutcome = Result<Option<(String, f64, f64, f64)>>;

fn run_case(kind: SuiteKind, rng: &mut ChaCha8Rng) -> CaseOutcome {
    match kind {
        SuiteKind::Semigroup => case_semigroup(rng),
        SuiteKind::Inversion => case_inversion(rng),
        SuiteKind::Thm31 => case_thm31(rng),
        SuiteKind::Reductions => case_reductions(rng),
        SuiteKind::IvpResidual => case_ivp_residual(rng),
        SuiteKind::HeatMode => case_heat_mode(rng),
    }
}

fn case_semigroup(rng: &mut ChaCha8Rng) -> CaseOutcome {
    let alpha = rng.random_range(0.2..1.8);
    let delta = rng.random_range(-1.0..1.0);
    let (b1, b2) = (rng.random_range(0.05..2.0), rng.random_range(0.05..2.0));
    let (g1, g2) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let mu_min = rng.random_range(0.1..1.0);
    let f = draw_series(rng, alpha, delta, mu_min, false);
    let seq = f.prabhakar_integrate(b1, g1)?.prabhakar_integrate(b2, g2)?;
    let comb = f.prabhakar_integrate(b1 + b2, g1 + g2)?;
    let mut d: f64 = if seq.approx_eq(&comb, 1e-12) { 0.0 } else { 1.0 };
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for _ in 0..10 {
        let x = rng.random_range(1e-3..2.0);
        let (a, b) = (seq.evaluate(x, &CTL)?, comb.evaluate(x, &CTL)?);
        let dd = defect(a, b);
        if dd >= d {
            d = dd;
            lhs = a;
            rhs = b;
        }
    }
    let desc = fmt_params(&[
        ("alpha", alpha), ("delta", delta), ("b1", b1), ("g1", g1), ("b2", b2), ("g2", g2),
    ]);
    Ok(Some((desc, lhs, rhs, d)))
}

fn case_inversion(rng: &mut ChaCha8Rng) -> CaseOutcome {
    let spec = draw_spec(rng, 0.05);
    let bs = spec.beta + spec.s_n();
    let pin = rng.random_bool(0.5);
    let f = draw_series(rng, spec.alpha, spec.delta, bs, pin);
    let mut worst = 0.0_f64;
    let mut fx_at_worst = 0.0;
    for &x in &[0.25, 0.5, 1.0] {
        let r = match inversion_residual(&f, &spec, x, &CTL) {
            Ok(r) => r,
            Err(Error::NonConvergence(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let fx = f.evaluate(x, &CTL)?;
        let d = r.abs() / (1.0 + fx.abs());
        if d >= worst {
            worst = d;
            fx_at_worst = fx;
        }
    }
    let desc = fmt_params(&[
        ("alpha", spec.alpha), ("beta", spec.beta), ("gamma", spec.gamma),
        ("delta", spec.delta), ("n", spec.level() as f64), ("s_n", spec.s_n()),
        ("theta_n", spec.theta_sum()),
    ]);
    Ok(Some((desc, fx_at_worst + worst, fx_at_worst, worst)))
}

fn case_thm31(rng: &mut ChaCha8Rng) -> CaseOutcome {
    let spec = draw_spec(rng, 0.05);
    let bs = spec.beta + spec.s_n();
    let pin = rng.random_bool(0.5);
    let f = draw_series(rng, spec.alpha, spec.delta, bs, pin);
    let df = f.nth_level_derivative(&spec)?;
    let mut worst = 0.0_f64;
    let mut pair = (0.0, 0.0);
    for &x in &[0.25, 0.5, 1.0] {
        let lhs = df.evaluate(x, &CTL)?;
        let (pr, corr) = theorem31_decomposition(&f, &spec, x, &CTL)?;
        let rhs = pr - corr;
        let d = (lhs - rhs).abs() / (1.0 + lhs.abs());
        if d >= worst {
            worst = d;
            pair = (lhs, rhs);
        }
    }
    let desc = fmt_params(&[
        ("alpha", spec.alpha), ("beta", spec.beta), ("gamma", spec.gamma),
        ("delta", spec.delta), ("n", spec.level() as f64), ("s_n", spec.s_n()),
    ]);
    Ok(Some((desc, pair.0, pair.1, worst)))
}

fn case_reductions(rng: &mut ChaCha8Rng) -> CaseOutcome {
    // Power-kernel reduction: γ = 0 or δ = 0 collapses the n-level
    // operator to the RL power rule on x^r.
    let mut spec = draw_spec(rng, 0.05);
    if rng.random_bool(0.5) {
        spec.gamma = 0.0;
    } else {
        spec.delta = 0.0;
    }
    let spec = NthLevelSpec::new(
        spec.alpha, spec.beta, spec.gamma, spec.delta, spec.beta_i, spec.theta_i,
    )?;
    let r = spec.beta + spec.s_n() + rng.random_range(0.1..2.0);
    let f = MLSeries::from_power(r, spec.alpha, spec.delta)?;
    let df = f.nth_level_derivative(&spec)?;
    let mut worst = 0.0_f64;
    let mut pair = (0.0, 0.0);
    for &x in &[0.3, 0.7, 1.2] {
        let lhs = df.evaluate(x, &CTL)?;
        let rhs = gamma(r + 1.0) / gamma(r + 1.0 - spec.beta) * x.powf(r - spec.beta);
        let d = defect(lhs, rhs);
        if d >= worst {
            worst = d;
            pair = (lhs, rhs);
        }
    }
    // First-level structural check: the spec-driven composition equals
    // the hand-assembled Hilfer-Prabhakar composition term for term.
    let theta = rng.random_range(0.0..1.0);
    let (al, be, ga, de) = (
        spec.alpha,
        rng.random_range(0.1..0.9),
        rng.random_range(-2.0..2.0),
        rng.random_range(-1.0..1.0),
    );
    let hspec = NthLevelSpec::hilfer(al, be, ga, de, theta)?;
    let g = draw_series(rng, al, de, be + hspec.s_n() + 0.1, false);
    let via_spec = g.nth_level_derivative(&hspec)?;
    let inner_order = hspec.inner_order();
    let step = if inner_order == 0.0 {
        g.clone()
    } else {
        g.prabhakar_integrate(inner_order, -ga * (1.0 - theta))?
    };
    let step = step.differentiate(1)?;
    let via_hand = if hspec.outer_order() == 0.0 {
        step
    } else {
        step.prabhakar_integrate(hspec.outer_order(), -ga * theta)?
    };
    if !via_spec.approx_eq(&via_hand, 1e-10) {
        worst = worst.max(1.0);
    }
    let desc = fmt_params(&[
        ("alpha", spec.alpha), ("beta", spec.beta), ("gamma", spec.gamma),
        ("delta", spec.delta), ("n", spec.level() as f64), ("r", r), ("theta", theta),
    ]);
    Ok(Some((desc, pair.0, pair.1, worst)))
}

fn case_ivp_residual(rng: &mut ChaCha8Rng) -> CaseOutcome {
    let spec = draw_spec(rng, 0.05);
    let lambda = rng.random_range(-1.0..1.0);
    let a0 = rng.random_range(0.5..2.0);
    if spec.c_k_factor(0).abs() < 0.1 {
        return Ok(None);
    }
    let mut initial = vec![0.0; spec.a_count()];
    initial[0] = a0;
    let forcing = if rng.random_bool(0.5) {
        Some(MLSeries::from_power(
            rng.random_range(0.2..1.5),
            spec.alpha,
            spec.delta,
        )?)
    } else {
        None
    };
    let p = IVPProblem { spec, lambda, forcing, initial_values: initial };
    let sol = solve_ivp(&p, 30, &CTL)?;
    let mut worst = 0.0_f64;
    let mut pair = (0.0, 0.0);
    for &x in &[0.2, 0.5, 0.9] {
        let y = evaluate_ivp(&sol, x, &CTL)?;
        let fx = match &p.forcing {
            Some(f) => f.evaluate(x, &CTL)?,
            None => 0.0,
        };
        let r = ivp_residual(&sol, &p, x, &CTL)?;
        let d = r / (1.0 + (lambda * y).abs() + fx.abs());
        if d >= worst {
            worst = d;
            pair = (lambda * y + fx + r, lambda * y + fx);
        }
    }
    let rec = recovered_initial_values(&sol, &p)?;
    worst = worst.max((rec[0] - a0).abs() / a0.abs());
    let desc = fmt_params(&[
        ("alpha", p.spec.alpha), ("beta", p.spec.beta), ("gamma", p.spec.gamma),
        ("delta", p.spec.delta), ("n", p.spec.level() as f64), ("lambda", lambda), ("a0", a0),
    ]);
    Ok(Some((desc, pair.0, pair.1, worst)))
}

fn case_heat_mode(rng: &mut ChaCha8Rng) -> CaseOutcome {
    // γ = 0 reduction: each mode decays as t^{β-1} E_{β,β}(-k̃ω² t^β),
    // summed directly as the independent one-parameter oracle.
    let beta = rng.random_range(0.3..0.9);
    let alpha = rng.random_range(0.2..1.8);
    let k_tilde = rng.random_range(0.2..1.5);
    let mode = rng.random_range(1..=4usize);
    let l = 6.0;
    let spec = NthLevelSpec::new(alpha, beta, 0.0, 0.0, vec![0.0], vec![0.0])?;
    let p = crate::solvers::HeatProblem {
        spec,
        k_tilde,
        half_width: l,
        grid_points: 32,
        initial: crate::solvers::InitialProfile::Cosine { amplitude: 1.0, mode },
    };
    let t = rng.random_range(0.2..1.2);
    let field = crate::solvers::solve_heat(&p, &[t], 80, &CTL)?;
    let omega = std::f64::consts::PI * mode as f64 / l;
    // Direct one-parameter Mittag-Leffler sum.
    let z = -k_tilde * omega * omega * t.powf(beta);
    let mut ml = 0.0;
    let mut zp = 1.0;
    for k in 0..400 {
        let term = zp * crate::gamma::rgamma(beta * k as f64 + beta);
        ml += term;
        zp *= z;
        if term.abs() < 1e-18 * (1.0 + ml.abs()) && k > 4 {
            break;
        }
    }
    let factor = t.powf(beta - 1.0) * ml;
    let mut worst = 0.0_f64;
    let mut pair = (0.0, 0.0);
    for (j, &x) in field.grid.iter().enumerate() {
        let want = (omega * x).cos() * factor;
        let got = field.values[0][j];
        let d = defect(got, want);
        if d >= worst {
            worst = d;
            pair = (got, want);
        }
    }
    let desc = fmt_params(&[
        ("alpha", alpha), ("beta", beta), ("k_tilde", k_tilde),
        ("mode", mode as f64), ("t", t),
    ]);
    Ok(Some((desc, pair.0, pair.1, worst)))
}
