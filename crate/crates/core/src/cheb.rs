//! Chebyshev-Lobatto interpolation and spectral differentiation.
//!
//! Used to take classical n-th derivatives of functions that are only
//! available through quadrature (the d^n step of the n-level Prabhakar
//! derivative). Fits are on intervals bounded away from the origin,
//! where those functions are analytic, so the coefficients decay
//! geometrically and a tail check is meaningful.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Polynomial interpolant p(x) = Σ_k c_k T_k(ξ), ξ = (2x - a - b)/(b - a).
#[derive(Debug, Clone)]
pub struct ChebInterpolant {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl ChebInterpolant {
    /// Fit degree-n interpolant through the n+1 Chebyshev-Lobatto nodes.
    pub fn fit<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, n: usize) -> Result<Self> {
        if !(b > a) || n < 1 {
            return Err(Error::InvalidParams(format!(
                "bad Chebyshev interval [{a}, {b}] or degree {n}"
            )));
        }
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut values = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let x = mid + half * (PI * j as f64 / n as f64).cos();
            values.push(f(x)?);
        }
        Ok(Self::from_lobatto_values(a, b, &values))
    }

    /// Build from samples at x_j = mid + half cos(πj/n), j = 0..=n.
    pub fn from_lobatto_values(a: f64, b: f64, values: &[f64]) -> Self {
        let n = values.len() - 1;
        // DCT-I: c_k = (2/n) Σ'' y_j cos(πjk/n), first/last halved,
        // and c_0, c_n themselves halved afterwards.
        let mut coeffs = vec![0.0; n + 1];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.5 * (values[0] + if k % 2 == 0 { values[n] } else { -values[n] });
            for (j, &y) in values.iter().enumerate().take(n).skip(1) {
                acc += y * (PI * (j * k) as f64 / n as f64).cos();
            }
            *c = 2.0 * acc / n as f64;
        }
        coeffs[0] *= 0.5;
        coeffs[n] *= 0.5;
        ChebInterpolant { a, b, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Clenshaw evaluation.
    pub fn value(&self, x: f64) -> f64 {
        let xi = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let t = 2.0 * xi * b1 - b2 + c;
            b2 = b1;
            b1 = t;
        }
        xi * b1 - b2 + self.coeffs[0]
    }

    /// Interpolant of the derivative (degree drops by one).
    pub fn derivative(&self) -> ChebInterpolant {
        let n = self.degree();
        let scale = 2.0 / (self.b - self.a);
        if n == 0 {
            return ChebInterpolant { a: self.a, b: self.b, coeffs: vec![0.0] };
        }
        let mut d = vec![0.0; n + 1];
        // d_{k-1} = d_{k+1} + 2k c_k, downward.
        for k in (1..=n).rev() {
            d[k - 1] = if k + 1 <= n { d[k + 1] } else { 0.0 } + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        d.truncate(n);
        for c in &mut d {
            *c *= scale;
        }
        ChebInterpolant { a: self.a, b: self.b, coeffs: d }
    }

    /// m-fold derivative interpolant.
    pub fn derivative_n(&self, m: usize) -> ChebInterpolant {
        let mut d = self.clone();
        for _ in 0..m {
            d = d.derivative();
        }
        d
    }

    /// Magnitude of the trailing two coefficients relative to the
    /// largest one; a proxy for the interpolation error.
    pub fn tail_fraction(&self) -> f64 {
        let n = self.coeffs.len();
        let scale = self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        if scale == 0.0 || n < 3 {
            return 0.0;
        }
        (self.coeffs[n - 1].abs() + self.coeffs[n - 2].abs()) / scale
    }
}

/// m-th classical derivative of `f` at `x`, by spectral differentiation
/// of a Chebyshev fit on [lo, hi] (which must contain x).
///
/// Convergence is certified by halving: the degree-n/2 sub-fit (on the
/// even Lobatto nodes, no extra evaluations) must agree with the full
/// fit to `tol` at x, otherwise the degree is doubled; failure at
/// degree 64 is reported as [`Error::InterpolationFailure`].
pub fn derivative_at<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    x: f64,
    lo: f64,
    hi: f64,
    m: usize,
    tol: f64,
) -> Result<f64> {
    debug_assert!(lo <= x && x <= hi);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut n = 16usize;
    loop {
        let mut values = Vec::with_capacity(n + 1);
        for j in 0..=n {
            values.push(f(mid + half * (PI * j as f64 / n as f64).cos())?);
        }
        let full = ChebInterpolant::from_lobatto_values(lo, hi, &values);
        let coarse_values: Vec<f64> = values.iter().step_by(2).copied().collect();
        let coarse = ChebInterpolant::from_lobatto_values(lo, hi, &coarse_values);
        let v_full = full.derivative_n(m).value(x);
        let v_coarse = coarse.derivative_n(m).value(x);
        let diff = (v_full - v_coarse).abs();
        if diff <= tol * (1.0 + v_full.abs()) {
            return Ok(v_full);
        }
        if n >= 64 {
            return Err(Error::InterpolationFailure(format!(
                "degree-{n} Chebyshev derivative on [{lo}, {hi}] still moving by {diff:.3e} \
                 under halving check (tol {tol:.3e})"
            )));
        }
        n *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_polynomial_exactly() {
        let p = ChebInterpolant::fit(|x| Ok(1.0 + 2.0 * x + 3.0 * x * x * x), -1.5, 2.0, 8).unwrap();
        for &x in &[-1.2, 0.0, 0.7, 1.9] {
            let want = 1.0 + 2.0 * x + 3.0 * x * x * x;
            assert!((p.value(x) - want).abs() < 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn derivative_of_exponential() {
        let p = ChebInterpolant::fit(|x| Ok(x.exp()), 0.5, 2.5, 24).unwrap();
        let d = p.derivative();
        let d3 = p.derivative_n(3);
        for &x in &[0.6, 1.5, 2.4] {
            assert!((d.value(x) - x.exp()).abs() < 1e-10 * x.exp());
            assert!((d3.value(x) - x.exp()).abs() < 1e-7 * x.exp());
        }
    }

    #[test]
    fn derivative_at_with_halving() {
        let v = derivative_at(|x| Ok((2.0 * x).sin()), 1.0, 0.5, 1.5, 2, 1e-10).unwrap();
        let want = -4.0 * (2.0_f64).sin();
        assert!((v - want).abs() < 1e-8, "{v} vs {want}");
    }

    #[test]
    fn rough_function_fails_halving() {
        // |x - 1.03| has a kink inside the interval; the second
        // derivative cannot converge.
        let r = derivative_at(|x: f64| Ok((x - 1.03).abs()), 1.0, 0.5, 1.5, 2, 1e-10);
        assert!(matches!(r, Err(Error::InterpolationFailure(_))));
    }

    #[test]
    fn tail_fraction_decays_for_analytic_functions() {
        let p = ChebInterpolant::fit(|x| Ok(1.0 / (2.0 + x)), -1.0, 1.0, 32).unwrap();
        assert!(p.tail_fraction() < 1e-10, "tail {}", p.tail_fraction());
    }
}
