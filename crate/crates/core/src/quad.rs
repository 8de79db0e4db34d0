//! Adaptive Gauss-Kronrod quadrature with explicit endpoint-singularity
//! substitutions.
//!
//! The fractional kernels integrated here have known algebraic
//! singularity exponents at both endpoints, so instead of letting the
//! adaptive rule grind against x^p behavior we substitute the
//! regularizing power map at each endpoint and hand the rule a bounded
//! integrand.

use crate::error::{Error, Result};

/// Gauss-Kronrod 7-15 nodes (positive half, Kronrod abscissae).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// 7-point Gauss weights (for the embedded error estimate).
const WG: [f64; 4] = [
    0.129_484_966_168_869_93,
    0.279_705_391_489_276_67,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// Budget and tolerances for adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadControl {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadControl {
    fn default() -> Self {
        QuadControl { abs_tol: 1e-9, rel_tol: 1e-9, max_intervals: 4000 }
    }
}

/// QUADPACK-style error rescaling: sharpens the raw |K15 - G7|
/// difference against the oscillation of the integrand.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// One G7/K15 panel; returns (integral, error estimate).
fn gk15<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center)?;

    let mut res_gauss = f_center * WG[3];
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = res_kronrod.abs();
    let mut fv = [0.0_f64; 15];
    fv[7] = f_center;

    for (j, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv[j] = f1;
        fv[14 - j] = f2;
        let fsum = f1 + f2;
        res_kronrod += WGK[j] * fsum;
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * fsum;
        }
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for (j, &v) in fv.iter().enumerate().take(7) {
        res_asc += WGK[j] * ((v - mean).abs() + (fv[14 - j] - mean).abs());
    }

    let err = rescale_error((res_kronrod - res_gauss) * half, res_abs * half.abs(), res_asc * half.abs());
    Ok((res_kronrod * half, err))
}

/// Adaptive integration of a bounded integrand on [a, b].
pub fn integrate<F: Fn(f64) -> Result<f64>>(f: F, a: f64, b: f64, ctl: &QuadControl) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&f, a, b)?;
    // (neg error, lo, hi, value, err); worst interval popped first.
    let mut intervals = vec![(a, b, v, e)];
    let mut total_err: f64 = e;
    let mut total_val = v;

    while total_err > ctl.abs_tol.max(ctl.rel_tol * total_val.abs()) {
        if intervals.len() >= ctl.max_intervals {
            return Err(Error::QuadratureFailure(format!(
                "error {total_err:.3e} above tolerance after {} intervals on [{a}, {b}]",
                intervals.len()
            )));
        }
        // Split the interval with the largest error estimate.
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty interval list");
        let (lo, hi, old_v, old_e) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval at floating-point resolution; accept its estimate.
            intervals.push((lo, hi, old_v, 0.0));
            total_err -= old_e;
            continue;
        }
        let (v1, e1) = gk15(&f, lo, mid)?;
        let (v2, e2) = gk15(&f, mid, hi)?;
        total_val += v1 + v2 - old_v;
        total_err += e1 + e2 - old_e;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
        if !total_val.is_finite() {
            return Err(Error::QuadratureFailure(format!(
                "integrand not integrable on [{a}, {b}] (non-finite partial result)"
            )));
        }
    }
    Ok(total_val)
}

/// ∫_a^b g dt where g behaves like (t-a)^p near a and (b-t)^q near b,
/// with p, q > -1.
///
/// The interval is split at its midpoint; each half is mapped by the
/// power substitution that flattens its endpoint singularity
/// (t = a + (m-a)u^{1/(1+p)} on the left, mirrored on the right), and
/// the transformed bounded integrands are integrated adaptively.
///
/// The integrand receives (t, t-a, b-t) with the endpoint distances
/// taken from the substitution itself; recomputing x-t from t near the
/// singular endpoint would cancel catastrophically.
pub fn integrate_endpoint_singular<F: Fn(f64, f64, f64) -> Result<f64>>(
    g: F,
    a: f64,
    b: f64,
    p: f64,
    q: f64,
    ctl: &QuadControl,
) -> Result<f64> {
    if !(p > -1.0) || !(q > -1.0) {
        return Err(Error::InvalidParams(format!(
            "endpoint exponents must be > -1 (got p={p}, q={q})"
        )));
    }
    if !(b > a) {
        if b == a {
            return Ok(0.0);
        }
        return Err(Error::InvalidParams(format!("bad interval [{a}, {b}]")));
    }
    let m = 0.5 * (a + b);
    let half_ctl = QuadControl { abs_tol: 0.5 * ctl.abs_tol, ..*ctl };

    // Left half: t = a + (m-a) u^s, s = 1/(1+p), u in [0, 1].
    let s = 1.0 / (1.0 + p);
    let w = m - a;
    let left = integrate(
        |u: f64| {
            let d = w * u.powf(s);
            Ok(g(a + d, d, (b - a) - d)? * w * s * u.powf(s - 1.0))
        },
        0.0,
        1.0,
        &half_ctl,
    )?;

    // Right half: t = b - (b-m) v^r, r = 1/(1+q).
    let r = 1.0 / (1.0 + q);
    let w2 = b - m;
    let right = integrate(
        |v: f64| {
            let d = w2 * v.powf(r);
            Ok(g(b - d, (b - a) - d, d)? * w2 * r * v.powf(r - 1.0))
        },
        0.0,
        1.0,
        &half_ctl,
    )?;

    Ok(left + right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_polynomial_is_exact() {
        let v = integrate(|t| Ok(3.0 * t * t), 0.0, 2.0, &QuadControl::default()).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_integrand() {
        // ∫_0^10 sin t dt = 1 - cos 10
        let v = integrate(|t| Ok(t.sin()), 0.0, 10.0, &QuadControl::default()).unwrap();
        assert!((v - (1.0 - 10.0_f64.cos())).abs() < 1e-10);
    }

    #[test]
    fn endpoint_singularities_beta_integral() {
        // ∫_0^1 t^{-1/2} (1-t)^{-1/3} dt = B(1/2, 2/3)
        let want = crate::gamma::gamma(0.5) * crate::gamma::gamma(2.0 / 3.0)
            / crate::gamma::gamma(0.5 + 2.0 / 3.0);
        let v = integrate_endpoint_singular(
            |_t, da, db| Ok(da.powf(-0.5) * db.powf(-1.0 / 3.0)),
            0.0,
            1.0,
            -0.5,
            -1.0 / 3.0,
            &QuadControl::default(),
        )
        .unwrap();
        assert!((v - want).abs() < 1e-9, "{v} vs {want}");
    }

    #[test]
    fn shifted_interval_singular() {
        // ∫_1^3 (t-1)^{-0.7} (3-t)^{-0.2} dt, reference via substitution to B
        let want = 2.0_f64.powf(-0.7 - 0.2 + 1.0)
            * crate::gamma::gamma(0.3)
            * crate::gamma::gamma(0.8)
            / crate::gamma::gamma(1.1);
        let v = integrate_endpoint_singular(
            |_t, da, db| Ok(da.powf(-0.7) * db.powf(-0.2)),
            1.0,
            3.0,
            -0.7,
            -0.2,
            &QuadControl::default(),
        )
        .unwrap();
        assert!((v - want).abs() < 1e-9 * want, "{v} vs {want}");
    }

    #[test]
    fn budget_exhaustion_reports_failure() {
        let tight = QuadControl { abs_tol: 1e-14, rel_tol: 1e-14, max_intervals: 4 };
        let r = integrate(|t: f64| Ok((50.0 * t).sin() * t.sqrt()), 0.0, 20.0, &tight);
        assert!(matches!(r, Err(Error::QuadratureFailure(_))));
    }
}
