//! Checks the production Prabhakar evaluator against the
//! extended-precision summation oracle, including honesty of the
//! reported error estimates.

mod common;

use prabhakar_core::mlf::{prabhakar_e_info, SeriesControl};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CTL: SeriesControl = SeriesControl { abs_tol: 1e-16, rel_tol: 1e-15, max_terms: 30_000 };

#[test]
fn dd_machinery_matches_external_references() {
    common::validate_dd_oracle();
}

#[test]
fn evaluator_matches_oracle_where_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240901);
    let mut kept = 0usize;
    let mut skipped = 0usize;
    let mut worst_rel = 0.0_f64;
    let mut worst_est_ratio = 0.0_f64;
    while kept < 300 {
        let alpha = rng.random_range(0.2..1.8);
        let beta = rng.random_range(0.1..2.5);
        let gamma = rng.random_range(-2.0..2.0);
        let z = rng.random_range(-5.0..5.0);
        let info = match prabhakar_e_info(alpha, beta, gamma, z, &CTL) {
            Ok(i) => i,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let Some(want) = common::prabhakar_oracle(alpha, beta, gamma, z) else {
            skipped += 1;
            continue;
        };
        let actual = (info.value - want).abs();
        if want.abs() > 1e-280 {
            let rel = actual / want.abs();
            // Only certified-accurate draws must sit at 1e-12; the rest
            // are bounded by their own estimate.
            if info.err_estimate <= 2.5e-13 * info.value.abs() {
                assert!(
                    rel < 1e-12,
                    "certified draw off: ({alpha},{beta},{gamma},{z}) rel {rel:.3e} est {:.3e}",
                    info.err_estimate
                );
                worst_rel = worst_rel.max(rel);
                kept += 1;
            }
        }
        if actual > 0.0 {
            let ratio = actual / info.err_estimate.max(1e-300);
            worst_est_ratio = worst_est_ratio.max(ratio);
            assert!(
                ratio < 8.0,
                "error estimate dishonest by {ratio:.1}x at ({alpha},{beta},{gamma},{z}): \
                 actual {actual:.3e} vs estimate {:.3e}",
                info.err_estimate
            );
        }
    }
    println!(
        "oracle corpus: kept {kept}, skipped {skipped}, worst certified rel {worst_rel:.3e}, \
         worst actual/estimate {worst_est_ratio:.2}"
    );
}
