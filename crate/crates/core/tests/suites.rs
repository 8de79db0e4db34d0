//! End-to-end runs of every verification suite at its working tolerance.

use prabhakar_core::verify::{run_suite, SuiteKind};

#[test]
fn semigroup_suite() {
    let s = run_suite(SuiteKind::Semigroup, 1, 25, 1e-10);
    assert!(s.passed(), "max defect {:.3e}\n{}", s.max_defect(), s.to_csv());
}

#[test]
fn inversion_suite() {
    let s = run_suite(SuiteKind::Inversion, 2, 25, 1e-6);
    assert!(s.passed(), "max defect {:.3e}\n{}", s.max_defect(), s.to_csv());
}

#[test]
fn thm31_suite() {
    let s = run_suite(SuiteKind::Thm31, 3, 25, 1e-6);
    assert!(s.passed(), "max defect {:.3e}\n{}", s.max_defect(), s.to_csv());
}

#[test]
fn reductions_suite() {
    let s = run_suite(SuiteKind::Reductions, 4, 25, 1e-8);
    assert!(s.passed(), "max defect {:.3e}\n{}", s.max_defect(), s.to_csv());
}

#[test]
fn ivp_residual_suite() {
    let s = run_suite(SuiteKind::IvpResidual, 5, 15, 1e-5);
    assert!(s.passed(), "max defect {:.3e}\n{}", s.max_defect(), s.to_csv());
}

#[test]
fn heat_mode_suite() {
    let s = run_suite(SuiteKind::HeatMode, 6, 10, 1e-6);
    assert!(s.passed(), "max defect {:.3e}\n{}", s.max_defect(), s.to_csv());
}
