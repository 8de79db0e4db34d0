//! Prabhakar fractional calculus toolkit.
//!
//! The crate evaluates the three-parameter Mittag-Leffler (Prabhakar)
//! function, applies the Prabhakar integral and the general n-level
//! Prabhakar derivative both exactly — on a closed algebra of
//! Mittag-Leffler terms — and numerically through weakly singular
//! quadrature, solves Cauchy problems and the time-fractional heat
//! equation by operational series, and ships a randomized identity
//! verification harness.
//!
//! Layout:
//! - [`gamma`]: lgamma / entire reciprocal gamma kernels
//! - [`mlf`]: Prabhakar function E^γ_{α,β} and the bivariate E₂ series
//! - [`algebra`]: the closed algebra of terms c·x^{μ-1}E^γ_{α,μ}(δx^α)
//! - [`quad`]: adaptive Gauss-Kronrod with endpoint-singularity splits
//! - [`cheb`]: Chebyshev interpolation and spectral differentiation
//! - [`operators`]: quadrature-path operators and the n-level derivative
//! - [`solvers`]: series solvers for the fractional IVP and heat equation
//! - [`verify`]: randomized identity suites with deterministic reports

pub mod algebra;
pub mod cheb;
pub mod error;
pub mod gamma;
pub mod mlf;
pub mod operators;
pub mod quad;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
pub use mlf::{PrabhakarParams, SeriesControl};
