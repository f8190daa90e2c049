//! Moments of weighted sums `S = sum a_i X_i` of independent symmetric random
//! variables.
//!
//! The crate computes `||S||_p` with several independent engines (exact sign
//! enumeration, Laplace partial fractions, a characteristic-function integral,
//! Monte Carlo), evaluates closed-form two-sided bounds built from the
//! Gaussian constant `gamma_p`, and checks the underlying inequalities
//! numerically.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the double-precision instantiation used by the
//! verification layer and the CLI.

pub mod bounds;
pub mod coeffs;
pub mod dists;
pub mod error;
pub mod quad;
pub mod scalar;
pub mod special;
pub mod summoments;
mod twofold;
pub mod verify;

pub use bounds::{BoundInterval, BoundSource, OrliczFunction};
pub use coeffs::CoefficientVector;
pub use dists::{gamma_p, DistKind, DistributionSpec};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use summoments::{Method, MomentEstimate, Rigor};

pub type CoefficientVector64 = CoefficientVector<f64>;
pub type CoefficientVector32 = CoefficientVector<f32>;
pub type DistributionSpec64 = DistributionSpec<f64>;
pub type DistributionSpec32 = DistributionSpec<f32>;
pub type MomentEstimate64 = MomentEstimate<f64>;
pub type MomentEstimate32 = MomentEstimate<f32>;
pub type BoundInterval64 = BoundInterval<f64>;
pub type BoundInterval32 = BoundInterval<f32>;
pub type OrliczFunction64 = OrliczFunction<f64>;
