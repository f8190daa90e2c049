//! Numerical verification of the moment inequalities.
//!
//! Exact comparisons use a relative slack of `1e-9` (the cosine-product
//! check an absolute `1e-12`). Comparisons involving Monte Carlo or
//! quadrature-tolerance values are additionally widened by their halfwidth
//! and reported inconclusive when the widened interval straddles zero.

mod checks;
mod report;
mod sampling;
mod search;
mod suite;

pub use checks::{
    check_bounds_sandwich, check_comparison_chain, check_cos_product, check_extremality, check_p24_comparison,
    check_rec1, check_rec2, cos_product_margin, default_t_grid, CheckOptions, COS_PRODUCT_SLACK, DEFAULT_SAMPLES,
    NUMERICAL_SLACK, REC1_TOLERANCE,
};
pub use report::{CheckId, Verdict, VerificationReport, Witness};
pub use sampling::{derive_seed, sample_coefficients, sample_mixed, CoefficientRegime};
pub use search::{case_margin, search_counterexamples, SearchCase, SearchConfig, RESTART_EVERY};
pub use suite::{run_check, run_suite, SuiteConfig, DEFAULT_P_GRID, EXACT_MAX_N, EXTREMALITY_SHAPES};
