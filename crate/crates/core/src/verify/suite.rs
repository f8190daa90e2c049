//! The full verification run: every check over the default grids plus a
//! counterexample search, one merged report per check.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::rearrange_slice;
use crate::dists::{normalize_to_unit_variance, DistributionSpec};
use crate::error::Result;
use crate::summoments::substream_rng;

use super::checks::{
    check_bounds_sandwich, check_comparison_chain, check_cos_product, check_extremality, check_p24_comparison,
    check_rec1, check_rec2, default_t_grid, CheckOptions,
};
use super::report::{CheckId, VerificationReport};
use super::sampling::{derive_seed, sample_mixed};
use super::search::{search_counterexamples, SearchConfig};

pub const DEFAULT_P_GRID: [f64; 8] = [2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 8.0];
pub const EXTREMALITY_SHAPES: [f64; 4] = [1.0, 1.5, 2.0, 3.0];
/// Largest vector length drawn for exact-engine checks.
pub const EXACT_MAX_N: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteConfig {
    pub seed: u64,
    pub checks: Vec<CheckId>,
    /// Random coefficient vectors per check.
    pub instances: usize,
    pub samples: usize,
    pub search_iterations: usize,
    pub p_grid: Vec<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            checks: CheckId::ALL.to_vec(),
            instances: 8,
            samples: 100_000,
            search_iterations: 1_000,
            p_grid: DEFAULT_P_GRID.to_vec(),
        }
    }
}

/// A unit of work: one check applied to one random instance.
type Job = Box<dyn Fn() -> Result<VerificationReport> + Send + Sync>;

fn jobs_for(check: CheckId, cfg: &SuiteConfig) -> Vec<Job> {
    let opts = CheckOptions { samples: cfg.samples, ..CheckOptions::default() };
    let seed = cfg.seed;
    let ps = cfg.p_grid.clone();
    let mut jobs: Vec<Job> = Vec::new();
    let tag = check as u64;
    for i in 0..cfg.instances {
        let case_seed = derive_seed(seed, &[tag, i as u64]);
        let mut rng = substream_rng(case_seed, 0);
        let n = rng.random_range(1..=EXACT_MAX_N);
        let v = sample_mixed(&mut rng, n);
        match check {
            CheckId::CosProduct => {
                let sorted = rearrange_slice(&v);
                jobs.push(Box::new(move || check_cos_product(&sorted, &default_t_grid(case_seed))));
            }
            CheckId::Comp2 => {
                for &p in ps.iter().filter(|p| **p >= 2.0) {
                    let v = v.clone();
                    jobs.push(Box::new(move || check_comparison_chain(&v, p, case_seed, &opts)));
                }
            }
            CheckId::Comp1 => {
                let sorted = rearrange_slice(&v);
                for &p in ps.iter().filter(|p| (2.0..=4.0).contains(*p)) {
                    let sorted = sorted.clone();
                    jobs.push(Box::new(move || check_p24_comparison(&sorted, p, case_seed, &opts)));
                }
            }
            CheckId::Extremality => {
                for &alpha in &EXTREMALITY_SHAPES {
                    for &p in ps.iter().filter(|p| **p >= 3.0) {
                        let v = v.clone();
                        jobs.push(Box::new(move || check_extremality(&v, alpha, p, case_seed, &opts)));
                    }
                }
            }
            CheckId::Sandwich => {
                let laws: Vec<DistributionSpec<f64>> = vec![
                    DistributionSpec::Rademacher,
                    DistributionSpec::SymExponential,
                    DistributionSpec::Gaussian,
                    normalize_to_unit_variance(2.0).expect("valid shape"),
                ];
                for d in laws {
                    for &p in ps.iter().filter(|p| **p >= 2.0) {
                        let applicable =
                            p >= 3.0 || matches!(d, DistributionSpec::Rademacher | DistributionSpec::SymExponential);
                        if applicable {
                            let v = v.clone();
                            jobs.push(Box::new(move || check_bounds_sandwich(&v, &d, p, case_seed, &opts)));
                        }
                    }
                }
            }
            CheckId::Rec1 | CheckId::Rec2 => {
                let a: f64 = rng.random_range(-3.0..3.0);
                let b: f64 = rng.random_range(-3.0..3.0);
                let min_p = if check == CheckId::Rec1 { 2.0 } else { 3.0 };
                for &p in ps.iter().filter(|p| **p >= min_p) {
                    if check == CheckId::Rec1 {
                        jobs.push(Box::new(move || check_rec1(a, b, p)));
                    } else {
                        jobs.push(Box::new(move || check_rec2(a, b, p)));
                    }
                }
            }
            // covered by the sandwich and the search
            CheckId::Estrad | CheckId::Estexp | CheckId::Logconc | CheckId::GaussGap => {}
        }
    }
    jobs
}

/// One report for `check`: instance checks and the counterexample search,
/// merged in job order.
pub fn run_check(check: CheckId, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let jobs = jobs_for(check, cfg);
    let reports: Vec<Result<VerificationReport>> = jobs.par_iter().map(|job| job()).collect();
    let mut merged = VerificationReport::new(check, cfg.seed);
    for r in reports {
        let mut r = r?;
        r.check = check;
        r.seed = cfg.seed;
        merged = merged.merge(r);
    }
    if cfg.search_iterations > 0 {
        let search = search_counterexamples(&SearchConfig {
            check,
            n_min: 1,
            n_max: EXACT_MAX_N,
            p_grid: cfg.p_grid.clone(),
            iterations: cfg.search_iterations,
            seed: derive_seed(cfg.seed, &[check as u64, u64::MAX]),
        })?;
        merged = merged.merge(VerificationReport { seed: cfg.seed, ..search });
    }
    Ok(merged)
}

/// Every configured check, in configuration order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    cfg.checks.iter().map(|&c| run_check(c, cfg)).collect()
}
