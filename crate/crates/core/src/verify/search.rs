//! Random-restart hill climbing on the margin of one inequality.
//!
//! Every margin here comes from exact engines, so any negative value beyond
//! the numerical slack is an implementation bug, not sampling noise.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundSource;
use crate::coeffs::{l2_norm, rearrange_slice, split_index};
use crate::dists::{
    exponential_moment_quadrature, gaussian_absolute_moment, single_moment_exponential, single_moment_rademacher,
    DistributionSpec,
};
use crate::error::{invalid, Result};
use crate::summoments::{best_sum_moment, substream_rng, MonteCarloPlan};

use super::checks::{
    cos_product_margin, exact_enclosure_margin, exact_only, relative_margin, witness, Quantity, COS_PRODUCT_SLACK,
    NUMERICAL_SLACK, REC1_TOLERANCE,
};
use super::report::{CheckId, VerificationReport};
use super::sampling::sample_mixed;

/// Evaluations spent climbing from one random start.
pub const RESTART_EVERY: usize = 50;

const MIN_STEP: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SearchConfig {
    pub check: CheckId,
    pub n_min: usize,
    pub n_max: usize,
    pub p_grid: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
}

/// One point of the search space. `t` is the cosine-product argument, or
/// the shift `b` for the single-variable recursions.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchCase {
    pub coefficients: Vec<f64>,
    pub p: f64,
    pub t: f64,
}

fn p_range(check: CheckId) -> (f64, f64) {
    match check {
        CheckId::CosProduct => (f64::NEG_INFINITY, f64::INFINITY),
        CheckId::Comp1 => (2.0, 4.0),
        CheckId::Rec2 | CheckId::Logconc | CheckId::GaussGap | CheckId::Extremality => (3.0, f64::INFINITY),
        _ => (2.0, f64::INFINITY),
    }
}

fn uses_single_coefficient(check: CheckId) -> bool {
    matches!(check, CheckId::Rec1 | CheckId::Rec2)
}

fn slack(check: CheckId) -> f64 {
    match check {
        CheckId::CosProduct => COS_PRODUCT_SLACK,
        CheckId::Rec1 => REC1_TOLERANCE,
        _ => NUMERICAL_SLACK,
    }
}

fn gaussian_raw(v: &[f64], p: f64) -> f64 {
    gaussian_absolute_moment(p) * l2_norm(v).powf(p)
}

/// Signed margin of `check` at `case` from exact engines. `None` when an
/// engine declines the input or `p` is outside the statement's range.
pub fn case_margin(check: CheckId, case: &SearchCase) -> Result<Option<f64>> {
    let (lo, hi) = p_range(check);
    let p = case.p;
    if check != CheckId::CosProduct && !(p >= lo && p <= hi) {
        return Ok(None);
    }
    let v = case.coefficients.as_slice();
    let unused = MonteCarloPlan { samples: 0, seed: 0 };
    let exact = |w: &[f64], d: &DistributionSpec<f64>| match best_sum_moment(w, d, p, exact_only(), unused) {
        Ok(m) => Ok(Some(m)),
        Err(e) if e.is_capacity() => Ok(None),
        Err(e) => Err(e),
    };
    let rel = |big: f64, small: f64| relative_margin(Quantity::exact(big), Quantity::exact(small)).0;
    let enclosure = |d: DistributionSpec<f64>, source: BoundSource| match exact_enclosure_margin(v, &d, p, source) {
        Ok(m) => Ok(Some(m)),
        Err(e) if e.is_capacity() => Ok(None),
        Err(e) => Err(e),
    };
    let margin = match check {
        CheckId::CosProduct => Some(cos_product_margin(&rearrange_slice(v), case.t)),
        CheckId::Comp2 => {
            let sorted = rearrange_slice(v);
            let tail = &sorted[(split_index(p) - 1).min(sorted.len())..];
            let (Some(r), Some(e)) =
                (exact(v, &DistributionSpec::Rademacher)?, exact(tail, &DistributionSpec::SymExponential)?)
            else {
                return Ok(None);
            };
            Some(
                rel(gaussian_raw(v, p), r.raw_moment)
                    .min(rel(r.raw_moment, e.raw_moment))
                    .min(rel(e.raw_moment, gaussian_raw(tail, p))),
            )
        }
        CheckId::Comp1 => {
            let sorted = rearrange_slice(v);
            if sorted.is_empty() {
                return Ok(Some(0.0));
            }
            let (Some(r), Some(e)) = (
                exact(&sorted, &DistributionSpec::Rademacher)?,
                exact(&sorted[1..], &DistributionSpec::SymExponential)?,
            ) else {
                return Ok(None);
            };
            Some(rel(r.raw_moment, e.raw_moment))
        }
        CheckId::Extremality => {
            // the Gaussian has log-concave tails and an exact sum moment
            let (Some(r), Some(e)) =
                (exact(v, &DistributionSpec::Rademacher)?, exact(v, &DistributionSpec::SymExponential)?)
            else {
                return Ok(None);
            };
            let g = gaussian_raw(v, p);
            Some(rel(g, r.raw_moment).min(rel(e.raw_moment, g)))
        }
        CheckId::Rec1 => {
            let (a, b) = (v.first().copied().unwrap_or(0.0), case.t);
            let recursive = single_moment_exponential(a, b, p)?;
            let one_step =
                b.abs().powf(p) + p * (p - 1.0) / 2.0 * a * a * exponential_moment_quadrature(a, b, p - 2.0)?;
            Some(-rel(recursive, one_step).abs())
        }
        CheckId::Rec2 => {
            let (a, b) = (v.first().copied().unwrap_or(0.0), case.t);
            let lhs = single_moment_rademacher(a, b, p);
            Some(rel(lhs, b.abs().powf(p) + p * (p - 1.0) / 2.0 * a * a * b.abs().powf(p - 2.0)))
        }
        CheckId::Estrad => enclosure(DistributionSpec::Rademacher, BoundSource::Estrad)?,
        CheckId::Estexp => enclosure(DistributionSpec::SymExponential, BoundSource::Estexp)?,
        CheckId::Logconc => enclosure(DistributionSpec::SymExponential, BoundSource::Logconc)?,
        CheckId::GaussGap => {
            let r = enclosure(DistributionSpec::Rademacher, BoundSource::GaussGap)?;
            let e = enclosure(DistributionSpec::SymExponential, BoundSource::GaussGap)?;
            match (r, e) {
                (Some(r), Some(e)) => Some(r.min(e)),
                _ => None,
            }
        }
        CheckId::Sandwich => {
            let mut worst: Option<f64> = None;
            for c in [CheckId::Estrad, CheckId::Estexp, CheckId::Logconc, CheckId::GaussGap] {
                if let Some(m) = case_margin(c, case)? {
                    worst = Some(worst.map_or(m, |w| w.min(m)));
                }
            }
            worst
        }
    };
    Ok(margin)
}

fn random_case<R: Rng + ?Sized>(rng: &mut R, cfg: &SearchConfig, grid: &[f64]) -> SearchCase {
    let n = if uses_single_coefficient(cfg.check) { 1 } else { rng.random_range(cfg.n_min..=cfg.n_max) };
    let coefficients = sample_mixed(rng, n);
    let p = grid[rng.random_range(0..grid.len())];
    let t = match cfg.check {
        CheckId::CosProduct => rng.random_range(0.0..50.0),
        _ => rng.random_range(-3.0..3.0),
    };
    SearchCase { coefficients, p, t }
}

fn perturb<R: Rng + ?Sized>(rng: &mut R, case: &SearchCase, step: f64, check: CheckId) -> SearchCase {
    let mut next = case.clone();
    let has_t = matches!(check, CheckId::CosProduct | CheckId::Rec1 | CheckId::Rec2);
    let slots = next.coefficients.len() + usize::from(has_t);
    let k = rng.random_range(0..slots.max(1));
    let z: f64 = rng.sample(StandardNormal);
    if k < next.coefficients.len() {
        next.coefficients[k] += step * z;
    } else if check == CheckId::CosProduct {
        next.t = (next.t + 5.0 * step * z).abs();
    } else {
        next.t += step * z;
    }
    next
}

/// Random restarts with coordinate-wise perturbation, minimizing the margin of `cfg.check`.
///
/// Restart `r` draws from substream `r` of the seed, so a longer run extends
/// a shorter one: cases are only ever added and the worst margin never rises.
pub fn search_counterexamples(cfg: &SearchConfig) -> Result<VerificationReport> {
    if cfg.iterations == 0 {
        return Err(invalid("search needs at least one iteration"));
    }
    if cfg.n_min == 0 || cfg.n_min > cfg.n_max {
        return Err(invalid(format!("invalid size range [{}, {}]", cfg.n_min, cfg.n_max)));
    }
    let (lo, hi) = p_range(cfg.check);
    let grid: Vec<f64> = cfg.p_grid.iter().copied().filter(|p| *p >= lo && *p <= hi).collect();
    if grid.is_empty() && cfg.check != CheckId::CosProduct {
        return Err(invalid(format!("no order in the p grid suits {}", cfg.check)));
    }
    let grid = if grid.is_empty() { vec![2.0] } else { grid };
    let check = cfg.check;
    let slack = slack(check);
    let mut report = VerificationReport::new(check, cfg.seed);
    let mut spent = 0;
    let mut restart = 0u64;
    while spent < cfg.iterations {
        let mut rng = substream_rng(cfg.seed, restart);
        restart += 1;
        let mut current = random_case(&mut rng, cfg, &grid);
        spent += 1;
        let mut current_margin = case_margin(check, &current)?;
        if let Some(m) = current_margin {
            report.record_exact(m, slack, || witness(&current.coefficients, Some(current.p), Some(current.t)));
        }
        let mut step = 0.25;
        for _ in 1..RESTART_EVERY {
            if spent >= cfg.iterations {
                break;
            }
            spent += 1;
            let candidate = perturb(&mut rng, &current, step, check);
            let Some(m) = case_margin(check, &candidate)? else {
                step = (step * 0.7).max(MIN_STEP);
                continue;
            };
            report.record_exact(m, slack, || witness(&candidate.coefficients, Some(candidate.p), Some(candidate.t)));
            if current_margin.is_none_or(|c| m < c) {
                current = candidate;
                current_margin = Some(m);
            } else {
                step = (step * 0.9).max(MIN_STEP);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_vector_has_zero_margins() {
        for check in CheckId::ALL {
            let case = SearchCase { coefficients: vec![0.0; 4], p: 4.0, t: 1.5 };
            let m = case_margin(check, &case).unwrap();
            if let Some(m) = m {
                if check == CheckId::Rec2 {
                    // |b|^p on both sides
                    assert!(m.abs() < 1e-15, "{check}: {m}");
                } else {
                    assert_eq!(m, 0.0, "{check}");
                }
            }
        }
    }

    #[test]
    fn out_of_range_orders_are_skipped() {
        let case = SearchCase { coefficients: vec![1.0, 0.5], p: 5.0, t: 0.0 };
        assert_eq!(case_margin(CheckId::Comp1, &case).unwrap(), None);
    }

    #[test]
    fn longer_runs_extend_shorter_ones() {
        let mut cfg = SearchConfig {
            check: CheckId::Comp2,
            n_min: 1,
            n_max: 5,
            p_grid: vec![2.5, 3.0, 4.0],
            iterations: 120,
            seed: 9,
        };
        let short = search_counterexamples(&cfg).unwrap();
        cfg.iterations = 300;
        let long = search_counterexamples(&cfg).unwrap();
        assert!(long.cases >= short.cases);
        assert!(long.worst_margin.unwrap() <= short.worst_margin.unwrap());
        assert_eq!(long.violations, 0);
    }

    #[test]
    fn rejects_bad_configs() {
        let cfg =
            SearchConfig { check: CheckId::Comp1, n_min: 1, n_max: 3, p_grid: vec![5.0], iterations: 10, seed: 1 };
        assert!(search_counterexamples(&cfg).is_err());
        let cfg = SearchConfig { iterations: 0, p_grid: vec![3.0], ..cfg };
        assert!(search_counterexamples(&cfg).is_err());
    }
}
