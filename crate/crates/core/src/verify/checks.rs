//! One function per inequality. Each returns a [`VerificationReport`] whose
//! margins are relative to the larger side unless stated otherwise.

use crate::bounds::{
    comparison_bounds, exponential_bounds, gaussian_approx_gap, khintchine_bounds, logconcave_bounds, logconcave_head,
    rademacher_bounds, BoundSource,
};
use crate::coeffs::{is_nonincreasing_abs, l2_norm, max_abs, rearrange_slice, split_index};
use crate::dists::{
    exponential_moment_quadrature, gamma_p, gaussian_absolute_moment, normalize_to_unit_variance,
    single_moment_exponential, single_moment_rademacher, DistributionSpec,
};
use crate::error::{invalid, Error, Result};
use crate::summoments::{best_sum_moment, monte_carlo_sum_moment, EngineChain, MomentEstimate, MonteCarloPlan};

use super::report::{CheckId, Verdict, VerificationReport, Witness};
use super::sampling::derive_seed;
use crate::summoments::substream_rng;

/// Relative slack granted to comparisons between exact values.
pub const NUMERICAL_SLACK: f64 = 1e-9;
/// Absolute slack of the cosine-product check.
pub const COS_PRODUCT_SLACK: f64 = 1e-12;
/// Relative agreement required between the two sides of the exponential recursion.
pub const REC1_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 200_000;

/// Settings shared by the statistical checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions {
    /// Monte Carlo sample count for terms without an exact engine.
    pub samples: usize,
    /// Relative slack for exact comparisons.
    pub slack: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, slack: NUMERICAL_SLACK }
    }
}

/// A value with an absolute halfwidth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Quantity {
    pub value: f64,
    pub halfwidth: f64,
}

impl Quantity {
    pub fn exact(value: f64) -> Self {
        Self { value, halfwidth: 0.0 }
    }

    pub fn raw(m: &MomentEstimate<f64>) -> Self {
        Self { value: m.raw_moment, halfwidth: m.raw_halfwidth() }
    }

    pub fn norm(m: &MomentEstimate<f64>) -> Self {
        Self { value: m.value, halfwidth: m.norm_halfwidth() }
    }
}

/// `(big - small) / scale` and the matching halfwidth; zero when both sides vanish.
pub(crate) fn relative_margin(big: Quantity, small: Quantity) -> (f64, f64) {
    let scale = big.value.abs().max(small.value.abs());
    if scale == 0.0 {
        return (0.0, 0.0);
    }
    ((big.value - small.value) / scale, (big.halfwidth + small.halfwidth) / scale)
}

fn compare(report: &mut VerificationReport, big: Quantity, small: Quantity, slack: f64, v: &[f64], p: f64) -> Verdict {
    let (margin, hw) = relative_margin(big, small);
    report.record(margin, hw, slack, || witness(v, Some(p), None))
}

pub(crate) fn witness(v: &[f64], p: Option<f64>, t: Option<f64>) -> Witness {
    Witness { coefficients: v.to_vec(), p, t }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(invalid(msg()))
    }
}

fn plan(seed: u64, opts: &CheckOptions, link: u64) -> MonteCarloPlan {
    MonteCarloPlan { samples: opts.samples, seed: derive_seed(seed, &[link]) }
}

/// `prod_i cos(a_i t) + a_1^2 t^2 / 2 - prod_{i>=2} 1/(1 + a_i^2 t^2 / 2)`.
pub fn cos_product_margin(v: &[f64], t: f64) -> f64 {
    let Some(&a1) = v.first() else {
        return 0.0;
    };
    let cos: f64 = v.iter().map(|a| (a * t).cos()).product();
    let laplace: f64 = v[1..].iter().map(|a| 1.0 / (1.0 + a * a * t * t / 2.0)).product();
    cos + a1 * a1 * t * t / 2.0 - laplace
}

/// `[0, 100]` at step `1e-3` followed by `10^4` uniform points in `[0, 10^4]`.
pub fn default_t_grid(seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut grid: Vec<f64> = (0..=100_000).map(|i| i as f64 * 1e-3).collect();
    let mut rng = substream_rng(seed, 0);
    grid.extend((0..10_000).map(|_| rng.random_range(0.0..=1e4)));
    grid
}

/// Cosine-product inequality at every grid point, absolute slack `1e-12`.
pub fn check_cos_product(v: &[f64], t_grid: &[f64]) -> Result<VerificationReport> {
    if v.is_empty() {
        return Err(Error::EmptyCoefficients);
    }
    require(is_nonincreasing_abs(v), || "cosine-product check needs |a_1| >= |a_2| >= ... >= |a_n|".into())?;
    let mut report = VerificationReport::new(CheckId::CosProduct, 0);
    for &t in t_grid {
        report.record_exact(cos_product_margin(v, t), COS_PRODUCT_SLACK, || witness(v, None, Some(t)));
    }
    Ok(report)
}

fn gaussian_raw(v: &[f64], p: f64) -> f64 {
    gaussian_absolute_moment(p) * l2_norm(v).powf(p)
}

/// `gamma_p^p ||a||_2^p >= E|sum a_i eps_i|^p >= E|sum_{i>=m} a*_i E_i|^p
/// >= gamma_p^p ||a*_{>=m}||_2^p` with `m = ceil(p/2)`, compared in raw moments.
pub fn check_comparison_chain(v: &[f64], p: f64, seed: u64, opts: &CheckOptions) -> Result<VerificationReport> {
    require(p >= 2.0 && p.is_finite(), || format!("comparison chain needs p >= 2, got {p}"))?;
    let sorted = rearrange_slice(v);
    let tail = &sorted[(split_index(p) - 1).min(sorted.len())..];
    let chain = EngineChain::default();
    let gauss = Quantity::exact(gaussian_raw(v, p));
    let rademacher = Quantity::raw(&best_sum_moment(v, &DistributionSpec::Rademacher, p, chain, plan(seed, opts, 1))?);
    let exponential =
        Quantity::raw(&best_sum_moment(tail, &DistributionSpec::SymExponential, p, chain, plan(seed, opts, 2))?);
    let gauss_tail = Quantity::exact(gaussian_raw(tail, p));

    let mut report = VerificationReport::new(CheckId::Comp2, seed);
    compare(&mut report, gauss, rademacher, opts.slack, v, p);
    compare(&mut report, rademacher, exponential, opts.slack, v, p);
    compare(&mut report, exponential, gauss_tail, opts.slack, v, p);
    Ok(report)
}

/// `E|sum a_i eps_i|^p <= E|sum a_i X_i|^p <= E|sum a_i E_i|^p` for the
/// unit-variance Weibull-tail law `X` of shape `alpha`, `p >= 3`.
///
/// The middle term is exact for a single nonzero coefficient and Monte Carlo otherwise.
pub fn check_extremality(v: &[f64], alpha: f64, p: f64, seed: u64, opts: &CheckOptions) -> Result<VerificationReport> {
    require(p >= 3.0 && p.is_finite(), || format!("extremality check needs p >= 3, got {p}"))?;
    let law = normalize_to_unit_variance(alpha)?;
    let chain = EngineChain::default();
    let left = Quantity::raw(&best_sum_moment(v, &DistributionSpec::Rademacher, p, chain, plan(seed, opts, 1))?);
    let right = Quantity::raw(&best_sum_moment(v, &DistributionSpec::SymExponential, p, chain, plan(seed, opts, 2))?);
    let nonzero: Vec<f64> = v.iter().copied().filter(|a| *a != 0.0).collect();
    let middle = match nonzero.as_slice() {
        [] => Quantity::exact(0.0),
        [a] => Quantity::exact(a.abs().powf(p) * law.absolute_moment(p)?),
        _ => Quantity::raw(&monte_carlo_sum_moment(v, &law, p, opts.samples, derive_seed(seed, &[3]))?),
    };
    let mut report = VerificationReport::new(CheckId::Extremality, seed);
    compare(&mut report, middle, left, opts.slack, v, p);
    compare(&mut report, right, middle, opts.slack, v, p);
    Ok(report)
}

struct Enclosure {
    source: BoundSource,
    lower: Quantity,
    upper: Quantity,
}

fn enclosure(source: BoundSource, lower: f64, upper: f64) -> Enclosure {
    Enclosure { source, lower: Quantity::exact(lower), upper: Quantity::exact(upper) }
}

/// Applicable bound intervals for `(v, d, p)`; `head` supplies the
/// log-concave head-sum norm when `p >= 3`.
fn enclosures(
    v: &[f64],
    d: &DistributionSpec<f64>,
    p: f64,
    head: impl FnOnce(&[f64]) -> Result<MomentEstimate<f64>>,
) -> Result<Vec<Enclosure>> {
    let mut out = Vec::new();
    if matches!(d, DistributionSpec::Rademacher) {
        for b in [rademacher_bounds(v, p)?, khintchine_bounds(v, p)?, comparison_bounds(v, p)?] {
            out.push(enclosure(b.source, b.lower, b.upper));
        }
    }
    if matches!(d, DistributionSpec::SymExponential) {
        let b = exponential_bounds(v, p)?;
        out.push(enclosure(b.source, b.lower, b.upper));
    }
    if p >= 3.0 {
        let sorted = rearrange_slice(v);
        let h = head(logconcave_head(&sorted, p))?;
        let b = logconcave_bounds(&sorted, d, p, &h)?;
        let gaussian_part = b.upper - h.value;
        let hq = Quantity::norm(&h);
        let lower = if h.value >= gaussian_part { hq } else { Quantity::exact(gaussian_part) };
        let upper = Quantity { value: b.upper, halfwidth: hq.halfwidth };
        out.push(Enclosure { source: BoundSource::Logconc, lower, upper });
        let g = gaussian_approx_gap(v, p)?;
        out.push(enclosure(g.source, g.lower, g.upper));
    }
    Ok(out)
}

/// Every applicable bound interval contains `||sum a_i X_i||_p`; for
/// `p >= 3` also `| ||S||_p - gamma_p ||a||_2 | <= p ||a||_inf` in signed form.
pub fn check_bounds_sandwich(
    v: &[f64],
    d: &DistributionSpec<f64>,
    p: f64,
    seed: u64,
    opts: &CheckOptions,
) -> Result<VerificationReport> {
    require(p >= 2.0 && p.is_finite(), || format!("bound sandwich needs p >= 2, got {p}"))?;
    let chain = EngineChain::default();
    let intervals = enclosures(v, d, p, |head| best_sum_moment(head, d, p, chain, plan(seed, opts, 2)))?;
    require(!intervals.is_empty(), || format!("no bound applies to {} at p = {p}", d.kind()))?;
    let reference = Quantity::norm(&best_sum_moment(v, d, p, chain, plan(seed, opts, 1))?);

    let mut report = VerificationReport::new(CheckId::Sandwich, seed);
    for e in &intervals {
        compare(&mut report, reference, e.lower, opts.slack, v, p);
        compare(&mut report, e.upper, reference, opts.slack, v, p);
    }
    if p >= 3.0 {
        let center = gamma_p(p)? * l2_norm(v);
        let radius = p * max_abs(v);
        let scale = reference.value.max(center).max(radius);
        let (margin, hw) = if scale == 0.0 {
            (0.0, 0.0)
        } else {
            ((radius - (reference.value - center).abs()) / scale, reference.halfwidth / scale)
        };
        report.record(margin, hw, opts.slack, || witness(v, Some(p), None));
    }
    Ok(report)
}

/// `E|sum_{i>=1} a_i eps_i|^p >= E|sum_{i>=2} a_i E_i|^p` for rearranged `v`, `2 <= p <= 4`.
pub fn check_p24_comparison(v: &[f64], p: f64, seed: u64, opts: &CheckOptions) -> Result<VerificationReport> {
    require((2.0..=4.0).contains(&p), || format!("p in [2, 4] required, got {p}"))?;
    if v.is_empty() {
        return Err(Error::EmptyCoefficients);
    }
    require(is_nonincreasing_abs(v), || "comparison needs |a_1| >= |a_2| >= ... >= |a_n|".into())?;
    let chain = EngineChain::default();
    let lhs = Quantity::raw(&best_sum_moment(v, &DistributionSpec::Rademacher, p, chain, plan(seed, opts, 1))?);
    let rhs =
        Quantity::raw(&best_sum_moment(&v[1..], &DistributionSpec::SymExponential, p, chain, plan(seed, opts, 2))?);
    let mut report = VerificationReport::new(CheckId::Comp1, seed);
    compare(&mut report, lhs, rhs, opts.slack, v, p);
    Ok(report)
}

/// Both sides of the exponential recursion for `p >= 2`: the recursive
/// engine against `|b|^p + p(p-1)/2 a^2 Q(p-2)` and against `Q(p)`, where `Q`
/// is direct quadrature. Margins are `-|relative difference|`.
pub fn check_rec1(a: f64, b: f64, p: f64) -> Result<VerificationReport> {
    require(p >= 2.0 && p.is_finite(), || format!("recursion needs p >= 2, got {p}"))?;
    let recursive = single_moment_exponential(a, b, p)?;
    let one_step = b.abs().powf(p) + p * (p - 1.0) / 2.0 * a * a * exponential_moment_quadrature(a, b, p - 2.0)?;
    let direct = exponential_moment_quadrature(a, b, p)?;
    let mut report = VerificationReport::new(CheckId::Rec1, 0);
    for other in [one_step, direct] {
        let (margin, _) = relative_margin(Quantity::exact(recursive), Quantity::exact(other));
        report.record_exact(-margin.abs(), REC1_TOLERANCE, || witness(&[a], Some(p), Some(b)));
    }
    Ok(report)
}

/// `E|a eps + b|^p >= |b|^p + p(p-1)/2 a^2 |b|^{p-2}` for `p >= 3`.
pub fn check_rec2(a: f64, b: f64, p: f64) -> Result<VerificationReport> {
    require(p >= 3.0 && p.is_finite(), || format!("Rademacher recursion bound needs p >= 3, got {p}"))?;
    let lhs = single_moment_rademacher(a, b, p);
    let rhs = b.abs().powf(p) + p * (p - 1.0) / 2.0 * a * a * b.abs().powf(p - 2.0);
    let mut report = VerificationReport::new(CheckId::Rec2, 0);
    let (margin, _) = relative_margin(Quantity::exact(lhs), Quantity::exact(rhs));
    report.record_exact(margin, NUMERICAL_SLACK, || witness(&[a], Some(p), Some(b)));
    Ok(report)
}

pub(crate) fn exact_only() -> EngineChain {
    EngineChain { exact: true, haagerup: false, monte_carlo: false }
}

/// Smallest relative margin of the bound intervals of `source` using exact engines only.
pub(crate) fn exact_enclosure_margin(v: &[f64], d: &DistributionSpec<f64>, p: f64, source: BoundSource) -> Result<f64> {
    let unused = MonteCarloPlan { samples: 0, seed: 0 };
    let reference = best_sum_moment(v, d, p, exact_only(), unused)?;
    let intervals = enclosures(v, d, p, |head| best_sum_moment(head, d, p, exact_only(), unused))?;
    let r = Quantity::norm(&reference);
    let mut worst = f64::INFINITY;
    for e in intervals.iter().filter(|e| e.source == source) {
        worst = worst.min(relative_margin(r, e.lower).0).min(relative_margin(e.upper, r).0);
    }
    if source == BoundSource::GaussGap {
        let center = gamma_p(p)? * l2_norm(v);
        let radius = p * max_abs(v);
        let scale = r.value.max(center).max(radius);
        if scale > 0.0 {
            worst = worst.min((radius - (r.value - center).abs()) / scale);
        } else {
            worst = worst.min(0.0);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn opts() -> CheckOptions {
        CheckOptions { samples: 50_000, ..CheckOptions::default() }
    }

    #[test]
    fn cos_product_examples() {
        assert_relative_eq!(cos_product_margin(&[1.0], 2.0), 2f64.cos() + 2.0 - 1.0, max_relative = 1e-15);
        let pi = std::f64::consts::PI;
        let m = cos_product_margin(&[1.0, 1.0], pi);
        assert_relative_eq!(m, 1.0 + pi * pi / 2.0 - 1.0 / (1.0 + pi * pi / 2.0), max_relative = 1e-14);
        assert!(m > 5.0);
        assert!(check_cos_product(&[1.0, 2.0], &[1.0]).is_err());
        assert!(check_cos_product(&[], &[1.0]).is_err());
        let r = check_cos_product(&[1.0; 10], &[0.0, 0.5, 1.0, 50.0]).unwrap();
        assert_eq!((r.cases, r.violations), (4, 0));
    }

    #[test]
    fn default_grid_shape() {
        let g = default_t_grid(1);
        assert_eq!(g.len(), 110_001);
        assert_eq!(g[100_000], 100.0);
        assert!(g[100_001..].iter().all(|t| (0.0..=1e4).contains(t)));
    }

    #[test]
    fn chain_for_three_ones() {
        let r = check_comparison_chain(&[1.0, 1.0, 1.0], 3.0, 5, &opts()).unwrap();
        assert_eq!(r.cases, 3);
        assert_eq!(r.violations, 0);
        assert_eq!(r.inconclusive, 0);
    }

    #[test]
    fn chain_is_equality_at_p2_single() {
        let r = check_comparison_chain(&[1.0, 0.0, 0.0], 2.0, 5, &opts()).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.worst_margin.unwrap().abs() < 1e-12);
    }

    #[test]
    fn extremality_single_term_is_exact() {
        let r = check_extremality(&[1.0], 3.0, 3.0, 1, &opts()).unwrap();
        assert_eq!((r.cases, r.violations, r.inconclusive, r.ci_resolved), (2, 0, 0, 0));
        assert!(check_extremality(&[1.0], 3.0, 2.5, 1, &opts()).is_err());
    }

    #[test]
    fn sandwich_examples() {
        let r = check_bounds_sandwich(&[1.0, 1.0, 1.0], &DistributionSpec::Rademacher, 3.0, 1, &opts()).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.cases, 2 * 5 + 1);
        let r = check_bounds_sandwich(&[1.0, 1.0], &DistributionSpec::SymExponential, 4.0, 1, &opts()).unwrap();
        assert_eq!(r.violations, 0);
        assert!(check_bounds_sandwich(&[1.0], &DistributionSpec::Gaussian, 2.5, 1, &opts()).is_err());
    }

    #[test]
    fn p24_examples() {
        let r = check_p24_comparison(&[1.0], 3.0, 1, &opts()).unwrap();
        assert_eq!(r.worst_margin, Some(1.0));
        let r = check_p24_comparison(&[1.0, 1.0], 3.0, 1, &opts()).unwrap();
        assert_relative_eq!(r.worst_margin.unwrap(), (4.0 - 3.0 / 2f64.sqrt()) / 4.0, max_relative = 1e-12);
        assert!(check_p24_comparison(&[1.0, 2.0], 3.0, 1, &opts()).is_err());
        assert!(check_p24_comparison(&[1.0], 4.5, 1, &opts()).is_err());
    }

    #[test]
    fn recursion_checks() {
        let r = check_rec1(0.7, -1.3, 4.5).unwrap();
        assert_eq!(r.violations, 0);
        let r = check_rec2(1.0, 1.0, 3.0).unwrap();
        assert!(r.worst_margin.unwrap().abs() < 1e-12);
        assert_eq!(r.violations, 0);
    }
}
