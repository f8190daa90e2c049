//! Closed-form two-sided bounds on `||sum a_i X_i||_p`.
//!
//! Every bound is expressed in terms of `gamma_p = ||N(0,1)||_p`, the
//! nonincreasing rearrangement `a*` and the split index `m = ceil(p/2)`:
//!
//! * Rademacher sums: `max{gamma_p ||a*_{>=m}||_2, sum_{i<m} a*_i / sqrt 2}` below,
//!   `gamma_p ||a*_{>=m}||_2 + sum_{i<m} a*_i` above.
//! * Symmetric exponential sums: `max{gamma_p ||a||_2, p ||a||_inf / (e sqrt 2)}`
//!   below, `gamma_p ||a||_2 + p ||a||_inf` above.
//! * Log-concave tails (`p >= 3`): `gamma_p ||a_{>=m}||_2` against the norm of
//!   the head sum over `i < p`.
//! * Gaussian approximation (`p >= 3`): `| ||S||_p - gamma_p ||a||_2 | <= p ||a||_inf`.

mod orlicz;

pub use orlicz::{gk_dual_norm, OrliczFunction, TailExponent, DUAL_NORM_MAX_TERMS};

use serde::{Deserialize, Serialize};

use crate::coeffs::{count_below, is_nonincreasing_abs, l2_norm, max_abs, rearrange_slice, split_index};
use crate::dists::{gamma_p, DistributionSpec};
use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::summoments::MomentEstimate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BoundSource {
    /// Rademacher head/tail bound.
    Estrad,
    /// Symmetric exponential bound.
    Estexp,
    /// Log-concave tail bound using the head-sum norm.
    Logconc,
    /// Gaussian approximation gap.
    GaussGap,
    /// `||S||_2 <= ||S||_p <= gamma_p ||a||_2` for Rademacher sums.
    Khintchine,
    /// `gamma_p ||a*_{>=m}||_2 <= ||S||_p <= gamma_p ||a||_2` for Rademacher sums.
    Comp2,
}

impl std::fmt::Display for BoundSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundSource::Estrad => "estrad",
            BoundSource::Estexp => "estexp",
            BoundSource::Logconc => "logconc",
            BoundSource::GaussGap => "gaussGap",
            BoundSource::Khintchine => "khintchine",
            BoundSource::Comp2 => "comp2",
        })
    }
}

/// A `[lower, upper]` enclosure of a norm, tagged with the bound that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundInterval<F> {
    pub lower: F,
    pub upper: F,
    pub source: BoundSource,
    pub p: F,
}

impl<F: Scalar> BoundInterval<F> {
    fn new(lower: F, upper: F, source: BoundSource, p: F) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower >= F::zero() && lower <= upper) {
            return Err(invalid(format!("{source} produced an invalid interval [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper, source, p })
    }

    pub fn contains(&self, x: F) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> F {
        self.upper - self.lower
    }
}

fn require_order<F: Scalar>(p: F, min: f64, what: &str) -> Result<()> {
    if !(p >= F::lit(min)) || !p.is_finite() {
        return Err(invalid(format!("{what} needs finite p >= {min}, got {p}")));
    }
    Ok(())
}

/// Two-sided bound for `||sum a_i eps_i||_p`, `p >= 2`.
pub fn rademacher_bounds<F: Scalar>(v: &[F], p: F) -> Result<BoundInterval<F>> {
    require_order(p, 2.0, "Rademacher bounds")?;
    let sorted = rearrange_slice(v);
    let cut = (split_index(p) - 1).min(sorted.len());
    let (head, tail) = sorted.split_at(cut);
    let gaussian_part = gamma_p(p)? * l2_norm(tail);
    let head_sum: F = head.iter().copied().sum();
    let lower = gaussian_part.max(head_sum / F::SQRT_2());
    let upper = gaussian_part + head_sum;
    // at p = 2 both sides are the same expression; keep them bit-identical
    BoundInterval::new(lower.min(upper), upper, BoundSource::Estrad, p)
}

/// Two-sided bound for `||sum a_i E_i||_p`, `p >= 2`.
pub fn exponential_bounds<F: Scalar>(v: &[F], p: F) -> Result<BoundInterval<F>> {
    require_order(p, 2.0, "exponential bounds")?;
    let gaussian_part = gamma_p(p)? * l2_norm(v);
    let sup = max_abs(v);
    let lower = gaussian_part.max(p * sup / (F::E() * F::SQRT_2()));
    let upper = gaussian_part + p * sup;
    BoundInterval::new(lower, upper, BoundSource::Estexp, p)
}

/// Two-sided bound for `||sum a_i X_i||_p` under log-concave tails, `p >= 3`.
///
/// `v` must already be rearranged. `head_norm` is `||sum_{i<p} a_i X_i||_p`.
/// The head (`i < p`) and tail (`i >= ceil(p/2)`) index sets overlap.
pub fn logconcave_bounds<F: Scalar>(
    v: &[F],
    _d: &DistributionSpec<F>,
    p: F,
    head_norm: &MomentEstimate<F>,
) -> Result<BoundInterval<F>> {
    require_order(p, 3.0, "log-concave bounds")?;
    if !is_nonincreasing_abs(v) {
        return Err(invalid("log-concave bounds need |a_1| >= |a_2| >= ... >= |a_n|"));
    }
    let tail = &v[(split_index(p) - 1).min(v.len())..];
    let gaussian_part = gamma_p(p)? * l2_norm(tail);
    let h = head_norm.value;
    BoundInterval::new(gaussian_part.max(h), gaussian_part + h, BoundSource::Logconc, p)
}

/// The coefficients `a_i`, `i < p`, entering the head-sum norm of [`logconcave_bounds`].
pub fn logconcave_head<F: Scalar>(v: &[F], p: F) -> &[F] {
    &v[..count_below(p).min(v.len())]
}

/// `[max{gamma_p ||a||_2 - p ||a||_inf, 0}, gamma_p ||a||_2 + p ||a||_inf]`, `p >= 3`.
pub fn gaussian_approx_gap<F: Scalar>(v: &[F], p: F) -> Result<BoundInterval<F>> {
    require_order(p, 3.0, "Gaussian approximation gap")?;
    let center = gamma_p(p)? * l2_norm(v);
    let radius = p * max_abs(v);
    BoundInterval::new((center - radius).max(F::zero()), center + radius, BoundSource::GaussGap, p)
}

/// `[||a||_2, gamma_p ||a||_2]` for Rademacher sums, `p >= 2`.
pub fn khintchine_bounds<F: Scalar>(v: &[F], p: F) -> Result<BoundInterval<F>> {
    require_order(p, 2.0, "Khintchine bounds")?;
    let s = l2_norm(v);
    let upper = gamma_p(p)? * s;
    BoundInterval::new(s.min(upper), upper, BoundSource::Khintchine, p)
}

/// Norm form of the comparison chain for Rademacher sums, `p >= 2`.
pub fn comparison_bounds<F: Scalar>(v: &[F], p: F) -> Result<BoundInterval<F>> {
    require_order(p, 2.0, "comparison bounds")?;
    let sorted = rearrange_slice(v);
    let tail = &sorted[(split_index(p) - 1).min(sorted.len())..];
    let g = gamma_p(p)?;
    let upper = g * l2_norm(v);
    BoundInterval::new((g * l2_norm(tail)).min(upper), upper, BoundSource::Comp2, p)
}

/// Every bound that applies to `(v, d, p)`, in a fixed order: the
/// Rademacher family (estrad, khintchine, comp2), estexp, then for `p >= 3`
/// logconc and the Gaussian gap. `head` supplies `||sum_{i<p} a*_i X_i||_p`.
pub fn applicable_bounds<F: Scalar>(
    v: &[F],
    d: &DistributionSpec<F>,
    p: F,
    head: impl FnOnce(&[F]) -> Result<MomentEstimate<F>>,
) -> Result<Vec<BoundInterval<F>>> {
    let mut out = Vec::new();
    if !(p >= F::lit(2.0)) {
        return Ok(out);
    }
    match d {
        DistributionSpec::Rademacher => {
            out.extend([rademacher_bounds(v, p)?, khintchine_bounds(v, p)?, comparison_bounds(v, p)?]);
        }
        DistributionSpec::SymExponential => out.push(exponential_bounds(v, p)?),
        _ => {}
    }
    if p >= F::lit(3.0) {
        let sorted = rearrange_slice(v);
        let h = head(logconcave_head(&sorted, p))?;
        out.push(logconcave_bounds(&sorted, d, p, &h)?);
        out.push(gaussian_approx_gap(v, p)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summoments::{Method, Rigor};
    use approx::assert_relative_eq;

    const G3: f64 = 1.168_575_254_962_465_5;

    #[test]
    fn rademacher_examples() {
        let b = rademacher_bounds(&[1.0f64, 1.0, 1.0], 2.0).unwrap();
        assert_relative_eq!(b.lower, 3f64.sqrt(), max_relative = 1e-12);
        assert_eq!(b.lower, b.upper);

        let b = rademacher_bounds(&[1.0f64, 1.0, 1.0], 3.0).unwrap();
        assert_relative_eq!(b.lower, 1.652_614_974_221_516_2, max_relative = 1e-12);
        assert_relative_eq!(b.upper, 2.652_614_974_221_516_2, max_relative = 1e-12);
        assert!(b.contains(1.957_433_820_584_431_8));

        let b = rademacher_bounds(&[5.0f64, 0.0, 0.0], 6.0).unwrap();
        assert_relative_eq!(b.lower, 5.0 / 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(b.upper, 5.0, max_relative = 1e-14);
        assert!(rademacher_bounds(&[1.0f64], 1.5).is_err());
    }

    #[test]
    fn exponential_examples() {
        let b = exponential_bounds(&[1.0f64, 1.0], 4.0).unwrap();
        assert_relative_eq!(b.lower, 1.861_209_718_204_199_2, max_relative = 1e-12);
        assert_relative_eq!(b.upper, 5.861_209_718_204_199_2, max_relative = 1e-12);
        assert!(b.contains(18f64.powf(0.25)));

        let b = exponential_bounds(&[1.0f64], 2.0).unwrap();
        assert_relative_eq!(b.lower, 1.0, max_relative = 1e-12);
        assert_relative_eq!(b.upper, 3.0, max_relative = 1e-12);

        let b = exponential_bounds(&[1.0f64], 6.0).unwrap();
        assert_relative_eq!(b.lower, 1.570_417_802_475_019_7, max_relative = 1e-12);
        assert_relative_eq!(b.upper, 7.570_417_802_475_019_7, max_relative = 1e-12);
        assert!(b.contains(90f64.powf(1.0 / 6.0)));
    }

    #[test]
    fn logconcave_examples() {
        let head = MomentEstimate::from_raw(3.0, 3.0 / 2f64.sqrt(), Method::PartialFractions, Rigor::Exact);
        let b = logconcave_bounds(&[1.0f64, 0.0, 0.0], &DistributionSpec::SymExponential, 3.0, &head).unwrap();
        assert_eq!(b.lower, head.value);
        assert_eq!(b.upper, head.value);

        let head = MomentEstimate::from_raw(3.0, 15.0 / (2.0 * 2f64.sqrt()), Method::PartialFractions, Rigor::Exact);
        assert_relative_eq!(head.value, 1.743_875_281_603_217_2, max_relative = 1e-12);
        let b = logconcave_bounds(&[1.0f64, 1.0, 1.0], &DistributionSpec::SymExponential, 3.0, &head).unwrap();
        assert_relative_eq!(b.lower, head.value.max(G3 * 2f64.sqrt()), max_relative = 1e-12);
        assert_relative_eq!(b.upper, G3 * 2f64.sqrt() + head.value, max_relative = 1e-12);

        assert!(logconcave_bounds(&[1.0f64, 2.0], &DistributionSpec::SymExponential, 3.0, &head).is_err());
        assert!(logconcave_bounds(&[1.0f64], &DistributionSpec::SymExponential, 2.5, &head).is_err());
        assert_eq!(logconcave_head(&[3.0f64, 2.0, 1.0, 0.5], 3.0), &[3.0, 2.0]);
        assert_eq!(logconcave_head(&[3.0f64, 2.0, 1.0, 0.5], 3.5), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn gauss_gap_examples() {
        let v = vec![0.1f64; 100];
        let b = gaussian_approx_gap(&v, 3.0).unwrap();
        assert_relative_eq!(b.lower, G3 - 0.3, max_relative = 1e-12);
        assert_relative_eq!(b.upper, G3 + 0.3, max_relative = 1e-12);

        let b = gaussian_approx_gap(&[1.0f64], 3.0).unwrap();
        assert_eq!(b.lower, 0.0);
        assert_relative_eq!(b.upper, G3 + 3.0, max_relative = 1e-12);

        let s = 0.5f64.sqrt();
        let b = gaussian_approx_gap(&[s, s], 4.0).unwrap();
        assert_eq!(b.lower, 0.0);
        assert_relative_eq!(b.upper, 3f64.powf(0.25) + 2.0 * 2f64.sqrt(), max_relative = 1e-12);
        assert!(gaussian_approx_gap(&[1.0f64], 2.9).is_err());
    }

    #[test]
    fn khintchine_and_comparison() {
        let k = khintchine_bounds(&[1.0f64, 1.0, 1.0], 3.0).unwrap();
        assert_relative_eq!(k.upper, 2.024_031_714_062_745, max_relative = 1e-12);
        let c = comparison_bounds(&[1.0f64, 1.0, 1.0], 3.0).unwrap();
        assert_relative_eq!(c.lower, 1.652_614_974_221_516_2, max_relative = 1e-12);
        assert_eq!(c.upper, k.upper);
    }

    #[test]
    fn applicable_sources_per_law() {
        let exact = |v: &[f64]| {
            Ok(MomentEstimate::from_raw(4.0, v.iter().map(|a| a * a).sum(), Method::ClosedForm, Rigor::Exact))
        };
        let sources = |d: DistributionSpec<f64>, p: f64| -> Vec<BoundSource> {
            applicable_bounds(&[1.0, 1.0], &d, p, exact).unwrap().iter().map(|b| b.source).collect()
        };
        use BoundSource::*;
        assert_eq!(sources(DistributionSpec::Rademacher, 2.5), [Estrad, Khintchine, Comp2]);
        assert_eq!(sources(DistributionSpec::Rademacher, 4.0), [Estrad, Khintchine, Comp2, Logconc, GaussGap]);
        assert_eq!(sources(DistributionSpec::SymExponential, 4.0), [Estexp, Logconc, GaussGap]);
        assert_eq!(sources(DistributionSpec::Gaussian, 2.5), []);
        assert_eq!(sources(DistributionSpec::Gaussian, 1.5), []);

        let b = applicable_bounds(&[1.0f64, 1.0], &DistributionSpec::SymExponential, 4.0, exact).unwrap();
        assert_relative_eq!(b[0].lower, 1.861_209_718_204_2, max_relative = 1e-12);
        assert_relative_eq!(b[0].upper, 5.861_209_718_204_2, max_relative = 1e-12);
    }
}
