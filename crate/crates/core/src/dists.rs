//! Symmetric unit-variance laws, their tails, single-variable moments and
//! sampling.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quad::{integrate_with_breakpoints, QuadOptions};
use crate::scalar::Scalar;
use crate::special::{ln_gamma, ln_gaussian_two_sided_tail};

/// One symmetric law with `E X^2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum DistributionSpec<F> {
    /// `P(X = 1) = P(X = -1) = 1/2`.
    Rademacher,
    /// Density `2^{-1/2} exp(-sqrt(2)|x|)`.
    SymExponential,
    Gaussian,
    /// `P(|X| >= t) = exp(-(t/scale)^shape)`, `shape >= 1`.
    WeibullTail {
        shape: F,
        scale: F,
    },
}

/// Tag without parameters, used where only the family matters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DistKind {
    Rademacher,
    SymExponential,
    Gaussian,
    WeibullTail,
}

impl std::fmt::Display for DistKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DistKind::Rademacher => "rademacher",
            DistKind::SymExponential => "symExponential",
            DistKind::Gaussian => "gaussian",
            DistKind::WeibullTail => "weibullTail",
        })
    }
}

/// Scale `b = Gamma(1 + 2/alpha)^{-1/2}` making the Weibull-tail law unit variance.
pub fn unit_variance_scale<F: Scalar>(alpha: F) -> F {
    (-F::lit(0.5) * ln_gamma(F::one() + F::lit(2.0) / alpha)).exp()
}

/// The unit-variance Weibull-tail law with shape `alpha`.
pub fn normalize_to_unit_variance<F: Scalar>(alpha: F) -> Result<DistributionSpec<F>> {
    if !(alpha >= F::one()) || !alpha.is_finite() {
        return Err(invalid(format!("Weibull-tail shape must be a finite value >= 1, got {alpha}")));
    }
    Ok(DistributionSpec::WeibullTail { shape: alpha, scale: unit_variance_scale(alpha) })
}

impl<F: Scalar> DistributionSpec<F> {
    pub fn weibull_tail(alpha: F) -> Result<Self> {
        normalize_to_unit_variance(alpha)
    }

    /// Accepts an explicit scale only if it is the unit-variance one.
    pub fn weibull_tail_with_scale(alpha: F, scale: F) -> Result<Self> {
        let d = normalize_to_unit_variance(alpha)?;
        let expected = unit_variance_scale(alpha);
        if !((scale - expected).abs() <= F::lit(1e-9) * expected) {
            return Err(invalid(format!("Weibull-tail scale {scale} is not the unit-variance scale {expected}")));
        }
        Ok(d)
    }

    /// Builds a law from its family tag; `alpha` is required for `weibullTail`.
    pub fn from_kind(kind: DistKind, alpha: Option<F>) -> Result<Self> {
        match kind {
            DistKind::Rademacher => Ok(Self::Rademacher),
            DistKind::SymExponential => Ok(Self::SymExponential),
            DistKind::Gaussian => Ok(Self::Gaussian),
            DistKind::WeibullTail => {
                let alpha = alpha.ok_or_else(|| invalid("weibullTail requires a shape alpha"))?;
                normalize_to_unit_variance(alpha)
            }
        }
    }

    pub fn kind(&self) -> DistKind {
        match self {
            Self::Rademacher => DistKind::Rademacher,
            Self::SymExponential => DistKind::SymExponential,
            Self::Gaussian => DistKind::Gaussian,
            Self::WeibullTail { .. } => DistKind::WeibullTail,
        }
    }

    /// `P(|X| >= t)`.
    pub fn tail_probability(&self, t: F) -> Result<F> {
        Ok(self.ln_tail_probability(t)?.exp())
    }

    /// `ln P(|X| >= t)`; `-inf` beyond the support.
    pub fn ln_tail_probability(&self, t: F) -> Result<F> {
        if !(t >= F::zero()) {
            return Err(invalid(format!("tail probability needs t >= 0, got {t}")));
        }
        Ok(match *self {
            Self::Rademacher => {
                if t <= F::one() {
                    F::zero()
                } else {
                    F::neg_infinity()
                }
            }
            Self::SymExponential => -F::SQRT_2() * t,
            Self::Gaussian => ln_gaussian_two_sided_tail(t),
            Self::WeibullTail { shape, scale } => -(t / scale).powf(shape),
        })
    }

    /// `N(t) = -ln P(|X| >= t)`, convex for every supported law.
    pub fn tail_exponent(&self, t: F) -> Result<F> {
        Ok(-self.ln_tail_probability(t)?)
    }

    /// `E|X|^p` for `p > -1`.
    pub fn absolute_moment(&self, p: F) -> Result<F> {
        if !(p > -F::one()) {
            return Err(invalid(format!("absolute moment needs p > -1, got {p}")));
        }
        Ok(match *self {
            Self::Rademacher => F::one(),
            Self::SymExponential => (ln_gamma(p + F::one()) - p * F::LN_2() / F::lit(2.0)).exp(),
            Self::Gaussian => gaussian_absolute_moment(p),
            Self::WeibullTail { shape, scale } => (p * scale.ln() + ln_gamma(F::one() + p / shape)).exp(),
        })
    }

    /// One draw. Each law consumes a fixed pattern of uniforms per draw except
    /// `Gaussian`, whose ziggurat sampler occasionally rejects.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> F {
        F::lit(self.sample_f64(rng))
    }

    #[inline]
    pub(crate) fn sample_f64<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Self::SymExponential => {
                let bits: u64 = rng.random();
                let sign = if bits & 1 == 0 { 1.0 } else { -1.0 };
                // 53 high bits -> U in (0, 1]
                let u = ((bits >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
                sign * (-u.ln()) * std::f64::consts::FRAC_1_SQRT_2
            }
            Self::Gaussian => rng.sample(StandardNormal),
            Self::WeibullTail { shape, scale } => {
                let bits: u64 = rng.random();
                let sign = if bits & 1 == 0 { 1.0 } else { -1.0 };
                let u = ((bits >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
                let shape = shape.to_f64_lossy();
                let e = -u.ln();
                let mag = if shape == 1.0 { e } else { e.powf(1.0 / shape) };
                sign * scale.to_f64_lossy() * mag
            }
        }
    }
}

/// `E|g|^p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi)` for a standard Gaussian `g`.
pub fn gaussian_absolute_moment<F: Scalar>(p: F) -> F {
    let two = F::lit(2.0);
    (p / two * F::LN_2() + ln_gamma((p + F::one()) / two) - F::PI().ln() / two).exp()
}

/// `gamma_p = ||N(0,1)||_p`, the p-th root of `E|g|^p`.
pub fn gamma_p<F: Scalar>(p: F) -> Result<F> {
    if !(p >= F::one()) || !p.is_finite() {
        return Err(invalid(format!("gamma_p needs p >= 1, got {p}")));
    }
    let two = F::lit(2.0);
    let ln_moment = p / two * F::LN_2() + ln_gamma((p + F::one()) / two) - F::PI().ln() / two;
    Ok((ln_moment / p).exp())
}

/// `E|a eps + b|^p = (|a+b|^p + |a-b|^p) / 2` for a Rademacher `eps`.
pub fn single_moment_rademacher<F: Scalar>(a: F, b: F, p: F) -> F {
    ((a + b).abs().powf(p) + (a - b).abs().powf(p)) / F::lit(2.0)
}

/// `E|a E + b|^p` for the symmetric exponential `E`.
///
/// For `p >= 2` the exact recursion
/// `E|aE+b|^p = |b|^p + p(p-1)/2 a^2 E|aE+b|^{p-2}` descends to an order in
/// `[0, 2)`. That base order is `1` at zero, closed form when `b = 0`, and
/// quadrature otherwise.
pub fn single_moment_exponential<F: Scalar>(a: F, b: F, p: F) -> Result<F> {
    if !(p >= F::zero()) || !p.is_finite() {
        return Err(invalid(format!("single-variable moment needs finite p >= 0, got {p}")));
    }
    if a == F::zero() {
        return Ok(b.abs().powf(p));
    }
    let two = F::lit(2.0);
    let steps = (p / two).floor();
    let base_order = p - two * steps;
    let mut moment = if base_order == F::zero() {
        F::one()
    } else if b == F::zero() {
        DistributionSpec::SymExponential.absolute_moment(base_order)? * a.abs().powf(base_order)
    } else {
        exponential_moment_quadrature(a, b, base_order)?
    };
    let mut q = base_order;
    let a2 = a * a;
    let babs = b.abs();
    for _ in 0..steps.to_usize().unwrap_or(0) {
        q = q + two;
        moment = babs.powf(q) + q * (q - F::one()) / two * a2 * moment;
    }
    Ok(moment)
}

/// `E|a E + b|^p` by direct quadrature, for any `p >= 0`.
///
/// Uses `u = exp(-sqrt(2) x)` to map the half line onto `(0, 1]`, with a
/// breakpoint at the kink `x = |b/a|`.
pub fn exponential_moment_quadrature<F: Scalar>(a: F, b: F, p: F) -> Result<F> {
    if !(p >= F::zero()) || !p.is_finite() {
        return Err(invalid(format!("single-variable moment needs finite p >= 0, got {p}")));
    }
    if a == F::zero() {
        return Ok(b.abs().powf(p));
    }
    let half = F::lit(0.5);
    let integrand = |u: F| {
        let x = -u.ln() / F::SQRT_2();
        let ax = a * x;
        half * ((b + ax).abs().powf(p) + (b - ax).abs().powf(p))
    };
    let kink = (-F::SQRT_2() * (b / a).abs()).exp();
    let mut points = vec![F::zero()];
    if kink > F::zero() && kink < F::one() {
        points.push(kink);
    }
    points.push(F::one());
    let r = integrate_with_breakpoints(integrand, &points, &QuadOptions::default())?;
    Ok(r.value)
}

/// Midpoint convexity of `t -> -ln P(|X| >= t)` over consecutive grid triples.
pub fn has_log_concave_tail_on_grid<F: Scalar>(d: &DistributionSpec<F>, grid: &[F], tol: F) -> Result<bool> {
    for w in grid.windows(2) {
        let mid = (w[0] + w[1]) / F::lit(2.0);
        let lhs = d.tail_exponent(mid)?;
        let rhs = (d.tail_exponent(w[0])? + d.tail_exponent(w[1])?) / F::lit(2.0);
        if rhs.is_infinite() {
            continue;
        }
        if lhs > rhs + tol {
            return Ok(false);
        }
    }
    Ok(true)
}
