//! The dual-norm functional `sup { sum a_i b_i : sum M_i(b_i) <= p }`.
//!
//! `M_i(x) = x^2` on `|x| <= 1` and `M_i(x) = N_i(|x|) = -ln P(|X_i| >= |x|)`
//! beyond, which may jump at `|x| = 1`. Fixing for each coordinate whether
//! `b_i <= 1` (quadratic regime) or `b_i >= 1` (tail regime) leaves a convex
//! separable program, solved exactly through its one-dimensional Lagrange dual
//! `min_{lambda >= 0} lambda p + sum_i sup_b (a_i b - lambda M_i(b))`. The
//! answer is the best value over all regime assignments.

use serde::{Deserialize, Serialize};

use crate::dists::DistributionSpec;
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::special::ln_gaussian_two_sided_tail;

/// Largest number of nonzero coefficients [`gk_dual_norm`] accepts; the
/// regime enumeration is exponential in it.
pub const DUAL_NORM_MAX_TERMS: usize = 20;

const BISECTION_STEPS: usize = 400;

/// The tail exponent `N(x) = -ln P(|X| >= x)` on `x > 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum TailExponent<F> {
    /// `N = inf`: the variable is bounded by one.
    Bounded,
    /// `N(x) = (x / scale)^shape`, `shape >= 1`.
    Power {
        scale: F,
        shape: F,
    },
    Gaussian,
}

/// One coordinate's Orlicz function `M_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OrliczFunction<F> {
    pub tail: TailExponent<F>,
}

impl<F: Scalar> OrliczFunction<F> {
    pub fn from_distribution(d: &DistributionSpec<F>) -> Self {
        let tail = match *d {
            DistributionSpec::Rademacher => TailExponent::Bounded,
            DistributionSpec::SymExponential => TailExponent::Power { scale: F::FRAC_1_SQRT_2(), shape: F::one() },
            DistributionSpec::Gaussian => TailExponent::Gaussian,
            DistributionSpec::WeibullTail { shape, scale } => TailExponent::Power { scale, shape },
        };
        Self { tail }
    }

    /// `M(x)`.
    pub fn eval(&self, x: F) -> F {
        let x = x.abs();
        if x <= F::one() {
            x * x
        } else {
            self.tail_exponent(x)
        }
    }

    /// `N(x)` for `x >= 1`; at `x = 1` this is the right limit of `M`.
    pub fn tail_exponent(&self, x: F) -> F {
        match self.tail {
            TailExponent::Bounded => F::infinity(),
            TailExponent::Power { scale, shape } => (x / scale).powf(shape),
            TailExponent::Gaussian => -ln_gaussian_two_sided_tail(x),
        }
    }

    /// `N'(x)` for `x >= 1`.
    fn tail_slope(&self, x: F) -> F {
        match self.tail {
            TailExponent::Bounded => F::infinity(),
            TailExponent::Power { scale, shape } => shape * (x / scale).powf(shape - F::one()) / scale,
            TailExponent::Gaussian => {
                // 2 phi(x) / P(|g| >= x)
                let ln_density = -x * x / F::lit(2.0) + (F::lit(2.0) / F::PI()).sqrt().ln();
                (ln_density - ln_gaussian_two_sided_tail(x)).exp()
            }
        }
    }

    /// `sup { x >= 0 : M(x) <= c }`, using the right limit at the jump.
    pub fn upper_inverse(&self, c: F) -> F {
        if c < F::zero() {
            return F::zero();
        }
        let quadratic = c.min(F::one()).sqrt();
        if !(c >= self.tail_exponent(F::one())) {
            return quadratic;
        }
        let tail = match self.tail {
            TailExponent::Bounded => F::one(),
            TailExponent::Power { scale, shape } => scale * c.powf(shape.recip()),
            TailExponent::Gaussian => {
                let (mut lo, mut hi) = (F::one(), F::lit(2.0));
                while self.tail_exponent(hi) <= c {
                    hi = hi * F::lit(2.0);
                }
                for _ in 0..BISECTION_STEPS {
                    let mid = (lo + hi) / F::lit(2.0);
                    if !(mid > lo && mid < hi) {
                        break;
                    }
                    if self.tail_exponent(mid) <= c {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        };
        quadratic.max(tail)
    }

    /// Convexity of `N` over consecutive triples of an increasing grid in
    /// `[1, inf)`, up to `tol` relative.
    pub fn is_tail_convex_on_grid(&self, grid: &[F], tol: F) -> bool {
        if matches!(self.tail, TailExponent::Bounded) {
            return true;
        }
        grid.windows(3).all(|w| {
            let (x0, x1, x2) = (w[0], w[1], w[2]);
            let (n0, n1, n2) = (self.tail_exponent(x0), self.tail_exponent(x1), self.tail_exponent(x2));
            let chord = n0 + (n2 - n0) * (x1 - x0) / (x2 - x0);
            n1 <= chord + tol * chord.abs().max(F::one())
        })
    }

    /// Maximizer of `a b - lambda N(b)` over `b >= 1` (smallest one on ties),
    /// or `None` when the supremum is infinite.
    fn tail_argmax(&self, a: F, lambda: F) -> Option<F> {
        match self.tail {
            TailExponent::Bounded => Some(F::one()),
            TailExponent::Power { scale, shape } => {
                if shape == F::one() {
                    return if a > lambda / scale { None } else { Some(F::one()) };
                }
                if lambda == F::zero() {
                    return if a > F::zero() { None } else { Some(F::one()) };
                }
                let stationary = (a * scale.powf(shape) / (lambda * shape)).powf((shape - F::one()).recip());
                Some(stationary.max(F::one()))
            }
            TailExponent::Gaussian => {
                if lambda == F::zero() {
                    return if a > F::zero() { None } else { Some(F::one()) };
                }
                let target = a / lambda;
                if self.tail_slope(F::one()) >= target {
                    return Some(F::one());
                }
                let (mut lo, mut hi) = (F::one(), F::lit(2.0));
                while self.tail_slope(hi) < target {
                    hi = hi * F::lit(2.0);
                }
                for _ in 0..BISECTION_STEPS {
                    let mid = (lo + hi) / F::lit(2.0);
                    if !(mid > lo && mid < hi) {
                        break;
                    }
                    if self.tail_slope(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some(hi)
            }
        }
    }

    /// Smallest multiplier at which the tail regime conjugate is finite.
    fn tail_lambda_floor(&self, a: F) -> F {
        match self.tail {
            TailExponent::Power { scale, shape } if shape == F::one() => a * scale,
            _ => F::zero(),
        }
    }
}

#[derive(Clone, Copy)]
struct Term<'a, F> {
    a: F,
    m: &'a OrliczFunction<F>,
    tail: bool,
}

impl<F: Scalar> Term<'_, F> {
    /// `(sup_b a b - lambda cost(b), cost at the smallest maximizer)`.
    fn conjugate(&self, lambda: F) -> (F, F) {
        if self.tail {
            match self.m.tail_argmax(self.a, lambda) {
                None => (F::infinity(), F::infinity()),
                Some(b) => {
                    let cost = self.m.tail_exponent(b);
                    (self.a * b - lambda * cost, cost)
                }
            }
        } else {
            let b = if lambda == F::zero() { F::one() } else { (self.a / (F::lit(2.0) * lambda)).min(F::one()) };
            (self.a * b - lambda * b * b, b * b)
        }
    }
}

/// Minimum of the Lagrange dual for one regime assignment.
fn solve_regime<F: Scalar>(terms: &[Term<'_, F>], budget: F) -> F {
    let spend = |lambda: F| -> F { terms.iter().map(|t| t.conjugate(lambda).1).sum() };
    let dual = |lambda: F| -> F { lambda * budget + terms.iter().map(|t| t.conjugate(lambda).0).sum::<F>() };

    let floor = terms.iter().filter(|t| t.tail).map(|t| t.m.tail_lambda_floor(t.a)).fold(F::zero(), F::max);
    if spend(floor) <= budget {
        return dual(floor);
    }
    let amax = terms.iter().fold(F::zero(), |m, t| m.max(t.a));
    let mut hi = floor.max(amax).max(F::min_positive_value());
    let mut doublings = 0;
    while spend(hi) > budget && doublings < 2000 {
        hi = hi * F::lit(2.0);
        doublings += 1;
    }
    let mut lo = floor;
    for _ in 0..BISECTION_STEPS {
        let mid = (lo + hi) / F::lit(2.0);
        if !(mid > lo && mid < hi) {
            break;
        }
        if spend(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    dual(hi)
}

/// `sup { sum a_i b_i : sum M_i(b_i) <= p }`.
///
/// Nonnegative `b` suffices by symmetry, so only `|a_i|` matters.
pub fn gk_dual_norm<F: Scalar>(v: &[F], m: &[OrliczFunction<F>], p: F) -> Result<F> {
    if v.len() != m.len() {
        return Err(invalid(format!("{} coefficients but {} Orlicz functions", v.len(), m.len())));
    }
    if !(p >= F::one()) || !p.is_finite() {
        return Err(invalid(format!("dual norm needs finite p >= 1, got {p}")));
    }
    let active: Vec<(F, &OrliczFunction<F>)> =
        v.iter().zip(m).filter(|(a, _)| **a != F::zero()).map(|(a, f)| (a.abs(), f)).collect();
    if active.is_empty() {
        return Ok(F::zero());
    }
    if active.len() > DUAL_NORM_MAX_TERMS {
        return Err(Error::Capacity(format!(
            "dual norm enumerates regimes of at most {DUAL_NORM_MAX_TERMS} nonzero terms, got {}",
            active.len()
        )));
    }
    let mut best = F::zero();
    for mask in 0u32..(1u32 << active.len()) {
        let terms: Vec<Term<'_, F>> =
            active.iter().enumerate().map(|(i, &(a, f))| Term { a, m: f, tail: (mask >> i) & 1 == 1 }).collect();
        let floor_cost: F = terms.iter().filter(|t| t.tail).map(|t| t.m.tail_exponent(F::one())).sum();
        if !(floor_cost <= p) {
            continue;
        }
        best = best.max(solve_regime(&terms, p));
    }
    if !best.is_finite() {
        return Err(Error::UnboundedSupremum);
    }
    Ok(best)
}
