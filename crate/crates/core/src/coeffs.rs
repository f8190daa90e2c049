//! Coefficient vectors, nonincreasing rearrangements, `l_q` norms and the
//! head/tail index split at `ceil(p/2)`.
//!
//! All index contracts are 1-based: the head of a vector for moment order `p`
//! holds positions `i < ceil(p/2)` and the tail holds `i >= ceil(p/2)`.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// A finite, non-empty sequence of real weights `a_1, ..., a_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "Vec<F>",
    into = "Vec<F>",
    bound(serialize = "F: Scalar + Serialize", deserialize = "F: Scalar + Deserialize<'de>")
)]
pub struct CoefficientVector<F> {
    values: Vec<F>,
}

impl<F: Scalar> CoefficientVector<F> {
    pub fn new(values: Vec<F>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyCoefficients);
        }
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteCoefficient { index });
        }
        Ok(Self { values })
    }

    /// Builds from `f64` values, converting into `F`.
    pub fn from_f64(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| F::lit(x)).collect())
    }

    pub fn as_slice(&self) -> &[F] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<F> {
        self.values
    }

    /// The nonincreasing rearrangement `(a*_i)` of the absolute values.
    ///
    /// Ties keep their original relative order.
    pub fn rearrange(&self) -> Self {
        Self { values: rearrange_slice(&self.values) }
    }

    /// Whether `|a_1| >= |a_2| >= ... >= |a_n|`.
    pub fn is_rearranged(&self) -> bool {
        is_nonincreasing_abs(&self.values)
    }

    /// `(sum |a_i|^q)^(1/q)` for finite `q >= 1`, `max |a_i|` for `q = inf`.
    pub fn norm(&self, q: F) -> Result<F> {
        norm(&self.values, q)
    }

    pub fn l2_norm(&self) -> F {
        l2_norm(&self.values)
    }

    pub fn max_abs(&self) -> F {
        max_abs(&self.values)
    }

    /// Splits at `m = ceil(p/2)`: head holds 1-based positions `i < m`, tail `i >= m`.
    ///
    /// The split is positional; pass a rearranged vector to get the largest
    /// coefficients in the head. Either side may be empty.
    pub fn head_tail_split(&self, p: F) -> Result<(&[F], &[F])> {
        if !(p >= F::lit(2.0)) {
            return Err(invalid(format!("head/tail split needs p >= 2, got {p}")));
        }
        let m = split_index(p);
        let cut = (m - 1).min(self.values.len());
        Ok(self.values.split_at(cut))
    }

    /// Scales every entry by `lambda`.
    pub fn scaled(&self, lambda: F) -> Result<Self> {
        Self::new(self.values.iter().map(|&x| x * lambda).collect())
    }
}

impl<F> Deref for CoefficientVector<F> {
    type Target = [F];

    fn deref(&self) -> &[F] {
        &self.values
    }
}

impl<F> AsRef<[F]> for CoefficientVector<F> {
    fn as_ref(&self) -> &[F] {
        &self.values
    }
}

impl<F: Scalar> TryFrom<Vec<F>> for CoefficientVector<F> {
    type Error = Error;

    fn try_from(values: Vec<F>) -> Result<Self> {
        Self::new(values)
    }
}

impl<F> From<CoefficientVector<F>> for Vec<F> {
    fn from(v: CoefficientVector<F>) -> Vec<F> {
        v.values
    }
}

/// `ceil(p/2)` as a 1-based index.
///
/// Halving is exact in binary floating point, so the ceiling is exact for
/// every finite `p`, including half-integers.
pub fn split_index<F: Scalar>(p: F) -> usize {
    (p / F::lit(2.0)).ceil().to_usize().unwrap_or(usize::MAX).max(1)
}

/// Number of 1-based positions `i` with `i < p`, i.e. `ceil(p) - 1`.
pub fn count_below<F: Scalar>(p: F) -> usize {
    let c = p.ceil();
    if c <= F::one() {
        0
    } else {
        (c - F::one()).to_usize().unwrap_or(usize::MAX)
    }
}

pub fn rearrange_slice<F: Scalar>(values: &[F]) -> Vec<F> {
    let mut abs: Vec<F> = values.iter().map(|x| x.abs()).collect();
    // sort_by is stable, so ties keep their input order
    abs.sort_by(|a, b| b.partial_cmp(a).expect("finite coefficients"));
    abs
}

pub fn is_nonincreasing_abs<F: Scalar>(values: &[F]) -> bool {
    values.windows(2).all(|w| w[0].abs() >= w[1].abs())
}

pub fn max_abs<F: Scalar>(values: &[F]) -> F {
    values.iter().fold(F::zero(), |m, x| m.max(x.abs()))
}

/// Overflow-safe Euclidean norm.
pub fn l2_norm<F: Scalar>(values: &[F]) -> F {
    let scale = max_abs(values);
    if scale == F::zero() {
        return F::zero();
    }
    let s: F = values.iter().map(|&x| (x / scale) * (x / scale)).sum();
    scale * s.sqrt()
}

pub fn sum_squares<F: Scalar>(values: &[F]) -> F {
    values.iter().map(|&x| x * x).sum()
}

pub fn norm<F: Scalar>(values: &[F], q: F) -> Result<F> {
    if q.is_nan() || q < F::one() {
        return Err(invalid(format!("norm exponent must be >= 1, got {q}")));
    }
    if q.is_infinite() {
        return Ok(max_abs(values));
    }
    let scale = max_abs(values);
    if scale == F::zero() {
        return Ok(F::zero());
    }
    let s: F = values.iter().map(|&x| (x.abs() / scale).powf(q)).sum();
    Ok(scale * s.powf(q.recip()))
}
