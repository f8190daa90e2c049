//! The floating-point abstraction every numerical routine is written against.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type usable by the moment engines, bounds and special functions.
///
/// Implemented for `f32` and `f64`. The verification layer and the CLI work in
/// `f64`; everything below it is written once against this trait.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Relative tolerance that adaptive quadrature can reliably reach.
    const QUAD_RTOL: f64;

    /// Converts an `f64` literal. Never fails for the two supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Scalar for f32 {
    const QUAD_RTOL: f64 = 1e-5;
}

impl Scalar for f64 {
    const QUAD_RTOL: f64 = 1e-10;
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<F> {
    sum: F,
    compensation: F,
}

impl<F: Scalar> CompensatedSum<F> {
    pub fn new() -> Self {
        Self { sum: F::zero(), compensation: F::zero() }
    }

    #[inline]
    pub fn add(&mut self, x: F) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation = self.compensation + ((self.sum - t) + x);
        } else {
            self.compensation = self.compensation + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> F {
        self.sum + self.compensation
    }
}

impl<F: Scalar> FromIterator<F> for CompensatedSum<F> {
    fn from_iter<I: IntoIterator<Item = F>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut naive = 0.0f64;
        let mut acc = CompensatedSum::<f64>::new();
        for x in [1e16, 1.0, -1e16, 1.0] {
            naive += x;
            acc.add(x);
        }
        assert_eq!(acc.value(), 2.0);
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn literals_round_trip() {
        assert_eq!(<f32 as Scalar>::lit(0.5), 0.5f32);
        assert_eq!(<f64 as Scalar>::lit(0.1), 0.1f64);
    }
}
