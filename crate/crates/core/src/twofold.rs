//! Unevaluated sums `hi + lo` of two floats ("double-word" arithmetic),
//! carrying roughly twice the working precision.
//!
//! Used where a signed sum cancels heavily, so that rounding in the summands
//! does not dominate the result.

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Twofold<F> {
    pub hi: F,
    pub lo: F,
}

#[inline]
fn two_sum<F: Scalar>(a: F, b: F) -> (F, F) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum<F: Scalar>(a: F, b: F) -> (F, F) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod<F: Scalar>(a: F, b: F) -> (F, F) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const EXP_HALVINGS: i32 = 5;
const EXP_TERMS: usize = 16;

impl<F: Scalar> Twofold<F> {
    pub fn new(x: F) -> Self {
        Self { hi: x, lo: F::zero() }
    }

    pub fn value(self) -> F {
        self.hi + self.lo
    }

    /// Exact for `n` below `2^24` even in single precision.
    pub fn from_usize(n: usize) -> Self {
        Self::new(F::from_usize_lossy(n))
    }

    fn ln_2() -> Self {
        let hi = F::LN_2();
        // ln 2 = 0.6931471805599453 + 2.3190468138462996e-17
        let lo = F::lit((0.693_147_180_559_945_3 - hi.to_f64_lossy()) + 2.319_046_813_846_299_6e-17);
        Self { hi, lo }
    }

    pub fn abs(self) -> Self {
        if self.hi < F::zero() {
            -self
        } else {
            self
        }
    }

    pub fn recip(self) -> Self {
        Self::new(F::one()) / self
    }

    /// `e^self`, by reduction to `r = self - k ln 2`, a Taylor series of
    /// `e^{r / 32}` and repeated squaring.
    pub fn exp(self) -> Self {
        if self.hi == F::zero() {
            return Self::new(F::one());
        }
        if !self.hi.is_finite() || self.hi.abs() > F::lit(700.0) {
            return Self::new(self.hi.exp());
        }
        let k = (self.hi / F::LN_2()).round();
        let r = self - Self::ln_2() * Self::new(k);
        let r = r * Self::new(F::lit(2f64.powi(-EXP_HALVINGS)));
        let mut term = Self::new(F::one());
        let mut sum = Self::new(F::one());
        for i in 1..=EXP_TERMS {
            term = term * r / Self::new(F::from_usize_lossy(i));
            sum = sum + term;
        }
        for _ in 0..EXP_HALVINGS {
            sum = sum * sum;
        }
        let scale = F::lit(2.0).powi(k.to_i32().expect("bounded exponent"));
        Self { hi: sum.hi * scale, lo: sum.lo * scale }
    }

    /// Natural logarithm of a positive value, one Newton step from the
    /// working-precision logarithm.
    pub fn ln(self) -> Self {
        let y = Self::new(self.hi.ln());
        y + self * (-y).exp() - Self::new(F::one())
    }

    pub fn powf(self, q: Self) -> Self {
        (q * self.ln()).exp()
    }
}

impl<F: Scalar> std::ops::Neg for Twofold<F> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl<F: Scalar> std::ops::Add for Twofold<F> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl<F: Scalar> std::ops::Sub for Twofold<F> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<F: Scalar> std::ops::Mul for Twofold<F> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi));
        Self { hi, lo }
    }
}

impl<F: Scalar> std::ops::Div for Twofold<F> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - o * Self::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Self::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::new(q3)
    }
}
