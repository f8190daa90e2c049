use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Scalar};

use super::{check_order, Method, MomentEstimate, Rigor};

/// Largest number of nonzero coefficients the exact Rademacher engine accepts.
pub const ENUMERATION_CAP: usize = 26;

const PARALLEL_THRESHOLD: usize = 1 << 16;

/// Signed sums `sum s_j a_j` for every sign pattern of `coeffs`; bit `j` set means `+`.
fn subset_sums<F: Scalar>(coeffs: &[F], fixed: F) -> Vec<F> {
    let count = 1usize << coeffs.len();
    (0..count)
        .map(|mask| {
            coeffs.iter().enumerate().fold(fixed, |acc, (j, &a)| if mask >> j & 1 == 1 { acc + a } else { acc - a })
        })
        .collect()
}

#[inline]
fn abs_pow<F: Scalar>(x: F, p: F, int_p: Option<i32>) -> F {
    match int_p {
        Some(k) => x.abs().powi(k),
        None => x.abs().powf(p),
    }
}

/// Exact `E|sum a_i eps_i|^p` by summing over sign patterns.
///
/// Zero coefficients are dropped first; the first remaining sign is fixed to
/// `+` by symmetry, leaving `2^(n-1)` patterns. Each sum is formed as
/// `high + low` from two precomputed half tables so every pattern costs one
/// addition and carries at most a couple of roundings.
pub fn rademacher_sum_moment<F: Scalar>(v: &[F], p: F) -> Result<MomentEstimate<F>> {
    check_order(p, "Rademacher enumeration")?;
    let nonzero: Vec<F> = v.iter().copied().filter(|x| *x != F::zero()).collect();
    let n = nonzero.len();
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationCapacity { n, cap: ENUMERATION_CAP });
    }
    if n == 0 {
        return Ok(MomentEstimate::from_raw(p, F::zero(), Method::Enumeration, Rigor::Exact));
    }
    let int_p = if p.fract() == F::zero() && p <= F::lit(64.0) { p.to_i32() } else { None };

    let rest = &nonzero[1..];
    let (low, high) = rest.split_at(rest.len() / 2);
    let low_sums = subset_sums(low, F::zero());
    let high_sums = subset_sums(high, nonzero[0]);

    let row = |h: &F| -> F {
        let mut acc = CompensatedSum::new();
        for l in &low_sums {
            acc.add(abs_pow(*h + *l, p, int_p));
        }
        acc.value()
    };
    let rows: Vec<F> = if low_sums.len() * high_sums.len() >= PARALLEL_THRESHOLD {
        high_sums.par_iter().map(row).collect()
    } else {
        high_sums.iter().map(row).collect()
    };
    let total: CompensatedSum<F> = rows.into_iter().collect();
    let patterns = F::lit((1u64 << (n - 1)) as f64);
    Ok(MomentEstimate::from_raw(p, total.value() / patterns, Method::Enumeration, Rigor::Exact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Plain loop over all 2^n patterns, no symmetry, no tables.
    fn brute_force(v: &[f64], p: f64) -> f64 {
        let n = v.len();
        let mut total = 0.0;
        for mask in 0..(1u64 << n) {
            let s: f64 = v.iter().enumerate().map(|(j, a)| if mask >> j & 1 == 1 { *a } else { -*a }).sum();
            total += s.abs().powf(p);
        }
        total / (1u64 << n) as f64
    }

    #[test]
    fn spot_values() {
        let e = rademacher_sum_moment(&[1.0f64, 1.0], 4.0).unwrap();
        assert_eq!(e.raw_moment, 8.0);
        assert_relative_eq!(e.value, 8f64.powf(0.25), max_relative = 1e-15);
        assert_eq!(rademacher_sum_moment(&[1.0f64, 1.0, 1.0], 4.0).unwrap().raw_moment, 21.0);
        let e3 = rademacher_sum_moment(&[1.0f64, 1.0, 1.0], 3.0).unwrap();
        assert_eq!(e3.raw_moment, 7.5);
        assert_relative_eq!(e3.value, 1.957_433_820_584_431_8, max_relative = 1e-14);
        assert!(e3.is_exact());
    }

    #[test]
    fn matches_brute_force() {
        let v = [0.9, -0.3, 0.55, 0.1, -0.77, 0.42, 0.05];
        for p in [1.0, 2.5, 3.0, 4.7, 8.0] {
            assert_relative_eq!(
                rademacher_sum_moment(&v, p).unwrap().raw_moment,
                brute_force(&v, p),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn zeros_are_dropped() {
        let a = rademacher_sum_moment(&[0.0f64, 2.0, 0.0, -1.0], 3.5).unwrap();
        let b = rademacher_sum_moment(&[2.0f64, 1.0], 3.5).unwrap();
        assert_eq!(a.raw_moment, b.raw_moment);
        assert_eq!(rademacher_sum_moment(&[0.0f64; 40], 3.0).unwrap().raw_moment, 0.0);
    }

    #[test]
    fn cap_is_enforced() {
        let v = vec![1.0f64; ENUMERATION_CAP + 1];
        assert_eq!(
            rademacher_sum_moment(&v, 3.0).unwrap_err(),
            Error::EnumerationCapacity { n: ENUMERATION_CAP + 1, cap: ENUMERATION_CAP }
        );
    }

    #[test]
    fn rejects_bad_order() {
        assert!(rademacher_sum_moment(&[1.0f64], 0.0).is_err());
        assert!(rademacher_sum_moment(&[1.0f64], f64::NAN).is_err());
    }
}
