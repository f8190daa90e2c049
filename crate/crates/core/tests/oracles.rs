//! Engines against oracles written out in the test itself.

use approx::assert_relative_eq;
use statrs::function::erf::erfc;
use symmoments::bounds::{gk_dual_norm, OrliczFunction};
use symmoments::dists::single_moment_exponential;
use symmoments::summoments::{
    gaussian_sum_norm, haagerup_moment, laplace_sum_moment_exact, monte_carlo_sum_moment, rademacher_sum_moment,
};
use symmoments::{DistKind, DistributionSpec};

/// `E|sum a_i eps_i|^p` over all `2^n` sign patterns, no symmetry tricks.
fn naive_rademacher(v: &[f64], p: f64) -> f64 {
    let n = v.len();
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        let s: f64 = v.iter().enumerate().map(|(i, a)| if mask >> i & 1 == 1 { *a } else { -*a }).sum();
        total += s.abs().powf(p);
    }
    total / f64::from(1u32 << n)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let mut s = f(a) + f(b);
    for k in 1..intervals {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// `E|a E_1 + b E_2|^p` by integrating out `E_1` against its density.
fn two_laplace_by_quadrature(a: f64, b: f64, p: f64) -> f64 {
    let density = |x: f64| std::f64::consts::FRAC_1_SQRT_2 * (-std::f64::consts::SQRT_2 * x.abs()).exp();
    let f = |x: f64| density(x) * single_moment_exponential(b, a * x, p).unwrap();
    // the density has a kink at 0; the tail beyond 40 is below 1e-20
    simpson(&f, -40.0, 0.0, 8_000) + simpson(&f, 0.0, 40.0, 8_000)
}

#[test]
fn enumeration_matches_naive_sum() {
    let cases: [(&[f64], f64); 5] = [
        (&[1.0, 1.0, 1.0], 4.0),
        (&[0.3, -1.2, 2.5, 0.01], 3.3),
        (&[1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625], 6.0),
        (&[2.0, -3.0, 0.7, 0.7, 1.1, -0.2, 0.9, 1.5, 0.4, 0.05], 2.5),
        (&[5.0], 7.5),
    ];
    for (v, p) in cases {
        let got = rademacher_sum_moment(v, p).unwrap().raw_moment;
        assert_relative_eq!(got, naive_rademacher(v, p), max_relative = 1e-13);
    }
}

#[test]
fn partial_fractions_match_direct_quadrature() {
    for (a, b, p) in [(1.0f64, 0.5, 3.0), (2.0, 0.3, 2.5), (1.0, 1.0, 4.0), (0.7, 1.9, 5.5), (1.0, 0.999, 3.5)] {
        let got = laplace_sum_moment_exact(&[a, b], p).unwrap().raw_moment;
        assert_relative_eq!(got, two_laplace_by_quadrature(a, b, p), max_relative = 1e-9);
    }
}

#[test]
fn haagerup_matches_exact_engines() {
    let v = [0.9f64, -0.4, 0.25, 1.3];
    for p in [2.2, 2.5, 3.0, 3.7] {
        let r = haagerup_moment(&v, DistKind::Rademacher, p).unwrap();
        assert_relative_eq!(r.raw_moment, naive_rademacher(&v, p), max_relative = 1e-6);
        let e = haagerup_moment(&v, DistKind::SymExponential, p).unwrap();
        assert_relative_eq!(e.raw_moment, laplace_sum_moment_exact(&v, p).unwrap().raw_moment, max_relative = 1e-6);
    }
}

#[test]
fn monte_carlo_intervals_cover_exact_values() {
    let v = [1.0f64, -0.6, 0.3];
    let cases = [
        (DistributionSpec::Rademacher, naive_rademacher(&v, 3.0)),
        (DistributionSpec::SymExponential, laplace_sum_moment_exact(&v, 3.0).unwrap().raw_moment),
        (DistributionSpec::Gaussian, gaussian_sum_norm(&v, 3.0).unwrap().raw_moment),
    ];
    for (seed, (d, exact)) in cases.into_iter().enumerate() {
        let m = monte_carlo_sum_moment(&v, &d, 3.0, 400_000, 11 + seed as u64).unwrap();
        assert!((m.raw_moment - exact).abs() <= m.raw_halfwidth(), "{d:?}: {} vs {exact}", m.raw_moment);
    }
}

#[test]
fn weibull_shape_one_is_the_exponential_law() {
    let d = DistributionSpec::weibull_tail(1.0).unwrap();
    let v = [0.8f64, 0.5];
    let exact = laplace_sum_moment_exact(&v, 4.0).unwrap().raw_moment;
    let m = monte_carlo_sum_moment(&v, &d, 4.0, 400_000, 3).unwrap();
    assert!((m.raw_moment - exact).abs() <= m.raw_halfwidth());
}

/// Test-local Orlicz functions, written from the tail laws directly.
#[derive(Clone, Copy)]
enum Law {
    Exponential,
    Gaussian,
}

impl Law {
    fn tail(self, x: f64) -> f64 {
        match self {
            Law::Exponential => std::f64::consts::SQRT_2 * x,
            Law::Gaussian => -erfc(x / std::f64::consts::SQRT_2).ln(),
        }
    }

    fn m(self, x: f64) -> f64 {
        if x <= 1.0 {
            x * x
        } else {
            self.tail(x)
        }
    }

    /// Largest `x` with `M(x) <= c`; `M` is nondecreasing for both laws.
    fn largest_within(self, c: f64) -> f64 {
        if c < 0.0 {
            return f64::NAN;
        }
        if c < self.tail(1.0) {
            return c.min(1.0).sqrt();
        }
        let (mut lo, mut hi) = (1.0, 2.0);
        while self.tail(hi) <= c {
            hi *= 2.0;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.tail(mid) <= c {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn spec(self) -> DistributionSpec<f64> {
        match self {
            Law::Exponential => DistributionSpec::SymExponential,
            Law::Gaussian => DistributionSpec::Gaussian,
        }
    }
}

/// Two-coordinate dual norm: scan `b_1`, give the remaining budget to `b_2`,
/// and add the kink points where either coordinate crosses 1.
fn dual_norm_two(a: [f64; 2], laws: [Law; 2], p: f64) -> f64 {
    let value = |b1: f64| {
        let b2 = laws[1].largest_within(p - laws[0].m(b1));
        if b2.is_nan() {
            f64::NEG_INFINITY
        } else {
            a[0].abs() * b1 + a[1].abs() * b2
        }
    };
    let top = laws[0].largest_within(p);
    let steps = 20_000;
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0.0;
    for k in 0..=steps {
        let b1 = top * k as f64 / steps as f64;
        let v = value(b1);
        if v > best {
            best = v;
            arg = b1;
        }
    }
    let mut candidates = vec![1.0f64.min(top), top];
    for c in [p - 1.0, p - laws[1].tail(1.0)] {
        if c >= 0.0 {
            candidates.push(laws[0].largest_within(c));
        }
    }
    // golden-section polish around the best grid point
    let h = top / steps as f64;
    let (mut lo, mut hi) = ((arg - h).max(0.0), (arg + h).min(top));
    for _ in 0..100 {
        let m1 = lo + (hi - lo) * 0.381_966;
        let m2 = hi - (hi - lo) * 0.381_966;
        if value(m1) < value(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    candidates.push(0.5 * (lo + hi));
    candidates.into_iter().map(value).fold(best, f64::max)
}

#[test]
fn dual_norm_matches_two_coordinate_scan() {
    let cases = [
        ([1.0, 1.0], [Law::Exponential, Law::Exponential], 2.0),
        ([1.0, 0.3], [Law::Exponential, Law::Exponential], 5.0),
        ([0.4, -2.0], [Law::Gaussian, Law::Gaussian], 3.0),
        ([1.0, 0.8], [Law::Exponential, Law::Gaussian], 4.0),
        ([2.5, 0.1], [Law::Gaussian, Law::Exponential], 7.0),
    ];
    for (a, laws, p) in cases {
        let ms =
            [OrliczFunction::from_distribution(&laws[0].spec()), OrliczFunction::from_distribution(&laws[1].spec())];
        let got = gk_dual_norm(&a, &ms, p).unwrap();
        let want = dual_norm_two(a, laws, p);
        assert_relative_eq!(got, want, max_relative = 1e-6);
    }
}
