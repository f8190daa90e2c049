use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dists::DistributionSpec;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

use super::{check_order, Method, MomentEstimate, Rigor};

/// Fewest samples accepted by the Monte Carlo engine.
pub const MC_MIN_SAMPLES: usize = 10_000;
/// Samples per substream. Chunking is fixed so results do not depend on the
/// thread count.
pub const MC_CHUNK: usize = 1 << 16;
/// Half-width multiplier of the reported interval.
pub const MC_Z: f64 = 3.0;
/// Two-sided coverage of `MC_Z` standard errors under normality.
pub const MC_CONFIDENCE: f64 = 0.9973;

/// The `index`-th independent substream of `seed`.
pub fn substream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Copy, Debug, Default)]
struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    #[inline]
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Welford {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }

    fn variance(&self) -> f64 {
        if self.n > 1.0 {
            self.m2 / (self.n - 1.0)
        } else {
            0.0
        }
    }
}

/// Monte Carlo `E|S|^p` with a `3 sigma` interval, deterministic per `(seed, samples)`.
pub fn monte_carlo_sum_moment<F: Scalar>(
    v: &[F],
    d: &DistributionSpec<F>,
    p: F,
    samples: usize,
    seed: u64,
) -> Result<MomentEstimate<F>> {
    Ok(monte_carlo_sum_moments(v, d, &[p], samples, seed)?.remove(0))
}

/// Like [`monte_carlo_sum_moment`] for several orders sharing the same draws.
pub fn monte_carlo_sum_moments<F: Scalar>(
    v: &[F],
    d: &DistributionSpec<F>,
    ps: &[F],
    samples: usize,
    seed: u64,
) -> Result<Vec<MomentEstimate<F>>> {
    if samples < MC_MIN_SAMPLES {
        return Err(invalid(format!("Monte Carlo needs at least {MC_MIN_SAMPLES} samples, got {samples}")));
    }
    if ps.is_empty() {
        return Err(invalid("Monte Carlo needs at least one order p"));
    }
    for &p in ps {
        check_order(p, "Monte Carlo")?;
    }
    let coeffs: Vec<f64> = v.iter().map(|x| x.to_f64_lossy()).filter(|x| *x != 0.0).collect();
    let orders: Vec<f64> = ps.iter().map(|p| p.to_f64_lossy()).collect();
    let chunks = samples.div_ceil(MC_CHUNK);

    let run_chunk = |k: usize| -> Vec<Welford> {
        let len = MC_CHUNK.min(samples - k * MC_CHUNK);
        let mut rng = substream_rng(seed, k as u64);
        let mut acc = vec![Welford::default(); orders.len()];
        for _ in 0..len {
            let s: f64 = coeffs.iter().map(|a| a * d.sample_f64(&mut rng)).sum();
            let ln_abs = s.abs().ln();
            for (w, &p) in acc.iter_mut().zip(&orders) {
                let x = if p == 2.0 { s * s } else { (p * ln_abs).exp() };
                w.push(x);
            }
        }
        acc
    };
    let partials: Vec<Vec<Welford>> = (0..chunks).into_par_iter().map(run_chunk).collect();
    // fixed reduction order
    let mut total = vec![Welford::default(); orders.len()];
    for part in partials {
        for (t, w) in total.iter_mut().zip(part) {
            *t = t.merge(w);
        }
    }
    Ok(ps
        .iter()
        .zip(total)
        .map(|(&p, w)| {
            let halfwidth = MC_Z * (w.variance() / w.n).sqrt();
            MomentEstimate::from_raw(
                p,
                F::lit(w.mean),
                Method::MonteCarlo,
                Rigor::Ci { halfwidth: F::lit(halfwidth), confidence: F::lit(MC_CONFIDENCE) },
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn within_ci(e: &MomentEstimate<f64>, exact: f64) -> bool {
        (e.raw_moment - exact).abs() <= e.raw_halfwidth()
    }

    #[test]
    fn spot_values_within_ci() {
        let e = monte_carlo_sum_moment(&[1.0, 1.0], &DistributionSpec::SymExponential, 4.0, 1_000_000, 11).unwrap();
        assert!(within_ci(&e, 18.0), "{e:?}");
        let r = monte_carlo_sum_moment(&[1.0, 1.0, 1.0], &DistributionSpec::Rademacher, 4.0, 1_000_000, 12).unwrap();
        assert!(within_ci(&r, 21.0), "{r:?}");
        let g = monte_carlo_sum_moment(&[1.0], &DistributionSpec::Gaussian, 2.0, 1_000_000, 13).unwrap();
        assert!(within_ci(&g, 1.0), "{g:?}");
        assert!(g.is_statistical());
    }

    #[test]
    fn deterministic_per_seed() {
        let d = DistributionSpec::weibull_tail(1.5).unwrap();
        let a = monte_carlo_sum_moment(&[0.5, -0.2], &d, 3.0, 200_000, 5).unwrap();
        let b = monte_carlo_sum_moment(&[0.5, -0.2], &d, 3.0, 200_000, 5).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_sum_moment(&[0.5, -0.2], &d, 3.0, 200_000, 6).unwrap();
        assert_ne!(a.raw_moment, c.raw_moment);
    }

    #[test]
    fn shared_draws_match_single_order_runs() {
        let d = DistributionSpec::SymExponential;
        let many = monte_carlo_sum_moments(&[0.3, 0.9], &d, &[2.5, 3.0], 100_000, 9).unwrap();
        let one = monte_carlo_sum_moment(&[0.3, 0.9], &d, 3.0, 100_000, 9).unwrap();
        assert_eq!(many[1], one);
    }

    #[test]
    fn rejects_small_sample_counts() {
        assert!(monte_carlo_sum_moment(&[1.0], &DistributionSpec::Gaussian, 2.0, 100, 1).is_err());
    }

    #[test]
    fn welford_merge_is_exact_enough() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin() * 10.0).collect();
        let mut whole = Welford::default();
        xs.iter().for_each(|&x| whole.push(x));
        let (a, b) = xs.split_at(313);
        let mut wa = Welford::default();
        let mut wb = Welford::default();
        a.iter().for_each(|&x| wa.push(x));
        b.iter().for_each(|&x| wb.push(x));
        let merged = wa.merge(wb);
        assert!((merged.mean - whole.mean).abs() < 1e-12);
        assert!((merged.variance() - whole.variance()).abs() < 1e-9);
    }
}
