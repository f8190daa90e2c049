//! Random coefficient vectors in the three regimes the bounds distinguish.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Head-dominated, tail-dominated or balanced coefficient shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CoefficientRegime {
    /// Independent uniform entries in `[-1, 1]`.
    Uniform,
    /// `a_i = r^i` with `r` uniform in `(0, 1)` and random signs.
    Geometric,
    /// One entry of size one at a random position, the rest uniform in `[-0.1, 0.1]`.
    Spiked,
}

impl CoefficientRegime {
    pub const ALL: [CoefficientRegime; 3] =
        [CoefficientRegime::Uniform, CoefficientRegime::Geometric, CoefficientRegime::Spiked];
}

fn signed<R: Rng + ?Sized>(rng: &mut R, x: f64) -> f64 {
    if rng.random::<bool>() {
        x
    } else {
        -x
    }
}

/// `n` coefficients from `regime`. Entries are nonzero almost surely.
pub fn sample_coefficients<R: Rng + ?Sized>(rng: &mut R, n: usize, regime: CoefficientRegime) -> Vec<f64> {
    match regime {
        CoefficientRegime::Uniform => (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect(),
        CoefficientRegime::Geometric => {
            let r: f64 = rng.random_range(0.05..1.0);
            (1..=n).map(|i| signed(rng, r.powi(i as i32))).collect()
        }
        CoefficientRegime::Spiked => {
            let spike = if n == 0 { 0 } else { rng.random_range(0..n) };
            (0..n).map(|i| if i == spike { signed(rng, 1.0) } else { rng.random_range(-0.1..=0.1) }).collect()
        }
    }
}

/// Coefficients from a uniformly chosen regime.
pub fn sample_mixed<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let regime = CoefficientRegime::ALL[rng.random_range(0..CoefficientRegime::ALL.len())];
    sample_coefficients(rng, n, regime)
}

/// Mixes a seed with case coordinates into an independent seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    let mut h = seed;
    for &x in parts {
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(x);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}
