use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::ln_gamma;
use crate::twofold::Twofold;

use super::{Method, MomentEstimate, Rigor};

/// Refusal thresholds for the partial-fraction engine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartialFractionOptions {
    /// Minimum of `|a_i^2 - a_j^2| / max a^2` over distinct pairs.
    pub min_relative_gap: f64,
    /// Maximum of `sum |c_i|`.
    pub max_residue_mass: f64,
}

impl Default for PartialFractionOptions {
    fn default() -> Self {
        Self { min_relative_gap: 1e-6, max_residue_mass: 1e8 }
    }
}

/// One term `weight * L_order(scale)` of the signed mixture, where `L_r(b)` is
/// the law of a sum of `r` independent Laplace variables with scale `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceTerm<F> {
    pub weight: F,
    /// `|a_i| / sqrt 2`.
    pub scale: F,
    pub order: usize,
}

/// `E|D_r|^p / Gamma(p+1)` for `D_r` a sum of `r` independent standard
/// Laplace variables, from the density
/// `e^{-|x|} sum_{j<r} C(r-1+j, j) |x|^{r-1-j} / ((r-1-j)! 2^{r+j})`.
fn repeated_laplace_ratio<F: Scalar>(r: usize, p: F) -> Twofold<F> {
    let one = Twofold::new(F::one());
    if r == 1 {
        return one;
    }
    let p = Twofold::new(p);
    let mut acc = Twofold::new(F::zero());
    for j in 0..r {
        // C(r-1+j, j) / (r-1-j)! * Gamma(p + r - j) / Gamma(p + 1) / 2^{r+j}
        let mut term = one;
        for m in 1..=j {
            term = term * Twofold::from_usize(r - 1 + m) / Twofold::from_usize(m);
        }
        for m in 1..(r - j) {
            term = term * (p + Twofold::from_usize(m)) / Twofold::from_usize(m);
        }
        let halves = F::lit(2.0).powi(-((r + j) as i32));
        acc = acc + term * Twofold::new(halves);
    }
    acc * Twofold::new(F::lit(2.0))
}

/// Grouped coefficients with their mixture weights; weights are indexed by
/// order `r - 1`. Squares are relative to the largest coefficient.
struct Decomposition<F> {
    groups: Vec<(F, usize)>,
    sq: Vec<Twofold<F>>,
    weights: Vec<Vec<Twofold<F>>>,
}

fn decompose<F: Scalar>(v: &[F], opts: &PartialFractionOptions) -> Result<Option<Decomposition<F>>> {
    let mut abs: Vec<F> = v.iter().map(|x| x.abs()).filter(|x| *x != F::zero()).collect();
    if abs.is_empty() {
        return Ok(None);
    }
    abs.sort_by(|a, b| b.partial_cmp(a).expect("finite coefficients"));
    let mut groups: Vec<(F, usize)> = Vec::new();
    for a in abs {
        match groups.last_mut() {
            Some((g, k)) if *g == a => *k += 1,
            _ => groups.push((a, 1)),
        }
    }
    let amax = Twofold::new(groups[0].0);
    let sq: Vec<Twofold<F>> = groups
        .iter()
        .map(|&(a, _)| {
            let r = Twofold::new(a) / amax;
            r * r
        })
        .collect();
    let mut min_gap = F::infinity();
    for i in 0..sq.len() {
        for j in (i + 1)..sq.len() {
            min_gap = min_gap.min((sq[i] - sq[j]).abs().value());
        }
    }
    if min_gap < F::lit(opts.min_relative_gap) {
        return Err(Error::PartialFractionDegenerate { gap: min_gap.to_f64_lossy(), threshold: opts.min_relative_gap });
    }
    let zero = Twofold::new(F::zero());
    let mut weights = Vec::with_capacity(groups.len());
    let mut mass = F::zero();
    for (i, &(_, k)) in groups.iter().enumerate() {
        // Taylor coefficients in z = 1 + sq_i w of the other factors
        // (alpha_j + beta_j z)^{-k_j}, up to degree k - 1
        let mut series = vec![zero; k];
        series[0] = Twofold::new(F::one());
        for (j, &(_, kj)) in groups.iter().enumerate() {
            if j == i {
                continue;
            }
            let alpha = (sq[i] - sq[j]) / sq[i];
            let ratio = sq[j] / sq[i] / alpha;
            let inv_alpha = alpha.recip();
            let mut c = Twofold::new(F::one());
            for _ in 0..kj {
                c = c * inv_alpha;
            }
            let mut factor = vec![zero; k];
            for (m, f) in factor.iter_mut().enumerate() {
                *f = c;
                // C(kj+m, m+1) / C(kj+m-1, m) = (kj+m)/(m+1), with alternating sign
                c = -(c * ratio * Twofold::from_usize(kj + m) / Twofold::from_usize(m + 1));
            }
            let mut product = vec![zero; k];
            for (m, &s) in series.iter().enumerate() {
                for (l, &f) in factor.iter().enumerate().take(k - m) {
                    product[m + l] = product[m + l] + s * f;
                }
            }
            series = product;
        }
        // weight of order r is the coefficient of z^{k-r}
        let w: Vec<Twofold<F>> = (1..=k).map(|r| series[k - r]).collect();
        mass = mass + w.iter().map(|x| x.value().abs()).sum::<F>();
        weights.push(w);
    }
    if !(mass <= F::lit(opts.max_residue_mass)) {
        return Err(Error::PartialFractionCancellation {
            magnitude: mass.to_f64_lossy(),
            limit: opts.max_residue_mass,
        });
    }
    Ok(Some(Decomposition { groups, sq, weights }))
}

/// Partial-fraction decomposition of the characteristic function of
/// `sum a_i E_i` over the nonzero coefficients.
///
/// With `w = t^2/2` the characteristic function is `prod_g (1 + a_g^2 w)^{-k_g}`
/// over groups of equal `|a_i|` with multiplicity `k_g`, which splits as
/// `sum_g sum_{r <= k_g} c_{g,r} (1 + a_g^2 w)^{-r}`. Every summand is the
/// characteristic function of a sum of `r` Laplace laws, so the sum is a
/// signed mixture of those. Without repeated coefficients
/// `c_i = prod_{j != i} a_i^2 / (a_i^2 - a_j^2)`.
///
/// The weights are formed in double-word arithmetic and rounded on return.
pub fn laplace_residues<F: Scalar>(v: &[F], opts: &PartialFractionOptions) -> Result<Vec<LaplaceTerm<F>>> {
    let Some(d) = decompose(v, opts)? else {
        return Ok(Vec::new());
    };
    let mut terms = Vec::new();
    for (&(a, _), w) in d.groups.iter().zip(&d.weights) {
        for (r, c) in w.iter().enumerate() {
            terms.push(LaplaceTerm { weight: c.value(), scale: a / F::SQRT_2(), order: r + 1 });
        }
    }
    Ok(terms)
}

/// Exact `E|sum a_i E_i|^p` for `p > -1` from the signed Laplace mixture of
/// [`laplace_residues`], with the default refusal thresholds. A single-order
/// term contributes `c Gamma(p+1) (|a|/sqrt 2)^p`.
pub fn laplace_sum_moment_exact<F: Scalar>(v: &[F], p: F) -> Result<MomentEstimate<F>> {
    laplace_sum_moment_with(v, p, &PartialFractionOptions::default())
}

/// Like [`laplace_sum_moment_exact`] with explicit refusal thresholds.
///
/// The mixture is summed in double-word arithmetic, so cancellation between
/// weights of size up to `max_residue_mass` costs no working-precision digits.
pub fn laplace_sum_moment_with<F: Scalar>(v: &[F], p: F, opts: &PartialFractionOptions) -> Result<MomentEstimate<F>> {
    if !(p > -F::one()) || !p.is_finite() {
        return Err(crate::error::invalid(format!("partial fractions need finite p > -1, got {p}")));
    }
    let Some(d) = decompose(v, opts)? else {
        let raw = if p == F::zero() { F::one() } else { F::zero() };
        return Ok(MomentEstimate::from_raw(p, raw, Method::PartialFractions, Rigor::Exact));
    };
    let half_p = Twofold::new(p) * Twofold::new(F::lit(0.5));
    let mut mixture = Twofold::new(F::zero());
    let mut mass = F::zero();
    for (s, w) in d.sq.iter().zip(&d.weights) {
        // (|a_i| / |a_max|)^p
        let x = if s.hi == F::one() && s.lo == F::zero() { Twofold::new(F::one()) } else { s.powf(half_p) };
        for (r, &c) in w.iter().enumerate() {
            let term = c * x * repeated_laplace_ratio(r + 1, p);
            mixture = mixture + term;
            mass = mass + term.value().abs();
        }
    }
    // a non-positive mixture can only come from cancellation
    let eps = F::epsilon();
    if !(mixture.value() > eps * eps * mass * F::lit(16.0)) {
        return Err(Error::PartialFractionCancellation {
            magnitude: mass.to_f64_lossy(),
            limit: opts.max_residue_mass,
        });
    }
    let smax = d.groups[0].0 / F::SQRT_2();
    let scale = (ln_gamma(p + F::one()) + p * smax.ln()).exp();
    Ok(MomentEstimate::from_raw(p, scale * mixture.value(), Method::PartialFractions, Rigor::Exact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spot_values() {
        let e = laplace_sum_moment_exact(&[2.0f64, 1.0], 2.0).unwrap();
        assert_relative_eq!(e.raw_moment, 5.0, max_relative = 1e-14);
        assert_relative_eq!(
            laplace_sum_moment_exact(&[2.0f64, 1.0], 0.0).unwrap().raw_moment,
            1.0,
            max_relative = 1e-14
        );
        // multinomial: E(X+Y)^4 = EX^4 + 6 EX^2 EY^2 + EY^4 = 6*81 + 6*9 + 6
        assert_relative_eq!(
            laplace_sum_moment_exact(&[3.0f64, 1.0], 4.0).unwrap().raw_moment,
            546.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn residues_for_two_terms() {
        let r = laplace_residues(&[2.0f64, 1.0], &PartialFractionOptions::default()).unwrap();
        assert_relative_eq!(r[0].weight, 4.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(r[1].weight, -1.0 / 3.0, max_relative = 1e-15);
        assert_eq!((r[0].order, r[1].order), (1, 1));
    }

    #[test]
    fn repeated_coefficients() {
        // E(X+Y)^4 = 2 * 6 + 6 = 18 for unit-variance Laplace X, Y
        let e = laplace_sum_moment_exact(&[1.0f64, -1.0], 4.0).unwrap();
        assert_relative_eq!(e.raw_moment, 18.0, max_relative = 1e-13);
        let e = laplace_sum_moment_exact(&[1.0f64, 1.0], 3.0).unwrap();
        assert_relative_eq!(e.raw_moment, 15.0 / (2.0 * 2f64.sqrt()), max_relative = 1e-13);
        let e = laplace_sum_moment_exact(&[1.0f64, 1.0, 1.0], 4.0).unwrap();
        assert_relative_eq!(e.raw_moment, 36.0, max_relative = 1e-13);
        // 6 (16 + 1 + 1) + 6 (4 + 4 + 1)
        let e = laplace_sum_moment_exact(&[2.0f64, 1.0, 1.0], 4.0).unwrap();
        assert_relative_eq!(e.raw_moment, 162.0, max_relative = 1e-13);
        let e = laplace_sum_moment_exact(&[1.0f64, 1.0, 2.0, 2.0], 2.0).unwrap();
        assert_relative_eq!(e.raw_moment, 10.0, max_relative = 1e-13);
        // sum of weights is the characteristic function at 0
        let r = laplace_residues(&[3.0f64, 1.0, 1.0, 2.0, 2.0, 2.0], &PartialFractionOptions::default()).unwrap();
        assert_relative_eq!(r.iter().map(|t| t.weight).sum::<f64>(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn clustered_coefficients_keep_full_precision() {
        // heavy cancellation between residues; E S^2 = sum a_i^2 exactly
        let v: [f64; 7] = [
            0.751_512_197_359_597_8,
            -0.752_752_886_822_427_9,
            0.753_471_448_128_508_6,
            -0.764_617_589_713_109_7,
            0.463_036_142_038_909_14,
            -0.256_488_225_124_770_65,
            0.437_270_149_631_840_3,
        ];
        let mass: f64 =
            laplace_residues(&v, &PartialFractionOptions::default()).unwrap().iter().map(|t| t.weight.abs()).sum();
        assert!(mass > 1e4);
        let e = laplace_sum_moment_exact(&v, 2.0).unwrap();
        let ss: f64 = v.iter().map(|a| a * a).sum();
        assert_relative_eq!(e.raw_moment, ss, max_relative = 1e-14);
    }

    #[test]
    fn refuses_nearly_equal_coefficients() {
        let err = laplace_sum_moment_exact(&[1.0f64, 1.0 + 1e-9], 3.0).unwrap_err();
        assert!(matches!(err, Error::PartialFractionDegenerate { .. }));
        assert!(err.is_capacity());
    }

    #[test]
    fn refuses_large_residue_mass() {
        let v = [1.0f64, 0.999, 0.998, 0.997, 0.996, 0.995];
        let err = laplace_sum_moment_exact(&v, 3.0).unwrap_err();
        assert!(matches!(err, Error::PartialFractionCancellation { .. }), "{err:?}");
    }

    #[test]
    fn zeros_are_dropped() {
        let a = laplace_sum_moment_exact(&[0.0f64, 2.0, 1.0, 0.0], 3.3).unwrap();
        let b = laplace_sum_moment_exact(&[2.0f64, 1.0], 3.3).unwrap();
        assert_eq!(a.raw_moment, b.raw_moment);
        assert_eq!(laplace_sum_moment_exact(&[0.0f64], 3.0).unwrap().raw_moment, 0.0);
    }

    #[test]
    fn single_term_is_closed_form() {
        // E|E|^p = 2^{-p/2} Gamma(p+1)
        for p in [2.0f64, 3.0, 4.0, 6.0, 2.7] {
            let expected = 2f64.powf(-p / 2.0) * crate::special::gamma(p + 1.0);
            assert_relative_eq!(
                laplace_sum_moment_exact(&[1.0], p).unwrap().raw_moment,
                expected,
                max_relative = 1e-13
            );
        }
    }
}
