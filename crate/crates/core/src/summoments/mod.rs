//! Moment engines for `S = sum a_i X_i`.
//!
//! | engine | laws | rigor |
//! |---|---|---|
//! | [`rademacher_sum_moment`] | Rademacher | exact |
//! | [`laplace_sum_moment_exact`] | symmetric exponential | exact |
//! | [`haagerup_moment`] | Rademacher, symmetric exponential, `2 < p < 4` | tolerance |
//! | [`monte_carlo_sum_moment`] | any | confidence interval |
//! | [`gaussian_sum_norm`] | Gaussian | exact |
//! | [`exponential_recursion_moment`] | one symmetric exponential term | exact |

mod enumeration;
mod haagerup;
mod monte_carlo;
mod partial_fractions;

pub use enumeration::{rademacher_sum_moment, ENUMERATION_CAP};
pub use haagerup::{characteristic_function, haagerup_moment, HAAGERUP_RTOL};
pub use monte_carlo::{
    monte_carlo_sum_moment, monte_carlo_sum_moments, substream_rng, MC_CHUNK, MC_CONFIDENCE, MC_MIN_SAMPLES, MC_Z,
};
pub use partial_fractions::{
    laplace_residues, laplace_sum_moment_exact, laplace_sum_moment_with, PartialFractionOptions,
};

use serde::{Deserialize, Serialize};

use crate::coeffs::l2_norm;
use crate::dists::{gamma_p, gaussian_absolute_moment, single_moment_exponential, DistKind, DistributionSpec};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Method {
    Enumeration,
    PartialFractions,
    Haagerup,
    MonteCarlo,
    Recursion,
    ClosedForm,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Enumeration => "enumeration",
            Method::PartialFractions => "partialFractions",
            Method::Haagerup => "haagerup",
            Method::MonteCarlo => "monteCarlo",
            Method::Recursion => "recursion",
            Method::ClosedForm => "closedForm",
        })
    }
}

/// How far a [`MomentEstimate`] can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Rigor<F> {
    Exact,
    /// Relative error bound on the raw moment.
    Tolerance {
        rel: F,
    },
    /// Confidence interval `raw_moment +- halfwidth`.
    Ci {
        halfwidth: F,
        confidence: F,
    },
}

/// A computed `||S||_p` together with `E|S|^p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MomentEstimate<F> {
    pub p: F,
    /// `raw_moment^(1/p)`; equals `raw_moment` at `p = 0`.
    pub value: F,
    pub raw_moment: F,
    pub method: Method,
    pub rigor: Rigor<F>,
}

impl<F: Scalar> MomentEstimate<F> {
    pub fn from_raw(p: F, raw_moment: F, method: Method, rigor: Rigor<F>) -> Self {
        let raw_moment = raw_moment.max(F::zero());
        let value = if p == F::zero() { raw_moment } else { raw_moment.powf(p.recip()) };
        Self { p, value, raw_moment, method, rigor }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.rigor, Rigor::Exact)
    }

    pub fn is_statistical(&self) -> bool {
        matches!(self.rigor, Rigor::Ci { .. })
    }

    /// Absolute uncertainty on the raw moment (zero for exact engines).
    pub fn raw_halfwidth(&self) -> F {
        match self.rigor {
            Rigor::Exact => F::zero(),
            Rigor::Tolerance { rel } => rel * self.raw_moment.abs(),
            Rigor::Ci { halfwidth, .. } => halfwidth,
        }
    }

    /// Absolute uncertainty on the norm, the wider side of the mapped interval.
    pub fn norm_halfwidth(&self) -> F {
        let hw = self.raw_halfwidth();
        if hw == F::zero() || self.p == F::zero() {
            return hw;
        }
        let inv = self.p.recip();
        let lo = (self.raw_moment - hw).max(F::zero()).powf(inv);
        let hi = (self.raw_moment + hw).powf(inv);
        (self.value - lo).max(hi - self.value)
    }
}

pub(crate) fn check_order<F: Scalar>(p: F, what: &str) -> Result<()> {
    if !(p > F::zero()) || !p.is_finite() {
        return Err(invalid(format!("{what} needs a finite order p > 0, got {p}")));
    }
    Ok(())
}

/// Exact `||sum a_i g_i||_p = gamma_p ||a||_2` for independent standard Gaussians.
pub fn gaussian_sum_norm<F: Scalar>(v: &[F], p: F) -> Result<MomentEstimate<F>> {
    let gp = gamma_p(p)?;
    let sigma = l2_norm(v);
    let raw = gaussian_absolute_moment(p) * sigma.powf(p);
    Ok(MomentEstimate { p, value: gp * sigma, raw_moment: raw, method: Method::ClosedForm, rigor: Rigor::Exact })
}

/// Exact `E|a E|^p` for a single nonzero coefficient, by the order-two recursion.
pub fn exponential_recursion_moment<F: Scalar>(v: &[F], p: F) -> Result<MomentEstimate<F>> {
    if !(p >= F::zero()) || !p.is_finite() {
        return Err(invalid(format!("recursion engine needs finite p >= 0, got {p}")));
    }
    let nonzero: Vec<F> = v.iter().copied().filter(|x| *x != F::zero()).collect();
    let raw = match nonzero.as_slice() {
        [] => {
            if p == F::zero() {
                F::one()
            } else {
                F::zero()
            }
        }
        [a] => single_moment_exponential(*a, F::zero(), p)?,
        _ => {
            return Err(Error::Capacity(format!(
                "recursion engine handles one nonzero coefficient, got {}",
                nonzero.len()
            )))
        }
    };
    Ok(MomentEstimate::from_raw(p, raw, Method::Recursion, Rigor::Exact))
}

/// Monte Carlo settings used when no exact engine applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarloPlan {
    pub samples: usize,
    pub seed: u64,
}

/// Which engines [`best_sum_moment`] may try.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineChain {
    pub exact: bool,
    pub haagerup: bool,
    pub monte_carlo: bool,
}

impl Default for EngineChain {
    fn default() -> Self {
        Self { exact: true, haagerup: true, monte_carlo: true }
    }
}

fn fallback<F>(r: Result<MomentEstimate<F>>) -> Option<Result<MomentEstimate<F>>> {
    match r {
        Err(e) if e.is_capacity() || matches!(e, Error::QuadratureNonConvergence { .. }) => None,
        other => Some(other),
    }
}

/// `||sum a_i X_i||_p` from the strongest engine that accepts the input:
/// exact (enumeration, partial fractions, closed form), then the Haagerup
/// integral for `2 < p < 4`, then Monte Carlo.
pub fn best_sum_moment<F: Scalar>(
    v: &[F],
    d: &DistributionSpec<F>,
    p: F,
    chain: EngineChain,
    mc: MonteCarloPlan,
) -> Result<MomentEstimate<F>> {
    check_order(p, "moment")?;
    let haagerup_ok = chain.haagerup && p > F::lit(2.0) && p < F::lit(4.0);
    let mut last = None;
    match d {
        DistributionSpec::Rademacher => {
            if chain.exact {
                match fallback(rademacher_sum_moment(v, p)) {
                    Some(r) => return r,
                    None => last = Some(Error::EnumerationCapacity { n: v.len(), cap: ENUMERATION_CAP }),
                }
            }
            if haagerup_ok {
                if let Some(r) = fallback(haagerup_moment(v, DistKind::Rademacher, p)) {
                    return r;
                }
            }
        }
        DistributionSpec::SymExponential => {
            if chain.exact {
                match laplace_sum_moment_exact(v, p) {
                    Err(e) if e.is_capacity() => last = Some(e),
                    other => return other,
                }
            }
            if haagerup_ok {
                if let Some(r) = fallback(haagerup_moment(v, DistKind::SymExponential, p)) {
                    return r;
                }
            }
        }
        DistributionSpec::Gaussian => {
            if chain.exact {
                return gaussian_sum_norm(v, p);
            }
        }
        DistributionSpec::WeibullTail { .. } => {}
    }
    if chain.monte_carlo {
        return monte_carlo_sum_moment(v, d, p, mc.samples, mc.seed);
    }
    Err(last.unwrap_or_else(|| Error::Capacity(format!("no permitted engine handles {} at p = {p}", d.kind()))))
}
