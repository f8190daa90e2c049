use symmoments::bounds::applicable_bounds;
use symmoments::summoments::{
    best_sum_moment, exponential_recursion_moment, gaussian_sum_norm, haagerup_moment, laplace_sum_moment_exact,
    monte_carlo_sum_moments, rademacher_sum_moment, EngineChain, MonteCarloPlan,
};
use symmoments::verify::{
    derive_seed, run_check, search_counterexamples, CheckId, SearchConfig, SuiteConfig, VerificationReport,
    DEFAULT_P_GRID, EXACT_MAX_N,
};
use symmoments::{DistributionSpec, Error, MomentEstimate};

use crate::job::{Engine, Job};
use crate::output::{BoundRecord, Header, MomentRecord, ReportRecord, SweepRecord};
use crate::CliError;

/// Monte Carlo sample count for `moment`, `bounds` and `sweep`.
pub const DEFAULT_SAMPLES: usize = 200_000;
pub const DEFAULT_SEARCH_ITERATIONS: usize = 10_000;
const SWEEP_SIZES: [usize; 5] = [1, 2, 4, 8, 16];

pub enum Records {
    Moment(Vec<MomentRecord>),
    Bounds(Vec<BoundRecord>),
    Reports(Vec<ReportRecord>),
    Sweep(Vec<SweepRecord>),
}

impl Records {
    pub fn violations(&self) -> u64 {
        match self {
            Records::Reports(rs) => rs.iter().map(|r| r.violations).sum(),
            _ => 0,
        }
    }
}

fn distribution(job: &Job) -> Result<DistributionSpec<f64>, CliError> {
    Ok(DistributionSpec::from_kind(job.distribution.kind, job.distribution.alpha)?)
}

fn samples(job: &Job) -> usize {
    job.samples.unwrap_or(DEFAULT_SAMPLES)
}

/// Exact engines first, Monte Carlo only with a seed.
fn auto_estimate(
    job: &Job,
    v: &[f64],
    d: &DistributionSpec<f64>,
    p: f64,
    link: u64,
) -> Result<MomentEstimate<f64>, CliError> {
    let no_mc = EngineChain { monte_carlo: false, ..EngineChain::default() };
    let unused = MonteCarloPlan { samples: 0, seed: 0 };
    match best_sum_moment(v, d, p, no_mc, unused) {
        Err(e) if e.is_capacity() => {
            let Some(seed) = job.seed else {
                return Err(CliError::Usage(format!(
                    "seed: required because no deterministic engine applies ({e}) and the automatic chain falls back to Monte Carlo"
                )));
            };
            let plan = MonteCarloPlan { samples: samples(job), seed: derive_seed(seed, &[link]) };
            Ok(best_sum_moment(v, d, p, EngineChain::default(), plan)?)
        }
        other => Ok(other?),
    }
}

/// Runs one named engine over every order in `ps`.
fn estimates(
    job: &Job,
    engine: Engine,
    v: &[f64],
    d: &DistributionSpec<f64>,
    ps: &[f64],
) -> Result<Vec<MomentEstimate<f64>>, CliError> {
    let kind = d.kind();
    let one = |f: &dyn Fn(f64) -> symmoments::Result<MomentEstimate<f64>>| -> Result<Vec<_>, CliError> {
        ps.iter().map(|&p| f(p).map_err(CliError::from)).collect()
    };
    match engine {
        Engine::Auto => ps.iter().map(|&p| auto_estimate(job, v, d, p, 1)).collect(),
        Engine::Enumeration => one(&|p| rademacher_sum_moment(v, p)),
        Engine::PartialFractions => one(&|p| laplace_sum_moment_exact(v, p)),
        Engine::Haagerup => one(&|p| haagerup_moment(v, kind, p)),
        Engine::Recursion => one(&|p| exponential_recursion_moment(v, p)),
        Engine::ClosedForm => one(&|p| gaussian_sum_norm(v, p)),
        Engine::MonteCarlo => {
            let seed = job.seed.expect("validated: monteCarlo has a seed");
            Ok(monte_carlo_sum_moments(v, d, ps, samples(job), derive_seed(seed, &[1]))?)
        }
    }
}

pub fn run(job: &Job) -> Result<Records, CliError> {
    use crate::job::Command::*;
    match job.command {
        Moment => moment(job).map(Records::Moment),
        Bounds => bounds(job).map(Records::Bounds),
        Verify => verify(job).map(Records::Reports),
        Search => search(job).map(Records::Reports),
        Sweep => sweep(job).map(Records::Sweep),
    }
}

fn moment(job: &Job) -> Result<Vec<MomentRecord>, CliError> {
    let v = job.coefficients.as_deref().expect("validated");
    let ps = job.p.as_deref().expect("validated");
    let d = distribution(job)?;
    let mut per_engine = Vec::new();
    for &engine in &job.engine {
        per_engine.push(estimates(job, engine, v, &d, ps)?);
    }
    // one record per p, engines in the requested order
    let mut out = Vec::new();
    for i in 0..ps.len() {
        for (engine, ms) in job.engine.iter().zip(&per_engine) {
            out.push(MomentRecord::new(Header::for_job(job), job, engine.name(), &ms[i]));
        }
    }
    Ok(out)
}

fn bounds_for(
    job: &Job,
    v: &[f64],
    d: &DistributionSpec<f64>,
    p: f64,
) -> Result<Vec<symmoments::BoundInterval<f64>>, CliError> {
    let mut head_err = None;
    let r = applicable_bounds(v, d, p, |head| {
        auto_estimate(job, head, d, p, 2).map_err(|e| {
            head_err = Some(e);
            Error::Capacity("head norm unavailable".into())
        })
    });
    match (r, head_err) {
        (Ok(b), _) => Ok(b),
        (Err(_), Some(e)) => Err(e),
        (Err(e), None) => Err(e.into()),
    }
}

fn bounds(job: &Job) -> Result<Vec<BoundRecord>, CliError> {
    let v = job.coefficients.as_deref().expect("validated");
    let d = distribution(job)?;
    let mut out = Vec::new();
    for &p in job.p.as_deref().expect("validated") {
        for b in bounds_for(job, v, &d, p)? {
            out.push(BoundRecord::new(Header::for_job(job), job, &b));
        }
    }
    Ok(out)
}

fn checks(job: &Job) -> Vec<CheckId> {
    job.checks.clone().unwrap_or_else(|| CheckId::ALL.to_vec())
}

fn p_grid(job: &Job) -> Vec<f64> {
    job.p.clone().unwrap_or_else(|| DEFAULT_P_GRID.to_vec())
}

fn report_records(job: &Job, reports: Vec<VerificationReport>) -> Vec<ReportRecord> {
    reports.iter().map(|r| ReportRecord::new(Header::for_job(job), r)).collect()
}

fn verify(job: &Job) -> Result<Vec<ReportRecord>, CliError> {
    let defaults = SuiteConfig::default();
    let cfg = SuiteConfig {
        seed: job.seed.expect("validated"),
        checks: checks(job),
        instances: job.instances.unwrap_or(defaults.instances),
        samples: job.samples.unwrap_or(defaults.samples),
        search_iterations: job.iterations.unwrap_or(defaults.search_iterations),
        p_grid: p_grid(job),
    };
    let reports = cfg.checks.iter().map(|&c| run_check(c, &cfg)).collect::<Result<Vec<_>, _>>()?;
    Ok(report_records(job, reports))
}

fn search(job: &Job) -> Result<Vec<ReportRecord>, CliError> {
    let seed = job.seed.expect("validated");
    let mut reports = Vec::new();
    for check in checks(job) {
        reports.push(search_counterexamples(&SearchConfig {
            check,
            n_min: 1,
            n_max: EXACT_MAX_N,
            p_grid: p_grid(job),
            iterations: job.iterations.unwrap_or(DEFAULT_SEARCH_ITERATIONS),
            seed,
        })?);
    }
    Ok(report_records(job, reports))
}

/// Coefficient families of the sweep, each at several lengths.
fn family(name: &str, n: usize) -> Vec<f64> {
    match name {
        "flat" => vec![1.0 / (n as f64).sqrt(); n],
        "geometric" => (0..n).map(|i| 0.5f64.powi(i as i32)).collect(),
        "harmonic" => (1..=n).map(|i| 1.0 / i as f64).collect(),
        _ => unreachable!("unknown family {name}"),
    }
}

fn sweep(job: &Job) -> Result<Vec<SweepRecord>, CliError> {
    let d = distribution(job)?;
    let engine = job.engine[0];
    let ps = p_grid(job);
    let mut cases: Vec<(&'static str, Vec<f64>)> = Vec::new();
    if let Some(v) = &job.coefficients {
        cases.push(("input", v.clone()));
    }
    for name in ["flat", "geometric", "harmonic"] {
        for n in SWEEP_SIZES {
            cases.push((name, family(name, n)));
        }
    }
    let mut out = Vec::new();
    for (name, v) in cases {
        let norms = estimates(job, engine, &v, &d, &ps)?;
        for (&p, m) in ps.iter().zip(&norms) {
            let row = |source: Option<String>, lower, upper| SweepRecord {
                command: job.command.name(),
                inputs_digest: job.digest(),
                seed: job.seed,
                version: env!("CARGO_PKG_VERSION"),
                family: name,
                n: v.len(),
                distribution: job.distribution.kind.to_string(),
                alpha: job.distribution.alpha,
                p,
                norm: m.value,
                norm_halfwidth: m.norm_halfwidth(),
                method: m.method.to_string(),
                source,
                lower,
                upper,
            };
            let bs = bounds_for(job, &v, &d, p)?;
            if bs.is_empty() {
                out.push(row(None, None, None));
            }
            for b in bs {
                out.push(row(Some(b.source.to_string()), Some(b.lower), Some(b.upper)));
            }
        }
    }
    Ok(out)
}
