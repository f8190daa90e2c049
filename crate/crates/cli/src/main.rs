//! `symmoments`: moments, bounds and verification runs from the command line.

mod job;
mod output;
mod run;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use symmoments::verify::CheckId;
use symmoments::DistKind;

use job::{parse_name, Command, DistributionField, Engine, Format, Job, JobDocument};
use output::write_records;
use run::Records;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Capacity(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(symmoments::Error),
}

impl From<symmoments::Error> for CliError {
    fn from(e: symmoments::Error) -> Self {
        if e.is_capacity() || matches!(e, symmoments::Error::QuadratureNonConvergence { .. }) {
            CliError::Capacity(e.to_string())
        } else {
            CliError::Core(e)
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Capacity(_) => 2,
            _ => 1,
        }
    }
}

/// Moments of weighted sums of independent symmetric random variables.
///
/// Fields come from an optional JSON job document; flags override them.
#[derive(Debug, Parser)]
#[command(name = "symmoments", version)]
struct Cli {
    /// moment, bounds, verify, sweep or search
    #[arg(value_parser = parse_name::<Command>)]
    command: Option<Command>,

    /// Job document; `-` reads standard input
    #[arg(long)]
    job: Option<PathBuf>,

    /// Comma-separated coefficients
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coeffs: Option<Vec<f64>>,

    /// rademacher, symExponential, gaussian or weibullTail
    #[arg(long, value_parser = parse_name::<DistKind>)]
    dist: Option<DistKind>,

    /// Weibull-tail shape
    #[arg(long)]
    alpha: Option<f64>,

    /// Comma-separated orders
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,

    /// Comma-separated engines: auto, enumeration, partialFractions, haagerup,
    /// monteCarlo, recursion, closedForm
    #[arg(long, value_delimiter = ',', value_parser = parse_name::<Engine>)]
    engine: Option<Vec<Engine>>,

    #[arg(long)]
    samples: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    /// json (NDJSON) or csv
    #[arg(long, value_parser = parse_name::<Format>)]
    format: Option<Format>,

    /// Write records here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,

    /// Comma-separated check names (verify, search)
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<CheckId>>,

    /// Counterexample-search iterations per check
    #[arg(long)]
    iterations: Option<usize>,

    /// Random instances per check (verify)
    #[arg(long)]
    instances: Option<usize>,
}

impl Cli {
    /// Flags as a partial document; `--alpha` alone amends the document's distribution.
    fn overrides(&self, base: &JobDocument) -> JobDocument {
        let distribution = match (self.dist, self.alpha) {
            (Some(kind), alpha) => Some(DistributionField { kind, alpha }),
            (None, Some(alpha)) => {
                let kind = base.distribution.as_ref().map_or(DistKind::WeibullTail, |d| d.kind);
                Some(DistributionField { kind, alpha: Some(alpha) })
            }
            (None, None) => None,
        };
        JobDocument {
            command: self.command,
            coefficients: self.coeffs.clone(),
            distribution,
            p: self.p.clone(),
            engine: self.engine.clone(),
            samples: self.samples,
            seed: self.seed,
            format: self.format,
            checks: self.checks.clone(),
            iterations: self.iterations,
            instances: self.instances,
        }
    }
}

fn emit(records: &Records, job: &Job, out: Option<&PathBuf>) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(
            File::create(path).map_err(|e| CliError::Usage(format!("out: cannot create {}: {e}", path.display())))?,
        ),
        None => Box::new(std::io::stdout().lock()),
    };
    let sink = BufWriter::new(sink);
    match records {
        Records::Moment(r) => write_records(r, job.format, sink),
        Records::Bounds(r) => write_records(r, job.format, sink),
        Records::Reports(r) => write_records(r, job.format, sink),
        Records::Sweep(r) => write_records(r, job.format, sink),
    }
}

fn execute(cli: &Cli) -> Result<u64, CliError> {
    let base = match &cli.job {
        Some(path) => JobDocument::load(path)?,
        None => JobDocument::default(),
    };
    let flags = cli.overrides(&base);
    let job = Job::validate(base.overridden_by(flags))?;
    let records = run::run(&job)?;
    emit(&records, &job, cli.out.as_ref())?;
    Ok(records.violations())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(violations) => {
            eprintln!("symmoments: {violations} violation(s) found");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("symmoments: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
