use std::io::Write;

use serde::Serialize;
use symmoments::verify::VerificationReport;
use symmoments::{BoundInterval, MomentEstimate, Rigor};

use crate::job::{Format, Job};
use crate::CliError;

/// Fields every record starts with.
#[derive(Clone, Debug)]
pub struct Header {
    pub command: &'static str,
    pub inputs_digest: String,
    pub seed: Option<u64>,
    pub version: &'static str,
}

impl Header {
    pub fn for_job(job: &Job) -> Self {
        Self {
            command: job.command.name(),
            inputs_digest: job.digest(),
            seed: job.seed,
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

const HEADER_FIELDS: [&str; 4] = ["command", "inputsDigest", "seed", "version"];

/// A flat record with a fixed CSV column list.
pub trait Record: Serialize {
    const COLUMNS: &'static [&'static str];
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MomentRecord {
    pub command: &'static str,
    pub inputs_digest: String,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub distribution: String,
    pub alpha: Option<f64>,
    pub engine: &'static str,
    pub p: f64,
    pub value: f64,
    pub raw_moment: f64,
    pub method: String,
    pub rigor: &'static str,
    /// Absolute halfwidth on the raw moment; zero when exact.
    pub halfwidth: f64,
    pub confidence: Option<f64>,
}

impl Record for MomentRecord {
    const COLUMNS: &'static [&'static str] =
        &["distribution", "alpha", "engine", "p", "value", "rawMoment", "method", "rigor", "halfwidth", "confidence"];
}

impl MomentRecord {
    pub fn new(header: Header, job: &Job, engine: &'static str, m: &MomentEstimate<f64>) -> Self {
        let (rigor, confidence) = match m.rigor {
            Rigor::Exact => ("exact", None),
            Rigor::Tolerance { .. } => ("tolerance", None),
            Rigor::Ci { confidence, .. } => ("ci", Some(confidence)),
        };
        Self {
            command: header.command,
            inputs_digest: header.inputs_digest,
            seed: header.seed,
            version: header.version,
            distribution: job.distribution.kind.to_string(),
            alpha: job.distribution.alpha,
            engine,
            p: m.p,
            value: m.value,
            raw_moment: m.raw_moment,
            method: m.method.to_string(),
            rigor,
            halfwidth: m.raw_halfwidth(),
            confidence,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundRecord {
    pub command: &'static str,
    pub inputs_digest: String,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub distribution: String,
    pub alpha: Option<f64>,
    pub p: f64,
    pub source: String,
    pub lower: f64,
    pub upper: f64,
}

impl Record for BoundRecord {
    const COLUMNS: &'static [&'static str] = &["distribution", "alpha", "p", "source", "lower", "upper"];
}

impl BoundRecord {
    pub fn new(header: Header, job: &Job, b: &BoundInterval<f64>) -> Self {
        Self {
            command: header.command,
            inputs_digest: header.inputs_digest,
            seed: header.seed,
            version: header.version,
            distribution: job.distribution.kind.to_string(),
            alpha: job.distribution.alpha,
            p: b.p,
            source: b.source.to_string(),
            lower: b.lower,
            upper: b.upper,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportRecord {
    pub command: &'static str,
    pub inputs_digest: String,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub check: String,
    pub cases: u64,
    pub violations: u64,
    pub worst_margin: Option<f64>,
    pub ci_resolved: u64,
    pub inconclusive: u64,
    /// JSON array text, so that CSV and JSON carry the same rendering.
    pub witness_coefficients: Option<String>,
    pub witness_p: Option<f64>,
    pub witness_t: Option<f64>,
}

impl Record for ReportRecord {
    const COLUMNS: &'static [&'static str] = &[
        "check",
        "cases",
        "violations",
        "worstMargin",
        "ciResolved",
        "inconclusive",
        "witnessCoefficients",
        "witnessP",
        "witnessT",
    ];
}

impl ReportRecord {
    pub fn new(header: Header, r: &VerificationReport) -> Self {
        let w = r.witness.as_ref();
        Self {
            command: header.command,
            inputs_digest: header.inputs_digest,
            seed: header.seed,
            version: header.version,
            check: r.check.to_string(),
            cases: r.cases,
            violations: r.violations,
            worst_margin: r.worst_margin,
            ci_resolved: r.ci_resolved,
            inconclusive: r.inconclusive,
            witness_coefficients: w.map(|w| serde_json::to_string(&w.coefficients).expect("floats serialize")),
            witness_p: w.and_then(|w| w.p),
            witness_t: w.and_then(|w| w.t),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRecord {
    pub command: &'static str,
    pub inputs_digest: String,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub family: &'static str,
    pub n: usize,
    pub distribution: String,
    pub alpha: Option<f64>,
    pub p: f64,
    pub norm: f64,
    pub norm_halfwidth: f64,
    pub method: String,
    /// Empty when no bound applies at this `p`.
    pub source: Option<String>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Record for SweepRecord {
    const COLUMNS: &'static [&'static str] =
        &["family", "n", "distribution", "alpha", "p", "norm", "normHalfwidth", "method", "source", "lower", "upper"];
}

/// Renders every column through serde_json so CSV cells match the JSON
/// text exactly (the csv crate would print `1e23` where JSON has `1e+23`).
fn csv_fields<R: Record>(r: &R, columns: &[&str]) -> Result<Vec<String>, CliError> {
    let value = serde_json::to_value(r).map_err(|e| CliError::Io(e.to_string()))?;
    columns
        .iter()
        .map(|c| match &value[*c] {
            serde_json::Value::Null => Ok(String::new()),
            serde_json::Value::String(s) => Ok(s.clone()),
            serde_json::Value::Number(n) => Ok(n.to_string()),
            serde_json::Value::Bool(b) => Ok(b.to_string()),
            other => Err(CliError::Io(format!("column {c} is not a scalar: {other}"))),
        })
        .collect()
}

/// Writes records as NDJSON or as CSV with a header row, even when empty.
pub fn write_records<R: Record, W: Write>(records: &[R], format: Format, out: W) -> Result<(), CliError> {
    match format {
        Format::Json => {
            let mut out = out;
            for r in records {
                serde_json::to_writer(&mut out, r).map_err(|e| CliError::Io(e.to_string()))?;
                out.write_all(b"\n").map_err(|e| CliError::Io(e.to_string()))?;
            }
            out.flush().map_err(|e| CliError::Io(e.to_string()))
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            let columns: Vec<&str> = HEADER_FIELDS.iter().chain(R::COLUMNS).copied().collect();
            w.write_record(&columns).map_err(|e| CliError::Io(e.to_string()))?;
            for r in records {
                let fields = csv_fields(r, &columns)?;
                w.write_record(&fields).map_err(|e| CliError::Io(e.to_string()))?;
            }
            w.flush().map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
