use std::io::Read;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use symmoments::summoments::MC_MIN_SAMPLES;
use symmoments::verify::CheckId;
use symmoments::DistKind;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Command {
    Moment,
    Bounds,
    Verify,
    Sweep,
    Search,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Moment => "moment",
            Command::Bounds => "bounds",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
            Command::Search => "search",
        }
    }

    /// Document fields the command reads; anything else is rejected.
    fn fields(self) -> &'static [&'static str] {
        match self {
            Command::Moment => &["coefficients", "distribution", "p", "engine", "samples", "seed"],
            Command::Bounds => &["coefficients", "distribution", "p", "samples", "seed"],
            Command::Verify => &["p", "samples", "seed", "checks", "iterations", "instances"],
            Command::Sweep => &["coefficients", "distribution", "p", "engine", "samples", "seed"],
            Command::Search => &["p", "seed", "checks", "iterations"],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Engine {
    /// Strongest applicable engine: exact, then Haagerup, then Monte Carlo.
    Auto,
    Enumeration,
    PartialFractions,
    Haagerup,
    MonteCarlo,
    Recursion,
    ClosedForm,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Auto => "auto",
            Engine::Enumeration => "enumeration",
            Engine::PartialFractions => "partialFractions",
            Engine::Haagerup => "haagerup",
            Engine::MonteCarlo => "monteCarlo",
            Engine::Recursion => "recursion",
            Engine::ClosedForm => "closedForm",
        }
    }

    fn applies_to(self, kind: DistKind) -> bool {
        match self {
            Engine::Auto | Engine::MonteCarlo => true,
            Engine::Enumeration => kind == DistKind::Rademacher,
            Engine::PartialFractions | Engine::Recursion => kind == DistKind::SymExponential,
            Engine::Haagerup => matches!(kind, DistKind::Rademacher | DistKind::SymExponential),
            Engine::ClosedForm => kind == DistKind::Gaussian,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DistributionField {
    pub kind: DistKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

/// The job document as read from a file or stdin, before flag overrides.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct JobDocument {
    pub command: Option<Command>,
    pub coefficients: Option<Vec<f64>>,
    pub distribution: Option<DistributionField>,
    pub p: Option<Vec<f64>>,
    pub engine: Option<Vec<Engine>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub checks: Option<Vec<CheckId>>,
    pub iterations: Option<usize>,
    pub instances: Option<usize>,
}

/// Parses a string through the serde names used in job documents.
pub fn parse_name<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

impl JobDocument {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let msg = e.into_inner().to_string();
            if path == "." {
                CliError::Usage(format!("job document: {msg}"))
            } else {
                CliError::Usage(format!("job document: {path}: {msg}"))
            }
        })
    }

    /// Reads a document from `path`, or stdin for `-`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = if path.as_os_str() == "-" {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Usage(format!("job document: cannot read stdin: {e}")))?;
            s
        } else {
            std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("job document: cannot read {}: {e}", path.display())))?
        };
        Self::from_json(&text)
    }

    /// Fields set by `other` replace those of `self`.
    pub fn overridden_by(self, other: JobDocument) -> JobDocument {
        JobDocument {
            command: other.command.or(self.command),
            coefficients: other.coefficients.or(self.coefficients),
            distribution: other.distribution.or(self.distribution),
            p: other.p.or(self.p),
            engine: other.engine.or(self.engine),
            samples: other.samples.or(self.samples),
            seed: other.seed.or(self.seed),
            format: other.format.or(self.format),
            checks: other.checks.or(self.checks),
            iterations: other.iterations.or(self.iterations),
            instances: other.instances.or(self.instances),
        }
    }

    fn present_fields(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut note = |set: bool, name| {
            if set {
                out.push(name);
            }
        };
        note(self.coefficients.is_some(), "coefficients");
        note(self.distribution.is_some(), "distribution");
        note(self.p.is_some(), "p");
        note(self.engine.is_some(), "engine");
        note(self.samples.is_some(), "samples");
        note(self.seed.is_some(), "seed");
        note(self.checks.is_some(), "checks");
        note(self.iterations.is_some(), "iterations");
        note(self.instances.is_some(), "instances");
        out
    }
}

/// A validated job. Serialized form feeds the inputs digest, so the output
/// format is deliberately not part of it.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Job {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    pub distribution: DistributionField,
    pub p: Option<Vec<f64>>,
    pub engine: Vec<Engine>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub checks: Option<Vec<CheckId>>,
    pub iterations: Option<usize>,
    pub instances: Option<usize>,
    #[serde(skip)]
    pub format: Format,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl Job {
    pub fn validate(doc: JobDocument) -> Result<Self, CliError> {
        let command =
            doc.command.ok_or_else(|| usage("command: required (moment, bounds, verify, sweep or search)"))?;
        let allowed = command.fields();
        if let Some(f) = doc.present_fields().into_iter().find(|f| !allowed.contains(f)) {
            return Err(usage(format!("{f}: not used by {}", command.name())));
        }

        if let Some(cs) = &doc.coefficients {
            if cs.is_empty() {
                return Err(usage("coefficients: must be non-empty"));
            }
            if let Some(i) = cs.iter().position(|c| !c.is_finite()) {
                return Err(usage(format!("coefficients[{i}]: must be finite, got {}", cs[i])));
            }
        } else if matches!(command, Command::Moment | Command::Bounds) {
            return Err(usage(format!("coefficients: required for {}", command.name())));
        }

        let distribution = doc.distribution.unwrap_or(DistributionField { kind: DistKind::Rademacher, alpha: None });
        match (distribution.kind, distribution.alpha) {
            (DistKind::WeibullTail, None) => return Err(usage("distribution.alpha: required for weibullTail")),
            (DistKind::WeibullTail, Some(a)) if !(a >= 1.0 && a.is_finite()) => {
                return Err(usage(format!("distribution.alpha: must be a finite value >= 1, got {a}")))
            }
            (DistKind::WeibullTail, Some(_)) | (_, None) => {}
            (kind, Some(_)) => {
                return Err(usage(format!("distribution.alpha: only valid for weibullTail, not {kind}")))
            }
        }

        if let Some(ps) = &doc.p {
            if ps.is_empty() {
                return Err(usage("p: must be non-empty"));
            }
            if let Some(i) = ps.iter().position(|p| !(*p >= 1.0 && p.is_finite())) {
                return Err(usage(format!("p[{i}]: must be a finite value >= 1, got {}", ps[i])));
            }
        } else if matches!(command, Command::Moment | Command::Bounds) {
            return Err(usage(format!("p: required for {}", command.name())));
        }

        let engine = doc.engine.unwrap_or_else(|| vec![Engine::Auto]);
        if engine.is_empty() {
            return Err(usage("engine: must be non-empty"));
        }
        if let Some(i) = engine.iter().position(|e| !e.applies_to(distribution.kind)) {
            return Err(usage(format!("engine[{i}]: {} does not apply to {}", engine[i].name(), distribution.kind)));
        }
        if command == Command::Sweep && engine.len() > 1 {
            return Err(usage("engine: sweep takes a single engine"));
        }

        if let Some(s) = doc.samples {
            if s < MC_MIN_SAMPLES {
                return Err(usage(format!("samples: must be at least {MC_MIN_SAMPLES}, got {s}")));
            }
        }
        if doc.seed.is_none() {
            if matches!(command, Command::Verify | Command::Search) {
                return Err(usage(format!("seed: required for {}", command.name())));
            }
            if engine.contains(&Engine::MonteCarlo) {
                return Err(usage("seed: required for the monteCarlo engine"));
            }
        }
        if let Some(cs) = &doc.checks {
            if cs.is_empty() {
                return Err(usage("checks: must be non-empty"));
            }
        }
        if doc.iterations == Some(0) && command == Command::Search {
            return Err(usage("iterations: must be positive"));
        }
        if doc.instances == Some(0) {
            return Err(usage("instances: must be positive"));
        }

        let format = doc.format.unwrap_or(if command == Command::Sweep { Format::Csv } else { Format::Json });
        Ok(Job {
            command,
            coefficients: doc.coefficients,
            distribution,
            p: doc.p,
            engine,
            samples: doc.samples,
            seed: doc.seed,
            checks: doc.checks,
            iterations: doc.iterations,
            instances: doc.instances,
            format,
        })
    }

    /// Hex SHA-256 of the canonical JSON of the validated job.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("job serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> JobDocument {
        JobDocument::from_json(text).unwrap()
    }

    fn err(text: &str) -> String {
        match JobDocument::from_json(text).and_then(Job::validate) {
            Err(CliError::Usage(m)) => m,
            other => panic!("expected a usage error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected_with_a_path() {
        let m = err(r#"{"command":"moment","coeffs":[1]}"#);
        assert!(m.contains("coeffs"), "{m}");
        let m = err(r#"{"command":"moment","distribution":{"kind":"rademacher","shape":2}}"#);
        assert!(m.contains("distribution") && m.contains("shape"), "{m}");
    }

    #[test]
    fn field_paths_in_diagnostics() {
        assert!(err(r#"{"command":"moment","coefficients":[1],"p":[4,0.5]}"#).starts_with("p[1]:"));
        assert!(err(r#"{"command":"moment","coefficients":[1],"p":[4],"engine":["auto","enumeration"],"distribution":{"kind":"gaussian"}}"#)
            .starts_with("engine[1]:"));
        assert!(err(r#"{"command":"moment","coefficients":[1],"p":[4],"distribution":{"kind":"weibullTail"}}"#)
            .starts_with("distribution.alpha:"));
        assert!(err(r#"{"command":"verify"}"#).starts_with("seed:"));
        assert!(err(r#"{"command":"search","seed":1,"coefficients":[1]}"#).starts_with("coefficients:"));
        assert!(err(r#"{"coefficients":[1]}"#).starts_with("command:"));
    }

    #[test]
    fn overrides_win() {
        let base = doc(r#"{"command":"moment","coefficients":[1,2],"p":[3],"seed":5}"#);
        let flags = JobDocument { p: Some(vec![4.0]), ..JobDocument::default() };
        let job = Job::validate(base.overridden_by(flags)).unwrap();
        assert_eq!(job.p, Some(vec![4.0]));
        assert_eq!(job.seed, Some(5));
        assert_eq!(job.coefficients, Some(vec![1.0, 2.0]));
    }

    #[test]
    fn digest_ignores_format_but_not_inputs() {
        let a = Job::validate(doc(r#"{"command":"moment","coefficients":[1],"p":[3],"format":"json"}"#)).unwrap();
        let b = Job::validate(doc(r#"{"command":"moment","coefficients":[1],"p":[3],"format":"csv"}"#)).unwrap();
        let c = Job::validate(doc(r#"{"command":"moment","coefficients":[1],"p":[4]}"#)).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest().len(), 64);
    }

    #[test]
    fn names_parse_like_documents() {
        assert_eq!(parse_name::<Engine>("partialFractions"), Ok(Engine::PartialFractions));
        assert_eq!(parse_name::<DistKind>("symExponential"), Ok(DistKind::SymExponential));
        assert!(parse_name::<Engine>("fast").is_err());
    }
}
