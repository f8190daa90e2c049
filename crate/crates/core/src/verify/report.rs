use serde::{Deserialize, Serialize};

/// Identifier of one verified inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    /// `prod cos(a_i t) + a_1^2 t^2 / 2 >= prod_{i>=2} 1 / (1 + a_i^2 t^2 / 2)`.
    CosProduct,
    /// Gaussian / Rademacher / exponential-tail / Gaussian-tail comparison chain.
    Comp2,
    /// `E|sum_i a_i eps_i|^p >= E|sum_{i>=2} a_i E_i|^p` for `2 <= p <= 4`.
    Comp1,
    /// Rademacher and exponential sums bracket every log-concave-tailed sum.
    Extremality,
    /// Every applicable bound interval contains the reference norm.
    Sandwich,
    /// `E|aE+b|^p = |b|^p + p(p-1)/2 a^2 E|aE+b|^{p-2}`.
    Rec1,
    /// `E|a eps+b|^p >= |b|^p + p(p-1)/2 a^2 |b|^{p-2}` for `p >= 3`.
    Rec2,
    Estrad,
    Estexp,
    Logconc,
    GaussGap,
}

impl CheckId {
    pub const ALL: [CheckId; 11] = [
        CheckId::CosProduct,
        CheckId::Comp2,
        CheckId::Comp1,
        CheckId::Extremality,
        CheckId::Sandwich,
        CheckId::Rec1,
        CheckId::Rec2,
        CheckId::Estrad,
        CheckId::Estexp,
        CheckId::Logconc,
        CheckId::GaussGap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::CosProduct => "cos_product",
            CheckId::Comp2 => "comp2",
            CheckId::Comp1 => "comp1",
            CheckId::Extremality => "extremality",
            CheckId::Sandwich => "sandwich",
            CheckId::Rec1 => "rec1",
            CheckId::Rec2 => "rec2",
            CheckId::Estrad => "estrad",
            CheckId::Estexp => "estexp",
            CheckId::Logconc => "logconc",
            CheckId::GaussGap => "gauss_gap",
        }
    }
}

impl std::fmt::Display for CheckId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CheckId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckId::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown check `{s}`"))
    }
}

/// The instance behind a report's worst margin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Witness {
    pub coefficients: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Extra scalar parameter: `t` for the cosine product, `b` for the recursions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

/// Outcome of one comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// Statistical comparison that holds even at the unfavourable end of the interval.
    CiPass,
    /// The interval straddles the boundary.
    Inconclusive,
    Violation,
}

/// Pass/fail ledger of one check.
///
/// Margins are signed, `big - small` for an inequality `big >= small`, in the
/// units the check documents; negative means the point values violate it.
/// A comparison is a violation only if the margin stays below
/// `-(numerical slack + interval halfwidth)`. A statistical comparison whose
/// interval straddles the boundary is inconclusive, never a pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub check: CheckId,
    pub cases: u64,
    pub violations: u64,
    /// Smallest point margin seen; `None` before any case.
    pub worst_margin: Option<f64>,
    /// Statistical comparisons that passed after widening by their interval.
    pub ci_resolved: u64,
    pub inconclusive: u64,
    pub seed: u64,
    pub witness: Option<Witness>,
}

impl VerificationReport {
    pub fn new(check: CheckId, seed: u64) -> Self {
        Self {
            check,
            cases: 0,
            violations: 0,
            worst_margin: None,
            ci_resolved: 0,
            inconclusive: 0,
            seed,
            witness: None,
        }
    }

    pub fn passed(&self) -> u64 {
        self.cases - self.violations - self.inconclusive
    }

    pub fn is_clean(&self) -> bool {
        self.violations == 0
    }

    /// Records a comparison between exact quantities.
    pub fn record_exact(&mut self, margin: f64, slack: f64, witness: impl FnOnce() -> Witness) -> Verdict {
        self.record(margin, 0.0, slack, witness)
    }

    /// Records a comparison whose sides carry a combined halfwidth `halfwidth`.
    /// A zero halfwidth makes this an exact comparison.
    pub fn record(&mut self, margin: f64, halfwidth: f64, slack: f64, witness: impl FnOnce() -> Witness) -> Verdict {
        self.cases += 1;
        let verdict = if margin.is_nan() || halfwidth.is_nan() {
            Verdict::Violation
        } else if halfwidth == 0.0 {
            if margin >= -slack {
                Verdict::Pass
            } else {
                Verdict::Violation
            }
        } else if margin - halfwidth >= -slack {
            Verdict::CiPass
        } else if margin + halfwidth < -slack {
            Verdict::Violation
        } else {
            Verdict::Inconclusive
        };
        match verdict {
            Verdict::Violation => self.violations += 1,
            Verdict::Inconclusive => self.inconclusive += 1,
            Verdict::CiPass => self.ci_resolved += 1,
            Verdict::Pass => {}
        }
        let worse = match self.worst_margin {
            None => !margin.is_nan(),
            Some(w) => margin < w,
        };
        if worse {
            self.worst_margin = Some(margin);
            self.witness = Some(witness());
        }
        verdict
    }

    /// Folds `other` into `self`. Counts add; the worst margin is the smaller
    /// one, keeping `self`'s witness on ties.
    pub fn merge(mut self, other: VerificationReport) -> Self {
        self.cases += other.cases;
        self.violations += other.violations;
        self.ci_resolved += other.ci_resolved;
        self.inconclusive += other.inconclusive;
        if let Some(m) = other.worst_margin {
            if self.worst_margin.is_none_or(|w| m < w) {
                self.worst_margin = Some(m);
                self.witness = other.witness;
            }
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w() -> Witness {
        Witness { coefficients: vec![1.0], p: None, t: None }
    }

    #[test]
    fn verdicts() {
        let mut r = VerificationReport::new(CheckId::Comp2, 7);
        assert_eq!(r.record_exact(0.5, 1e-9, w), Verdict::Pass);
        assert_eq!(r.record_exact(-1e-10, 1e-9, w), Verdict::Pass);
        assert_eq!(r.record_exact(-1e-8, 1e-9, w), Verdict::Violation);
        assert_eq!(r.record(0.3, 0.1, 1e-9, w), Verdict::CiPass);
        assert_eq!(r.record(0.05, 0.1, 1e-9, w), Verdict::Inconclusive);
        assert_eq!(r.record(-0.05, 0.1, 1e-9, w), Verdict::Inconclusive);
        assert_eq!(r.record(-0.3, 0.1, 1e-9, w), Verdict::Violation);
        assert_eq!(r.cases, 7);
        assert_eq!(r.violations, 2);
        assert_eq!(r.inconclusive, 2);
        assert_eq!(r.ci_resolved, 1);
        assert_eq!(r.passed(), 3);
        assert_eq!(r.worst_margin, Some(-0.3));
    }

    #[test]
    fn merge_adds_and_keeps_minimum() {
        let mut a = VerificationReport::new(CheckId::Comp1, 1);
        a.record_exact(0.2, 0.0, w);
        let mut b = VerificationReport::new(CheckId::Comp1, 1);
        b.record_exact(0.1, 0.0, || Witness { coefficients: vec![2.0], p: Some(3.0), t: None });
        let m = a.clone().merge(b.clone());
        assert_eq!(m.cases, 2);
        assert_eq!(m.worst_margin, Some(0.1));
        assert_eq!(m.witness.as_ref().unwrap().coefficients, vec![2.0]);
        let empty = VerificationReport::new(CheckId::Comp1, 1);
        assert_eq!(empty.clone().merge(a.clone()), a);
        assert_eq!(a.clone().merge(empty), a);
    }

    #[test]
    fn check_names_round_trip() {
        for c in CheckId::ALL {
            assert_eq!(c.name().parse::<CheckId>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.name()));
        }
    }
}
