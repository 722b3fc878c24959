//! Centralized cooperative sensing: a fusion center combines the reports of
//! several secondary users into one decision.
//!
//! The distributed variant, where each SU fuses its own report with the ones
//! it received from peers, uses the same functions over that SU's report
//! list.

use std::fmt;
use std::str::FromStr;

use crate::detectors::Decision;
use crate::error::{Result, SenseError};
use crate::signal_model::Hypothesis;

#[derive(Debug, Clone, PartialEq)]
pub enum ReportKind {
    Hard(Decision),
    /// Statistic standardized by the sender to zero mean and unit variance
    /// under H0.
    Soft(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalReport {
    pub su_id: String,
    pub kind: ReportKind,
}

impl LocalReport {
    pub fn hard(su_id: impl Into<String>, decision: Decision) -> Self {
        Self {
            su_id: su_id.into(),
            kind: ReportKind::Hard(decision),
        }
    }

    pub fn soft(su_id: impl Into<String>, standardized: f64) -> Self {
        Self {
            su_id: su_id.into(),
            kind: ReportKind::Soft(standardized),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FusionRule {
    And,
    Or,
    KofN(usize),
    SoftSum(f64),
}

impl fmt::Display for FusionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FusionRule::And => f.write_str("and"),
            FusionRule::Or => f.write_str("or"),
            FusionRule::KofN(k) => write!(f, "kofn:{k}"),
            FusionRule::SoftSum(t) => write!(f, "soft:{t}"),
        }
    }
}

impl FromStr for FusionRule {
    type Err = SenseError;

    /// Accepts `and`, `or`, `kofn:<k>` and `soft:<threshold>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let bad = || SenseError::Usage(format!("unknown fusion rule {s:?}"));
        match s.as_str() {
            "and" => Ok(FusionRule::And),
            "or" => Ok(FusionRule::Or),
            _ => {
                let (head, arg) = s.split_once(':').ok_or_else(bad)?;
                match head {
                    "kofn" => arg.parse().map(FusionRule::KofN).map_err(|_| bad()),
                    "soft" => arg.parse().map(FusionRule::SoftSum).map_err(|_| bad()),
                    _ => Err(bad()),
                }
            }
        }
    }
}

/// Fused decision plus the quantity it was based on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionOutcome {
    pub hypothesis: Hypothesis,
    /// Present votes for hard rules, the standardized sum for soft fusion.
    pub score: f64,
    pub reports: usize,
}

impl FusionOutcome {
    pub fn is_present(&self) -> bool {
        self.hypothesis.is_present()
    }
}

fn hypothesis(present: bool) -> Hypothesis {
    if present {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    }
}

/// Vote-counting core shared by [`fuse_hard`] and the Monte Carlo harness.
pub fn fuse_votes(present: usize, total: usize, rule: FusionRule) -> Result<FusionOutcome> {
    if total == 0 {
        return Err(SenseError::NoReports);
    }
    let k = match rule {
        FusionRule::And => total,
        FusionRule::Or => 1,
        FusionRule::KofN(k) if (1..=total).contains(&k) => k,
        FusionRule::KofN(k) => return Err(SenseError::KOutOfRange { k, n: total }),
        FusionRule::SoftSum(_) => {
            return Err(SenseError::Usage(
                "soft-sum rule needs soft reports; use fuse_soft".into(),
            ))
        }
    };
    Ok(FusionOutcome {
        hypothesis: hypothesis(present >= k),
        score: present as f64,
        reports: total,
    })
}

/// And / Or / k-of-N over hard local decisions.
pub fn fuse_hard(reports: &[LocalReport], rule: FusionRule) -> Result<FusionOutcome> {
    if reports.is_empty() {
        return Err(SenseError::NoReports);
    }
    let mut present = 0;
    for r in reports {
        match &r.kind {
            ReportKind::Hard(d) => present += usize::from(d.is_present()),
            ReportKind::Soft(_) => return Err(SenseError::MixedReports),
        }
    }
    fuse_votes(present, reports.len(), rule)
}

/// Equal-gain combining: present iff the sum of standardized statistics
/// reaches `threshold`.
pub fn fuse_soft(reports: &[LocalReport], threshold: f64) -> Result<FusionOutcome> {
    if reports.is_empty() {
        return Err(SenseError::NoReports);
    }
    let mut sum = 0.0;
    for r in reports {
        match r.kind {
            ReportKind::Soft(v) => sum += v,
            ReportKind::Hard(_) => return Err(SenseError::MixedReports),
        }
    }
    Ok(FusionOutcome {
        hypothesis: hypothesis(sum >= threshold),
        score: sum,
        reports: reports.len(),
    })
}
