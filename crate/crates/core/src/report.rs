//! Fixed-schema CSV tables.
//!
//! Column order never changes and floating-point fields are printed with six
//! significant digits (C `%g` style), so identical runs produce byte-identical
//! files.

use std::io::Write;

use crate::error::Result;

pub const METRICS_HEADER: [&str; 9] = [
    "detector",
    "snr_db",
    "n_samples",
    "threshold",
    "pd",
    "pfa",
    "pmd",
    "trials",
    "seed",
];
pub const ROC_HEADER: [&str; 5] = ["detector", "snr_db", "threshold", "pfa", "pd"];
pub const STATISTIC_HEADER: [&str; 4] = ["trial_id", "detector", "statistic", "decision"];
pub const CALIBRATION_HEADER: [&str; 9] = [
    "detector",
    "pfa_target",
    "n_samples",
    "analytic_threshold",
    "empirical_threshold",
    "relative_gap",
    "validation_pfa",
    "cal_trials",
    "seed",
];
pub const FUSION_HEADER: [&str; 11] = [
    "su_id",
    "rule",
    "detector",
    "snr_db",
    "n_samples",
    "threshold",
    "pd",
    "pfa",
    "pmd",
    "trials",
    "seed",
];

/// Formats `x` like C's `%.6g`.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 6;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    // exponent after rounding to six significant digits
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub detector: String,
    pub snr_db: f64,
    pub n_samples: usize,
    pub threshold: f64,
    pub pd: f64,
    pub pfa: f64,
    pub pmd: f64,
    pub trials: usize,
    pub seed: u64,
}

impl MetricsRow {
    fn fields(&self) -> Vec<String> {
        vec![
            self.detector.clone(),
            format_sig(self.snr_db),
            self.n_samples.to_string(),
            format_sig(self.threshold),
            format_sig(self.pd),
            format_sig(self.pfa),
            format_sig(self.pmd),
            self.trials.to_string(),
            self.seed.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocRow {
    pub detector: String,
    pub snr_db: f64,
    pub threshold: f64,
    pub pfa: f64,
    pub pd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatisticRow {
    pub trial_id: String,
    pub detector: String,
    pub statistic: f64,
    pub present: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRow {
    pub detector: String,
    pub pfa_target: f64,
    pub n_samples: usize,
    /// `None` where no closed-form threshold exists.
    pub analytic_threshold: Option<f64>,
    pub empirical_threshold: f64,
    pub validation_pfa: f64,
    pub cal_trials: usize,
    pub seed: u64,
}

impl CalibrationRow {
    /// `(empirical − analytic) / analytic`.
    pub fn relative_gap(&self) -> Option<f64> {
        self.analytic_threshold
            .map(|a| (self.empirical_threshold - a) / a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionRow {
    pub su_id: String,
    pub rule: String,
    pub metrics: MetricsRow,
}

fn write_table<W, I>(writer: W, header: &[&str], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_metrics_csv<W: Write>(writer: W, rows: &[MetricsRow]) -> Result<()> {
    write_table(writer, &METRICS_HEADER, rows.iter().map(MetricsRow::fields))
}

pub fn write_roc_csv<W: Write>(writer: W, rows: &[RocRow]) -> Result<()> {
    write_table(
        writer,
        &ROC_HEADER,
        rows.iter().map(|r| {
            vec![
                r.detector.clone(),
                format_sig(r.snr_db),
                format_sig(r.threshold),
                format_sig(r.pfa),
                format_sig(r.pd),
            ]
        }),
    )
}

pub fn write_statistics_csv<W: Write>(writer: W, rows: &[StatisticRow]) -> Result<()> {
    write_table(
        writer,
        &STATISTIC_HEADER,
        rows.iter().map(|r| {
            vec![
                r.trial_id.clone(),
                r.detector.clone(),
                format_sig(r.statistic),
                if r.present { "present" } else { "absent" }.to_string(),
            ]
        }),
    )
}

pub fn write_calibration_csv<W: Write>(writer: W, rows: &[CalibrationRow]) -> Result<()> {
    let na = || "n/a".to_string();
    write_table(
        writer,
        &CALIBRATION_HEADER,
        rows.iter().map(|r| {
            vec![
                r.detector.clone(),
                format_sig(r.pfa_target),
                r.n_samples.to_string(),
                r.analytic_threshold.map_or_else(na, format_sig),
                format_sig(r.empirical_threshold),
                r.relative_gap().map_or_else(na, format_sig),
                format_sig(r.validation_pfa),
                r.cal_trials.to_string(),
                r.seed.to_string(),
            ]
        }),
    )
}

pub fn write_fusion_csv<W: Write>(writer: W, rows: &[FusionRow]) -> Result<()> {
    write_table(
        writer,
        &FUSION_HEADER,
        rows.iter().map(|r| {
            let mut fields = vec![r.su_id.clone(), r.rule.clone()];
            fields.extend(r.metrics.fields());
            fields
        }),
    )
}
