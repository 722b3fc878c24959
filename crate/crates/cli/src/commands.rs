//! The four experiment commands. Each turns a resolved configuration into
//! an in-memory [`Report`]; writing it out is left to [`emit`].

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use sensekit::detectors::{DetectorId, Polarity, ThresholdSpec};
use sensekit::fusion::FusionRule;
use sensekit::harness::{
    calibrate_soft_fusion, calibration_sample, metrics, roc_from_statistics, run_cooperative,
    threshold_from_h0_sample, validate_pfa, ConfusionCounts, CooperativeSu, Standardizer,
    ThresholdGrid, TrialStatistics,
};
use sensekit::report::{
    write_calibration_csv, write_fusion_csv, write_metrics_csv, write_roc_csv,
    write_statistics_csv, CalibrationRow, FusionRow, MetricsRow, RocRow, StatisticRow,
};
use sensekit::{Detector, Hypothesis, PilotWaveform, PuKind, ScenarioSpec};

use crate::config::{ExperimentConfig, FusionChoice, PuKindChoice, ThresholdMode};
use crate::error::CliError;
use crate::svg::{render_roc_svg, Curve};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sense,
    Roc,
    Calibrate,
    Fuse,
}

/// Everything a command produces before it touches the filesystem.
#[derive(Debug, Default)]
pub struct Report {
    pub csv: Vec<u8>,
    pub summary: String,
    pub svg: Option<String>,
    pub statistics: Option<Vec<u8>>,
}

pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Report, CliError> {
    match command {
        Command::Sense => cmd_sense(cfg),
        Command::Roc => cmd_roc(cfg),
        Command::Calibrate => cmd_calibrate(cfg),
        Command::Fuse => cmd_fuse(cfg),
    }
}

/// Writes the CSV (to `cfg.out` or stdout), the optional SVG and statistics
/// files, and the config echo plus summary. Diagnostics go to stderr when
/// stdout carries CSV.
pub fn emit(cfg: &ExperimentConfig, report: &Report) -> Result<(), CliError> {
    let write_file = |path: &Path, bytes: &[u8]| {
        std::fs::write(path, bytes).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
    };
    if let (Some(path), Some(svg)) = (&cfg.svg, &report.svg) {
        write_file(path, svg.as_bytes())?;
    }
    if let (Some(path), Some(stats)) = (&cfg.stats, &report.statistics) {
        write_file(path, stats)?;
    }
    let text = format!("{}{}", cfg.echo(), report.summary);
    let stdout_err = |source| CliError::Io {
        path: "<stdout>".into(),
        source,
    };
    match &cfg.out {
        Some(path) => {
            write_file(path, &report.csv)?;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(stdout_err)?;
        }
        None => {
            eprint!("{text}");
            std::io::stdout()
                .write_all(&report.csv)
                .map_err(stdout_err)?;
        }
    }
    Ok(())
}

fn pu_kind(cfg: &ExperimentConfig) -> Result<PuKind, CliError> {
    let pilot = || -> Result<PuKind, CliError> {
        Ok(PuKind::PilotWaveform(PilotWaveform::square_wave(
            cfg.pilot_half_period,
            1.0,
        )?))
    };
    match cfg.pu_kind {
        PuKindChoice::Gaussian => Ok(PuKind::GaussianSource),
        PuKindChoice::Pilot => pilot(),
        PuKindChoice::Auto if cfg.detectors.iter().all(|d| *d == DetectorId::Energy) => {
            Ok(PuKind::GaussianSource)
        }
        PuKindChoice::Auto => pilot(),
    }
}

fn scenarios(
    cfg: &ExperimentConfig,
    snr_db: f64,
) -> Result<(ScenarioSpec, ScenarioSpec), CliError> {
    let h0 = ScenarioSpec::new(Hypothesis::H0, cfg.samples)
        .with_noise_variance(cfg.noise_variance)
        .with_domain(cfg.domain)
        .with_pu_kind(pu_kind(cfg)?);
    let h1 = h0
        .clone()
        .with_hypothesis(Hypothesis::H1)
        .with_snr_db(snr_db);
    Ok((h0, h1))
}

/// The detector for one SNR. The matched filter's template carries the
/// expected signal power, so it is rebuilt per SNR.
fn build_detector(
    cfg: &ExperimentConfig,
    id: DetectorId,
    h1: &ScenarioSpec,
) -> Result<Detector, CliError> {
    Ok(match id {
        DetectorId::Energy => Detector::Energy,
        DetectorId::Autocorr => Detector::Autocorr,
        DetectorId::Euclid => Detector::Euclid {
            m_lags: cfg.euclid_lags,
        },
        DetectorId::Wavelet => Detector::Wavelet {
            scales: cfg.wavelet_scales.clone(),
        },
        DetectorId::MatchedFilter => Detector::MatchedFilter {
            pilot: PilotWaveform::square_wave(cfg.pilot_half_period, h1.signal_variance)?,
        },
    })
}

fn polarity(cfg: &ExperimentConfig, id: DetectorId) -> Polarity {
    match id {
        DetectorId::Wavelet => cfg.wavelet_polarity,
        other => other.polarity(),
    }
}

fn analytic(
    cfg: &ExperimentConfig,
    detector: &Detector,
    pfa: f64,
) -> Result<Option<ThresholdSpec>, CliError> {
    detector
        .analytic_threshold(pfa, cfg.samples, cfg.noise_variance)
        .transpose()
        .map_err(CliError::from)
}

/// Threshold for one detector under the configured mode.
fn local_threshold(
    cfg: &ExperimentConfig,
    detector: &Detector,
    h0: &ScenarioSpec,
    h0_sample: Option<&[f64]>,
    pfa: f64,
) -> Result<ThresholdSpec, CliError> {
    if cfg.threshold != ThresholdMode::Empirical {
        if let Some(spec) = analytic(cfg, detector, pfa)? {
            return Ok(spec);
        }
        if cfg.threshold == ThresholdMode::Analytic {
            return Err(CliError::Config(format!(
                "threshold = analytic: {} has no closed-form threshold",
                detector.id()
            )));
        }
    }
    let owned;
    let sample = match h0_sample {
        Some(s) => s,
        None => {
            owned = calibration_sample(detector, h0, cfg.cal_trials, cfg.seed)?;
            &owned
        }
    };
    let cal = threshold_from_h0_sample(sample, polarity(cfg, detector.id()), pfa)?;
    if cal.degenerate {
        log::warn!("{}: calibration sample is constant", detector.id());
    }
    Ok(cal.threshold)
}

fn metrics_row(
    cfg: &ExperimentConfig,
    detector: &str,
    snr_db: f64,
    threshold: f64,
    counts: &ConfusionCounts,
) -> Result<MetricsRow, CliError> {
    let m = metrics(counts)?;
    Ok(MetricsRow {
        detector: detector.to_string(),
        snr_db,
        n_samples: cfg.samples,
        threshold,
        pd: m.pd,
        pfa: m.pfa,
        pmd: m.pmd,
        trials: cfg.trials,
        seed: cfg.seed,
    })
}

fn summary_table(header: &str, lines: impl IntoIterator<Item = String>) -> String {
    let mut s = format!("{header}\n");
    for line in lines {
        let _ = writeln!(s, "{line}");
    }
    s
}

fn cmd_sense(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let mut rows = Vec::new();
    let mut stat_rows = Vec::new();
    for &id in &cfg.detectors {
        for &snr_db in &cfg.snr_db {
            let (h0, h1) = scenarios(cfg, snr_db)?;
            let detector = build_detector(cfg, id, &h1)?;
            let stats = TrialStatistics::simulate(&h0, &h1, &detector, cfg.trials, cfg.seed)?;
            for &pfa in &cfg.pfa {
                let threshold = local_threshold(cfg, &detector, &h0, None, pfa)?;
                let counts = stats.counts_at(&threshold);
                let row_index = rows.len();
                rows.push(metrics_row(
                    cfg,
                    id.name(),
                    snr_db,
                    threshold.lambda,
                    &counts,
                )?);
                if cfg.stats.is_some() {
                    for (tag, sample) in [("h0", &stats.h0), ("h1", &stats.h1)] {
                        stat_rows.extend(sample.iter().enumerate().map(|(i, &t)| StatisticRow {
                            trial_id: format!("r{row_index}-{tag}-{i}"),
                            detector: id.name().to_string(),
                            statistic: t,
                            present: threshold.declares_present(t),
                        }));
                    }
                }
            }
        }
    }
    let mut csv = Vec::new();
    write_metrics_csv(&mut csv, &rows)?;
    let statistics = if cfg.stats.is_some() {
        let mut buf = Vec::new();
        write_statistics_csv(&mut buf, &stat_rows)?;
        Some(buf)
    } else {
        None
    };
    let summary = summary_table(
        &format!(
            "{:<15} {:>8} {:>12} {:>8} {:>8} {:>8}",
            "detector", "snr_db", "threshold", "pd", "pfa", "pmd"
        ),
        rows.iter().map(|r| {
            format!(
                "{:<15} {:>8.2} {:>12.5} {:>8.4} {:>8.4} {:>8.4}",
                r.detector, r.snr_db, r.threshold, r.pd, r.pfa, r.pmd
            )
        }),
    );
    Ok(Report {
        csv,
        summary,
        svg: None,
        statistics,
    })
}

fn cmd_roc(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let grid = ThresholdGrid::Auto {
        sentinels: cfg.roc_sentinels,
    };
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    let mut summary = Vec::new();
    for &id in &cfg.detectors {
        for &snr_db in &cfg.snr_db {
            let (h0, h1) = scenarios(cfg, snr_db)?;
            let detector = build_detector(cfg, id, &h1)?;
            let stats = TrialStatistics::simulate(&h0, &h1, &detector, cfg.trials, cfg.seed)?;
            let curve = roc_from_statistics(&stats, &grid.resolve(&stats), polarity(cfg, id))?;
            rows.extend(curve.points.iter().map(|p| RocRow {
                detector: id.name().to_string(),
                snr_db,
                threshold: p.threshold,
                pfa: p.pfa,
                pd: p.pd,
            }));
            summary.push(format!(
                "{:<15} {:>8.2} {:>8.4}",
                id.name(),
                snr_db,
                curve.area()
            ));
            curves.push(Curve {
                label: format!("{} @ {} dB", id.name(), snr_db),
                points: curve.points.iter().map(|p| (p.pfa, p.pd)).collect(),
            });
        }
    }
    let mut csv = Vec::new();
    write_roc_csv(&mut csv, &rows)?;
    Ok(Report {
        csv,
        summary: summary_table(
            &format!("{:<15} {:>8} {:>8}", "detector", "snr_db", "auc"),
            summary,
        ),
        svg: cfg.svg.as_ref().map(|_| render_roc_svg(&curves)),
        statistics: None,
    })
}

fn cmd_calibrate(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    // Calibration only looks at H0; the SNR matters solely for the matched
    // filter's template energy.
    let snr_db = cfg.snr_db[0];
    let (h0, h1) = scenarios(cfg, snr_db)?;
    let mut rows = Vec::new();
    for &id in &cfg.detectors {
        let detector = build_detector(cfg, id, &h1)?;
        let sample = calibration_sample(&detector, &h0, cfg.cal_trials, cfg.seed)?;
        for &pfa in &cfg.pfa {
            let analytic_threshold = analytic(cfg, &detector, pfa)?.map(|t| t.lambda);
            let cal = threshold_from_h0_sample(&sample, polarity(cfg, id), pfa)?;
            if cal.degenerate {
                log::warn!("{id}: calibration sample is constant");
            }
            let validation_pfa =
                validate_pfa(&detector, &h0, &cal.threshold, cfg.trials, cfg.seed)?;
            rows.push(CalibrationRow {
                detector: id.name().to_string(),
                pfa_target: pfa,
                n_samples: cfg.samples,
                analytic_threshold,
                empirical_threshold: cal.threshold.lambda,
                validation_pfa,
                cal_trials: cfg.cal_trials,
                seed: cfg.seed,
            });
        }
    }
    let mut csv = Vec::new();
    write_calibration_csv(&mut csv, &rows)?;
    let fmt_opt = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.5}"));
    let summary = summary_table(
        &format!(
            "{:<15} {:>6} {:>12} {:>12} {:>10} {:>10}",
            "detector", "pfa", "analytic", "empirical", "gap", "valid_pfa"
        ),
        rows.iter().map(|r| {
            format!(
                "{:<15} {:>6} {:>12} {:>12.5} {:>10} {:>10.4}",
                r.detector,
                r.pfa_target,
                fmt_opt(r.analytic_threshold),
                r.empirical_threshold,
                fmt_opt(r.relative_gap()),
                r.validation_pfa
            )
        }),
    );
    Ok(Report {
        csv,
        summary,
        svg: None,
        statistics: None,
    })
}

fn cmd_fuse(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let pfa = cfg.pfa[0];
    let su_snrs = cfg.su_snrs();
    let homogeneous = su_snrs.windows(2).all(|w| w[0] == w[1]);
    let mut rows = Vec::new();
    for &id in &cfg.detectors {
        let mut sus = Vec::with_capacity(su_snrs.len());
        for &snr_db in &su_snrs {
            let (h0, h1) = scenarios(cfg, snr_db)?;
            let detector = build_detector(cfg, id, &h1)?;
            let sample = calibration_sample(&detector, &h0, cfg.cal_trials, cfg.seed)?;
            let threshold = local_threshold(cfg, &detector, &h0, Some(&sample), pfa)?;
            let standardizer = Standardizer::from_h0_sample(&sample, polarity(cfg, id))?;
            sus.push(CooperativeSu {
                h0,
                h1,
                detector,
                threshold,
                standardizer,
            });
        }
        let k = sus.len();
        let (rule, fused_threshold) = match cfg.fusion_rule {
            FusionChoice::And => (FusionRule::And, k as f64),
            FusionChoice::Or => (FusionRule::Or, 1.0),
            FusionChoice::KofN(m) => (FusionRule::KofN(m), m as f64),
            FusionChoice::Soft => {
                let cal = calibrate_soft_fusion(&sus, pfa, cfg.cal_trials, cfg.seed)?;
                (
                    FusionRule::SoftSum(cal.threshold.lambda),
                    cal.threshold.lambda,
                )
            }
        };
        let counts = run_cooperative(&sus, rule, cfg.trials, cfg.seed)?;
        let rule_name = rule.to_string();
        for (i, (su, c)) in sus.iter().zip(&counts.per_su).enumerate() {
            rows.push(FusionRow {
                su_id: format!("su{i}"),
                rule: rule_name.clone(),
                metrics: metrics_row(cfg, id.name(), su_snrs[i], su.threshold.lambda, c)?,
            });
        }
        let fused_snr = if homogeneous { su_snrs[0] } else { f64::NAN };
        rows.push(FusionRow {
            su_id: "fusion".into(),
            rule: rule_name,
            metrics: metrics_row(cfg, id.name(), fused_snr, fused_threshold, &counts.fused)?,
        });
    }
    let mut csv = Vec::new();
    write_fusion_csv(&mut csv, &rows)?;
    let summary = summary_table(
        &format!(
            "{:<8} {:<15} {:>8} {:>8} {:>8}",
            "su", "detector", "pd", "pfa", "pmd"
        ),
        rows.iter().map(|r| {
            format!(
                "{:<8} {:<15} {:>8.4} {:>8.4} {:>8.4}",
                r.su_id, r.metrics.detector, r.metrics.pd, r.metrics.pfa, r.metrics.pmd
            )
        }),
    );
    Ok(Report {
        csv,
        summary,
        svg: None,
        statistics: None,
    })
}
