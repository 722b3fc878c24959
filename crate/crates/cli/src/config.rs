//! Experiment configuration: defaults, `key = value` config files and
//! command-line overrides merged into one resolved [`ExperimentConfig`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sensekit::detectors::DetectorId;
use sensekit::fusion::FusionRule;
use sensekit::{Polarity, SampleDomain};

use crate::error::CliError;

/// Every recognised key with its default value.
pub const DEFAULTS: &[(&str, &str)] = &[
    ("detector", "energy"),
    ("snr_db", "-10,-5,0"),
    ("samples", "1000"),
    ("noise_variance", "1"),
    ("pu_kind", "auto"),
    ("domain", "real"),
    ("trials", "10000"),
    ("cal_trials", "10000"),
    ("pfa", "0.1"),
    ("threshold", "auto"),
    ("euclid_lags", "32"),
    ("wavelet_scales", "1,2,4,8"),
    ("wavelet_polarity", "above-absent"),
    ("pilot_half_period", "8"),
    ("sus", "3"),
    ("su_snr_db", ""),
    ("fusion_rule", "or"),
    ("roc_sentinels", "true"),
    ("seed", "1"),
    ("out", ""),
    ("svg", ""),
    ("stats", ""),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PuKindChoice {
    /// Pilot whenever a selected detector needs a structured signal,
    /// Gaussian when only the energy detector runs.
    Auto,
    Gaussian,
    Pilot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// Closed form where one exists, empirical calibration otherwise.
    Auto,
    Analytic,
    Empirical,
}

/// Fusion rule as configured; the soft-sum threshold is calibrated at run
/// time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionChoice {
    And,
    Or,
    KofN(usize),
    Soft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub detectors: Vec<DetectorId>,
    pub snr_db: Vec<f64>,
    pub samples: usize,
    pub noise_variance: f64,
    pub pu_kind: PuKindChoice,
    pub domain: SampleDomain,
    pub trials: usize,
    pub cal_trials: usize,
    pub pfa: Vec<f64>,
    pub threshold: ThresholdMode,
    pub euclid_lags: usize,
    pub wavelet_scales: Vec<f64>,
    pub wavelet_polarity: Polarity,
    pub pilot_half_period: usize,
    pub sus: usize,
    pub su_snr_db: Vec<f64>,
    pub fusion_rule: FusionChoice,
    pub roc_sentinels: bool,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub stats: Option<PathBuf>,
    /// Resolved `key = value` pairs, for echoing.
    resolved: BTreeMap<String, String>,
}

/// Raw values collected from one source, keyed by config key.
pub type RawValues = BTreeMap<String, String>;

/// Parses a config file body: UTF-8 `key = value` lines, `#` comments, blank
/// lines ignored.
pub fn parse_config_text(text: &str) -> Result<RawValues, CliError> {
    let mut values = RawValues::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "line {}: expected `key = value`",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        check_key(&key)?;
        if values
            .insert(key.clone(), value.trim().to_string())
            .is_some()
        {
            return Err(CliError::Config(format!(
                "line {}: duplicate key {key:?}",
                lineno + 1
            )));
        }
    }
    Ok(values)
}

pub fn read_config_file(path: &Path) -> Result<RawValues, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_text(&text)
}

pub fn check_key(key: &str) -> Result<(), CliError> {
    if DEFAULTS.iter().any(|(k, _)| *k == key) {
        Ok(())
    } else {
        Err(CliError::Config(format!("unknown config key {key:?}")))
    }
}

fn list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| CliError::Config(format!("{key}: cannot parse {s:?}: {e}")))
        })
        .collect()
}

fn scalar<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    raw.trim()
        .parse::<T>()
        .map_err(|e| CliError::Config(format!("{key}: cannot parse {raw:?}: {e}")))
}

fn path(raw: &str) -> Option<PathBuf> {
    let raw = raw.trim();
    (!raw.is_empty()).then(|| PathBuf::from(raw))
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    /// Merges `layers` over the defaults; later layers win.
    pub fn resolve(layers: &[RawValues]) -> Result<Self, CliError> {
        let mut merged: BTreeMap<String, String> = DEFAULTS
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        for layer in layers {
            for (k, v) in layer {
                check_key(k)?;
                merged.insert(k.clone(), v.clone());
            }
        }
        let get = |k: &str| merged[k].as_str();

        let pu_kind = match get("pu_kind").trim().to_ascii_lowercase().as_str() {
            "auto" => PuKindChoice::Auto,
            "gaussian" => PuKindChoice::Gaussian,
            "pilot" => PuKindChoice::Pilot,
            other => return Err(config_err(format!("pu_kind: unknown value {other:?}"))),
        };
        let threshold = match get("threshold").trim().to_ascii_lowercase().as_str() {
            "auto" => ThresholdMode::Auto,
            "analytic" => ThresholdMode::Analytic,
            "empirical" => ThresholdMode::Empirical,
            other => return Err(config_err(format!("threshold: unknown value {other:?}"))),
        };
        let fusion_rule = match get("fusion_rule").trim().to_ascii_lowercase().as_str() {
            "soft" => FusionChoice::Soft,
            other => match other.parse::<FusionRule>() {
                Ok(FusionRule::And) => FusionChoice::And,
                Ok(FusionRule::Or) => FusionChoice::Or,
                Ok(FusionRule::KofN(k)) => FusionChoice::KofN(k),
                _ => return Err(config_err(format!("fusion_rule: unknown value {other:?}"))),
            },
        };

        let cfg = Self {
            detectors: list("detector", get("detector"))?,
            snr_db: list("snr_db", get("snr_db"))?,
            samples: scalar("samples", get("samples"))?,
            noise_variance: scalar("noise_variance", get("noise_variance"))?,
            pu_kind,
            domain: scalar("domain", get("domain"))?,
            trials: scalar("trials", get("trials"))?,
            cal_trials: scalar("cal_trials", get("cal_trials"))?,
            pfa: list("pfa", get("pfa"))?,
            threshold,
            euclid_lags: scalar("euclid_lags", get("euclid_lags"))?,
            wavelet_scales: list("wavelet_scales", get("wavelet_scales"))?,
            wavelet_polarity: scalar("wavelet_polarity", get("wavelet_polarity"))?,
            pilot_half_period: scalar("pilot_half_period", get("pilot_half_period"))?,
            sus: scalar("sus", get("sus"))?,
            su_snr_db: list("su_snr_db", get("su_snr_db"))?,
            fusion_rule,
            roc_sentinels: scalar("roc_sentinels", get("roc_sentinels"))?,
            seed: scalar("seed", get("seed"))?,
            out: path(get("out")),
            svg: path(get("svg")),
            stats: path(get("stats")),
            resolved: merged.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.detectors.is_empty() {
            return Err(config_err("detector: at least one detector is required"));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(config_err("snr_db: need at least one finite value"));
        }
        if self.samples == 0 {
            return Err(config_err("samples must be >= 1"));
        }
        if !(self.noise_variance > 0.0) || !self.noise_variance.is_finite() {
            return Err(config_err("noise_variance must be finite and positive"));
        }
        if self.trials == 0 {
            return Err(config_err("trials must be >= 1"));
        }
        if self.cal_trials < 100 {
            return Err(config_err("cal_trials must be >= 100"));
        }
        if self.pfa.is_empty() {
            return Err(config_err("pfa: at least one target is required"));
        }
        if let Some(p) = self.pfa.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(config_err(format!("pfa {p} is outside (0, 1)")));
        }
        if self.euclid_lags == 0 || !self.euclid_lags.is_multiple_of(2) {
            return Err(config_err("euclid_lags must be even and positive"));
        }
        if self.wavelet_scales.is_empty()
            || self
                .wavelet_scales
                .iter()
                .any(|s| !(*s > 0.0) || !s.is_finite())
        {
            return Err(config_err("wavelet_scales must be positive"));
        }
        if self.pilot_half_period == 0 {
            return Err(config_err("pilot_half_period must be >= 1"));
        }
        for d in &self.detectors {
            let min = match d {
                DetectorId::Energy | DetectorId::MatchedFilter => 1,
                DetectorId::Autocorr => 2,
                DetectorId::Euclid => self.euclid_lags / 2 + 1,
                DetectorId::Wavelet => 8,
            };
            if self.samples < min {
                return Err(config_err(format!("{d} needs at least {min} samples")));
            }
        }
        if self.sus == 0 {
            return Err(config_err("sus must be >= 1"));
        }
        if !(self.su_snr_db.is_empty()
            || self.su_snr_db.len() == 1
            || self.su_snr_db.len() == self.sus)
        {
            return Err(config_err(format!(
                "su_snr_db lists {} values for {} SUs",
                self.su_snr_db.len(),
                self.sus
            )));
        }
        if let FusionChoice::KofN(k) = self.fusion_rule {
            if !(1..=self.sus).contains(&k) {
                return Err(config_err(format!(
                    "fusion_rule kofn:{k} needs 1 <= k <= sus ({})",
                    self.sus
                )));
            }
        }
        Ok(())
    }

    /// `# key = value` lines for every resolved setting.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.resolved {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s
    }

    /// Per-SU SNRs for cooperative runs.
    pub fn su_snrs(&self) -> Vec<f64> {
        match self.su_snr_db.len() {
            0 => vec![self.snr_db[0]; self.sus],
            1 => vec![self.su_snr_db[0]; self.sus],
            _ => self.su_snr_db.clone(),
        }
    }
}
