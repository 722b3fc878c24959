use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sensekit_cli::config::{read_config_file, RawValues};
use sensekit_cli::{emit, run, CliError, Command, ExperimentConfig};

/// Monte Carlo spectrum-sensing experiments.
#[derive(Debug, Parser)]
#[command(name = "sensekit", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Pd/Pfa/Pmd table for each detector and SNR.
    Sense(ExperimentArgs),
    /// ROC curves for each detector and SNR, with an optional SVG plot.
    Roc(ExperimentArgs),
    /// Analytic and empirical thresholds with validated false-alarm rates.
    Calibrate(ExperimentArgs),
    /// Local and fused metrics for a group of cooperating SUs.
    Fuse(ExperimentArgs),
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Detector(s): energy, autocorr, euclid, wavelet, matched-filter.
    #[arg(long, value_delimiter = ',')]
    detector: Vec<String>,
    /// SNR grid in dB (repeatable or comma-separated).
    #[arg(long = "snr-db", value_delimiter = ',', allow_hyphen_values = true)]
    snr_db: Vec<String>,
    /// Samples per frame.
    #[arg(long)]
    samples: Option<String>,
    /// Monte Carlo trials per hypothesis.
    #[arg(long)]
    trials: Option<String>,
    /// Target false-alarm rate(s).
    #[arg(long, value_delimiter = ',')]
    pfa: Vec<String>,
    #[arg(long)]
    seed: Option<String>,
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
    /// SVG destination for ROC plots.
    #[arg(long)]
    svg: Option<String>,
    /// Per-trial statistics CSV (sense only).
    #[arg(long)]
    stats: Option<String>,
    /// Any config key, as `key=value` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ExperimentArgs {
    fn flag_layer(&self) -> Result<RawValues, CliError> {
        let mut layer = RawValues::new();
        for pair in &self.set {
            let (k, v) = pair.split_once('=').ok_or_else(|| {
                CliError::Config(format!("--set expects key=value, got {pair:?}"))
            })?;
            sensekit_cli::config::check_key(k.trim())?;
            layer.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut put_list = |key: &str, values: &[String]| {
            if !values.is_empty() {
                layer.insert(key.to_string(), values.join(","));
            }
        };
        put_list("detector", &self.detector);
        put_list("snr_db", &self.snr_db);
        put_list("pfa", &self.pfa);
        for (key, value) in [
            ("samples", &self.samples),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("out", &self.out),
            ("svg", &self.svg),
            ("stats", &self.stats),
        ] {
            if let Some(v) = value {
                layer.insert(key.to_string(), v.clone());
            }
        }
        Ok(layer)
    }

    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut layers = Vec::new();
        if let Some(path) = &self.config {
            layers.push(read_config_file(path)?);
        }
        layers.push(self.flag_layer()?);
        ExperimentConfig::resolve(&layers)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Cmd::Sense(a) => (Command::Sense, a),
        Cmd::Roc(a) => (Command::Roc, a),
        Cmd::Calibrate(a) => (Command::Calibrate, a),
        Cmd::Fuse(a) => (Command::Fuse, a),
    };
    let result = args
        .resolve()
        .and_then(|cfg| run(command, &cfg).and_then(|report| emit(&cfg, &report)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
