//! Spectrum sensing toolkit for cognitive radio.
//!
//! The crate models the binary sensing problem
//!
//! ```text
//! H0: y(n) = w(n)
//! H1: y(n) = h * s(n) + w(n),   n = 1..N
//! ```
//!
//! and provides five detectors (energy, lag-one autocorrelation, Euclidean
//! distance to a reference line, wavelet spectral edge, matched filter),
//! closed-form and empirical thresholds, cooperative fusion rules, and a
//! Monte Carlo harness that estimates Pd / Pfa / Pmd and ROC curves.
//!
//! Randomness is fully seeded: every trial frame is derived from a scenario
//! seed and a trial index, so experiments are bit-reproducible and
//! independent of execution order.

// `!(x > 0.0)` deliberately rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detectors;
pub mod error;
pub mod fusion;
pub mod harness;
pub mod report;
pub mod signal_model;
pub mod stats;

pub use detectors::{
    decide, Decision, Detector, DetectorId, Performance, Polarity, TestStatistic, ThresholdSpec,
};
pub use error::{Result, SenseError};
pub use fusion::{fuse_hard, fuse_soft, FusionOutcome, FusionRule, LocalReport, ReportKind};
pub use harness::{ConfusionCounts, RocCurve, RocPoint, SensingMetrics};
pub use signal_model::{
    ChannelParams, Hypothesis, PilotWaveform, PuKind, SampleDomain, ScenarioSpec, SignalFrame,
};
