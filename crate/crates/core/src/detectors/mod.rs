//! Test statistics, decision rule, and closed-form thresholds.

mod autocorr;
mod energy;
mod euclid;
mod matched;
mod wavelet;

use std::fmt;
use std::str::FromStr;

pub use autocorr::{autocorr_statistic, autocorr_threshold};
pub use energy::{
    energy_analytic_performance, energy_analytic_performance_snr, energy_statistic,
    energy_threshold,
};
pub use euclid::{euclid_distance, euclid_statistic, reference_line};
pub use matched::{matched_filter_statistic, mf_analytic_performance, mf_threshold};
pub use wavelet::{
    dog_kernel, wavelet_edge_of_spectrum, wavelet_edge_statistic, wavelet_occupied_bands,
    wavelet_transform, BandReport, OccupiedBand, DEFAULT_SCALES,
};

use crate::error::{Result, SenseError};
use crate::signal_model::{Hypothesis, PilotWaveform, SignalFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorId {
    Energy,
    Autocorr,
    Euclid,
    Wavelet,
    MatchedFilter,
}

impl DetectorId {
    pub const ALL: [DetectorId; 5] = [
        DetectorId::Energy,
        DetectorId::Autocorr,
        DetectorId::Euclid,
        DetectorId::Wavelet,
        DetectorId::MatchedFilter,
    ];

    /// Which side of λ declares the PU present.
    pub fn polarity(self) -> Polarity {
        match self {
            DetectorId::Energy | DetectorId::Autocorr | DetectorId::MatchedFilter => {
                Polarity::AboveMeansPresent
            }
            DetectorId::Euclid | DetectorId::Wavelet => Polarity::AboveMeansAbsent,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DetectorId::Energy => "energy",
            DetectorId::Autocorr => "autocorr",
            DetectorId::Euclid => "euclid",
            DetectorId::Wavelet => "wavelet",
            DetectorId::MatchedFilter => "matched-filter",
        }
    }
}

impl fmt::Display for DetectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorId {
    type Err = SenseError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "energy" | "ed" => Ok(DetectorId::Energy),
            "autocorr" | "autocorrelation" => Ok(DetectorId::Autocorr),
            "euclid" | "euclidean" => Ok(DetectorId::Euclid),
            "wavelet" => Ok(DetectorId::Wavelet),
            "matched-filter" | "matched_filter" | "mf" => Ok(DetectorId::MatchedFilter),
            other => Err(SenseError::Usage(format!("unknown detector {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestStatistic {
    pub value: f64,
    pub detector: DetectorId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    /// `T ≥ λ` → present.
    AboveMeansPresent,
    /// `T ≥ λ` → absent.
    AboveMeansAbsent,
}

impl Polarity {
    #[inline]
    pub fn declares_present(self, value: f64, lambda: f64) -> bool {
        match self {
            Polarity::AboveMeansPresent => value >= lambda,
            Polarity::AboveMeansAbsent => !(value >= lambda),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::AboveMeansPresent => Polarity::AboveMeansAbsent,
            Polarity::AboveMeansAbsent => Polarity::AboveMeansPresent,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::AboveMeansPresent => "above-present",
            Polarity::AboveMeansAbsent => "above-absent",
        })
    }
}

impl FromStr for Polarity {
    type Err = SenseError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "above-present" => Ok(Polarity::AboveMeansPresent),
            "above-absent" => Ok(Polarity::AboveMeansAbsent),
            other => Err(SenseError::Usage(format!(
                "unknown polarity {other:?} (expected above-present or above-absent)"
            ))),
        }
    }
}

/// Comparison value λ together with the side that declares presence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    pub lambda: f64,
    pub polarity: Polarity,
    /// λ / δ_w², when the threshold scales with the noise power.
    pub normalized_lambda: Option<f64>,
}

impl ThresholdSpec {
    pub fn new(lambda: f64, polarity: Polarity) -> Self {
        Self {
            lambda,
            polarity,
            normalized_lambda: None,
        }
    }

    pub fn for_detector(detector: DetectorId, lambda: f64) -> Self {
        Self::new(lambda, detector.polarity())
    }

    #[inline]
    pub fn declares_present(&self, value: f64) -> bool {
        self.polarity.declares_present(value, self.lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub hypothesis: Hypothesis,
    pub statistic: TestStatistic,
    pub threshold: ThresholdSpec,
}

impl Decision {
    pub fn is_present(&self) -> bool {
        self.hypothesis.is_present()
    }
}

/// Compares a statistic with its threshold. Ties (`T = λ`) take the `≥`
/// branch of the detector's rule.
pub fn decide(statistic: TestStatistic, threshold: &ThresholdSpec) -> Decision {
    let hypothesis = if threshold.declares_present(statistic.value) {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    };
    Decision {
        hypothesis,
        statistic,
        threshold: *threshold,
    }
}

/// Detection and false-alarm probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Performance {
    pub pd: f64,
    pub pfa: f64,
}

/// A configured detector: which statistic to compute and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Detector {
    Energy,
    Autocorr,
    Euclid {
        m_lags: usize,
    },
    Wavelet {
        scales: Vec<f64>,
    },
    /// `pilot` carries the expected per-sample power; it is expanded to the
    /// frame length when the statistic is evaluated.
    MatchedFilter {
        pilot: PilotWaveform,
    },
}

impl Detector {
    pub fn id(&self) -> DetectorId {
        match self {
            Detector::Energy => DetectorId::Energy,
            Detector::Autocorr => DetectorId::Autocorr,
            Detector::Euclid { .. } => DetectorId::Euclid,
            Detector::Wavelet { .. } => DetectorId::Wavelet,
            Detector::MatchedFilter { .. } => DetectorId::MatchedFilter,
        }
    }

    pub fn polarity(&self) -> Polarity {
        self.id().polarity()
    }

    pub fn statistic(&self, frame: &SignalFrame) -> Result<TestStatistic> {
        match self {
            Detector::Energy => Ok(energy_statistic(frame)),
            Detector::Autocorr => autocorr_statistic(frame),
            Detector::Euclid { m_lags } => euclid_statistic(frame, *m_lags),
            Detector::Wavelet { scales } => wavelet_edge_statistic(frame, scales),
            Detector::MatchedFilter { pilot } => {
                matched_filter_statistic(frame, &pilot.template(frame.len())?)
            }
        }
    }

    /// Closed-form threshold for a target false-alarm rate, where one exists
    /// (energy and matched filter).
    pub fn analytic_threshold(
        &self,
        pfa_target: f64,
        n_samples: usize,
        noise_variance: f64,
    ) -> Option<Result<ThresholdSpec>> {
        match self {
            Detector::Energy => Some(energy_threshold(pfa_target, n_samples, noise_variance)),
            Detector::MatchedFilter { pilot } => Some(
                pilot
                    .energy(n_samples)
                    .and_then(|e| mf_threshold(pfa_target, e, noise_variance)),
            ),
            _ => None,
        }
    }
}
