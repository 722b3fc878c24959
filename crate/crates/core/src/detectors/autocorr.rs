use super::{DetectorId, Polarity, TestStatistic, ThresholdSpec};
use crate::error::{Result, SenseError};
use crate::signal_model::SignalFrame;
use crate::stats::autocorrelation;

#[cfg(test)]
pub(super) fn lag_zero(frame: &SignalFrame) -> f64 {
    autocorrelation(frame, 0, false).unwrap().values()[0].re
}

/// `|R(1)| / R(0)`: close to 1 for a correlated PU signal, close to 0 for
/// white noise.
pub fn autocorr_statistic(frame: &SignalFrame) -> Result<TestStatistic> {
    if frame.len() < 2 {
        return Err(SenseError::param(
            "frame length",
            ">= 2",
            frame.len() as f64,
        ));
    }
    let r = autocorrelation(frame, 1, true)?;
    Ok(TestStatistic {
        value: r.values()[1].norm(),
        detector: DetectorId::Autocorr,
    })
}

/// Present when lag 1 is within `margin` (a fraction of lag 0) of lag 0,
/// i.e. when `|R(1)|/R(0) ≥ 1 − margin`.
pub fn autocorr_threshold(margin: f64) -> Result<ThresholdSpec> {
    if !(0.0..=1.0).contains(&margin) {
        return Err(SenseError::param(
            "autocorrelation margin",
            "in [0, 1]",
            margin,
        ));
    }
    Ok(ThresholdSpec::new(
        1.0 - margin,
        Polarity::AboveMeansPresent,
    ))
}
