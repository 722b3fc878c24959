use super::{DetectorId, TestStatistic};
use crate::error::{Result, SenseError};
use crate::signal_model::SignalFrame;
use crate::stats::autocorrelation;

/// Reference line `R(t) = (2/M)·t + 1` for `t = 0..=M/2`.
pub fn reference_line(m_lags: usize) -> Vec<f64> {
    let m = m_lags as f64;
    (0..=m_lags / 2).map(|t| 2.0 / m * t as f64 + 1.0).collect()
}

fn check_lags(m_lags: usize) -> Result<()> {
    if m_lags == 0 || !m_lags.is_multiple_of(2) {
        return Err(SenseError::param(
            "lag count M",
            "even and positive",
            m_lags as f64,
        ));
    }
    Ok(())
}

/// Euclidean distance between normalized autocorrelation magnitudes at lags
/// `0..=M/2` and the reference line.
pub fn euclid_distance(magnitudes: &[f64], m_lags: usize) -> Result<f64> {
    check_lags(m_lags)?;
    if magnitudes.len() != m_lags / 2 + 1 {
        return Err(SenseError::LengthMismatch {
            left: magnitudes.len(),
            right: m_lags / 2 + 1,
        });
    }
    Ok(magnitudes
        .iter()
        .zip(reference_line(m_lags))
        .map(|(r, line)| (r - line).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// Distance `D` of the frame's normalized autocorrelation from the reference
/// line. Large distances indicate noise.
pub fn euclid_statistic(frame: &SignalFrame, m_lags: usize) -> Result<TestStatistic> {
    check_lags(m_lags)?;
    let r = autocorrelation(frame, m_lags / 2, true)?;
    Ok(TestStatistic {
        value: euclid_distance(&r.magnitudes(), m_lags)?,
        detector: DetectorId::Euclid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_model::{received_frame, Hypothesis, PilotWaveform, PuKind, ScenarioSpec};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn flat_unit_autocorrelation() {
        // lags 0..=4, line 1, 1.25, 1.5, 1.75, 2: squared gaps sum to 1.875
        let d = euclid_distance(&[1.0; 5], 8).unwrap();
        assert_abs_diff_eq!(d, 1.875f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(d, 1.3693, epsilon = 1e-4);
    }

    #[test]
    fn sequence_on_the_line_has_zero_distance() {
        assert_eq!(euclid_distance(&reference_line(16), 16).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_lag_counts() {
        let frame = SignalFrame::from_real(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(euclid_statistic(&frame, 3).is_err());
        assert!(euclid_statistic(&frame, 0).is_err());
        assert!(euclid_statistic(&frame, 8).is_err()); // M/2 = 4 lags needs 5 samples
        assert!(euclid_statistic(&frame, 6).is_ok());
        assert!(euclid_statistic(&SignalFrame::zeros(8).unwrap(), 4).is_err());
    }

    #[test]
    fn noise_sits_farther_from_the_line_than_signal() {
        let frames = 1_000u64;
        let pilot = PuKind::PilotWaveform(PilotWaveform::default());
        let mean = |hyp: Hypothesis| {
            (0..frames)
                .map(|seed| {
                    let spec = ScenarioSpec::new(hyp, 10_000)
                        .with_pu_kind(pilot.clone())
                        .with_snr_db(5.0)
                        .with_seed(seed);
                    euclid_statistic(&received_frame(&spec).unwrap(), 32)
                        .unwrap()
                        .value
                })
                .sum::<f64>()
                / frames as f64
        };
        let (noise, signal) = (mean(Hypothesis::H0), mean(Hypothesis::H1));
        assert!(noise > signal, "noise {noise} vs signal {signal}");
    }

    proptest! {
        #[test]
        fn amplitude_invariant(seed in any::<u64>(), k in -10i32..10) {
            let spec = ScenarioSpec::new(Hypothesis::H0, 128).with_seed(seed);
            let frame = received_frame(&spec).unwrap();
            let scaled = frame.scaled(2f64.powi(k).into()).unwrap();
            prop_assert_eq!(
                euclid_statistic(&frame, 16).unwrap().value,
                euclid_statistic(&scaled, 16).unwrap().value
            );
        }
    }
}
