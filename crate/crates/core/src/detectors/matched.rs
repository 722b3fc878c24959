use super::{DetectorId, Performance, Polarity, TestStatistic, ThresholdSpec};
use crate::error::{Result, SenseError};
use crate::signal_model::SignalFrame;
use crate::stats::{q_function, q_inverse};

/// `T = Re Σ y(n)·x_p*(n)`, the projection of the frame onto the pilot.
pub fn matched_filter_statistic(
    frame: &SignalFrame,
    template: &SignalFrame,
) -> Result<TestStatistic> {
    if frame.len() != template.len() {
        return Err(SenseError::LengthMismatch {
            left: frame.len(),
            right: template.len(),
        });
    }
    let value = frame
        .samples()
        .iter()
        .zip(template.samples())
        .map(|(y, x)| y.re * x.re + y.im * x.im)
        .sum();
    Ok(TestStatistic {
        value,
        detector: DetectorId::MatchedFilter,
    })
}

fn check(pilot_energy: f64, noise_variance: f64) -> Result<()> {
    if !(pilot_energy > 0.0) || !pilot_energy.is_finite() {
        return Err(SenseError::param(
            "pilot energy",
            "finite and positive",
            pilot_energy,
        ));
    }
    if !(noise_variance > 0.0) || !noise_variance.is_finite() {
        return Err(SenseError::param(
            "noise variance",
            "finite and positive",
            noise_variance,
        ));
    }
    Ok(())
}

/// `λ = Q⁻¹(P_fa)·√(E·δ_w²)`.
pub fn mf_threshold(
    pfa_target: f64,
    pilot_energy: f64,
    noise_variance: f64,
) -> Result<ThresholdSpec> {
    let q = q_inverse(pfa_target)?;
    check(pilot_energy, noise_variance)?;
    Ok(ThresholdSpec {
        lambda: q * (pilot_energy * noise_variance).sqrt(),
        polarity: Polarity::AboveMeansPresent,
        normalized_lambda: None,
    })
}

/// `Pd = Q((λ − E)/√(E·δ_w²))`, `Pfa = Q(λ/√(E·δ_w²))`.
pub fn mf_analytic_performance(
    lambda: f64,
    pilot_energy: f64,
    noise_variance: f64,
) -> Result<Performance> {
    check(pilot_energy, noise_variance)?;
    let sigma = (pilot_energy * noise_variance).sqrt();
    Ok(Performance {
        pd: q_function((lambda - pilot_energy) / sigma),
        pfa: q_function(lambda / sigma),
    })
}
