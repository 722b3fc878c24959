use super::{DetectorId, Performance, Polarity, TestStatistic, ThresholdSpec};
use crate::error::{Result, SenseError};
use crate::signal_model::SignalFrame;
use crate::stats::{q_function, q_inverse};

/// `T = Σ_{n=1}^{N} |y(n)|²`.
pub fn energy_statistic(frame: &SignalFrame) -> TestStatistic {
    TestStatistic {
        value: frame.energy(),
        detector: DetectorId::Energy,
    }
}

fn check_positive(what: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SenseError::param(what, "finite and positive", v))
    }
}

/// `λ = (Q⁻¹(P_fa)·√(2N) + N)·δ_w²`.
pub fn energy_threshold(
    pfa_target: f64,
    n_samples: usize,
    noise_variance: f64,
) -> Result<ThresholdSpec> {
    let q = q_inverse(pfa_target)?;
    if n_samples == 0 {
        return Err(SenseError::param("n_samples", ">= 1", 0.0));
    }
    check_positive("noise variance", noise_variance)?;
    let n = n_samples as f64;
    let normalized = q * (2.0 * n).sqrt() + n;
    Ok(ThresholdSpec {
        lambda: normalized * noise_variance,
        polarity: Polarity::AboveMeansPresent,
        normalized_lambda: Some(normalized),
    })
}

/// Gaussian-approximation Pd and Pfa for threshold `lambda`:
///
/// ```text
/// Pd  = Q((λ − N(δ_w² + δ_s²)) / √(2N(δ_w² + δ_s²)²))
/// Pfa = Q((λ − Nδ_w²) / √(2Nδ_w⁴))
/// ```
pub fn energy_analytic_performance(
    lambda: f64,
    n_samples: usize,
    noise_variance: f64,
    signal_variance: f64,
) -> Result<Performance> {
    if n_samples == 0 {
        return Err(SenseError::param("n_samples", ">= 1", 0.0));
    }
    check_positive("noise variance", noise_variance)?;
    if !(signal_variance >= 0.0) || !signal_variance.is_finite() {
        return Err(SenseError::param(
            "signal variance",
            "finite and non-negative",
            signal_variance,
        ));
    }
    let n = n_samples as f64;
    let total = noise_variance + signal_variance;
    Ok(Performance {
        pd: q_function((lambda - n * total) / (2.0 * n * total * total).sqrt()),
        pfa: q_function((lambda - n * noise_variance) / (2.0 * n).sqrt() / noise_variance),
    })
}

/// Same quantities expressed with the normalized threshold `λ̄ = λ/δ_w²` and
/// the linear SNR `γ = δ_s²/δ_w²`.
pub fn energy_analytic_performance_snr(
    normalized_lambda: f64,
    n_samples: usize,
    snr_linear: f64,
) -> Result<Performance> {
    if n_samples == 0 {
        return Err(SenseError::param("n_samples", ">= 1", 0.0));
    }
    if !(snr_linear >= 0.0) || !snr_linear.is_finite() {
        return Err(SenseError::param(
            "snr",
            "finite and non-negative",
            snr_linear,
        ));
    }
    let n = n_samples as f64;
    let g = 1.0 + snr_linear;
    Ok(Performance {
        pd: q_function((normalized_lambda - n * g) / (2.0 * n * g * g).sqrt()),
        pfa: q_function((normalized_lambda - n) / (2.0 * n).sqrt()),
    })
}
