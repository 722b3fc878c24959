//! Numerical primitives shared by the detectors: the Gaussian tail function
//! and its inverse, the biased autocorrelation estimator, and the periodogram.

use std::cell::RefCell;
use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, SenseError};
use crate::signal_model::SignalFrame;

/// Standard Gaussian upper-tail probability, `Q(x) = ½·erfc(x/√2)`.
///
/// `erfc` comes from `libm` (the fdlibm rational approximations), which keeps
/// full relative precision deep into the upper tail.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Standard normal CDF, `Φ(x) = Q(−x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Inverse of [`q_function`] on the open interval (0, 1).
///
/// Starts from Acklam's rational approximation of the normal quantile
/// (relative error below 1.2e-9) and polishes it with two Halley steps on
/// `Φ(x) − p`.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(SenseError::InvalidProbability(p));
    }
    // Q⁻¹(p) = −Φ⁻¹(p); working on the lower-tail quantile avoids forming 1 − p.
    let mut x = acklam_quantile(p);
    for _ in 0..2 {
        let err = normal_cdf(x) - p;
        let u = err * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        if !u.is_finite() {
            break;
        }
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(-x)
}

// Coefficients are kept exactly as published.
#[allow(clippy::excessive_precision)]
fn acklam_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

/// Autocorrelation values `R(0..=max_lag)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrSequence {
    values: Vec<Complex64>,
    normalized: bool,
}

impl AutocorrSequence {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    pub fn at(&self, lag: usize) -> Option<Complex64> {
        self.values.get(lag).copied()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }
}

/// Biased estimator `R(τ) = Σ_{n=τ}^{N−1} s(n)·s*(n−τ)`, optionally divided by
/// `R(0)`.
///
/// The sum is truncated at the frame start (no zero padding) and is not
/// divided by the per-lag term count. An all-zero frame yields all-zero
/// values; asking to normalize it is an error.
pub fn autocorrelation(
    frame: &SignalFrame,
    max_lag: usize,
    normalize: bool,
) -> Result<AutocorrSequence> {
    let s = frame.samples();
    if max_lag >= s.len() {
        return Err(SenseError::LagOutOfRange {
            max_lag,
            len: s.len(),
        });
    }
    let mut values: Vec<Complex64> = (0..=max_lag)
        .map(|lag| s[lag..].iter().zip(s).map(|(a, b)| a * b.conj()).sum())
        .collect();
    // R(0) is real by construction; drop rounding residue in the imaginary part.
    values[0] = Complex64::new(frame.energy(), 0.0);

    if normalize {
        let r0 = values[0].re;
        if r0 == 0.0 {
            return Err(SenseError::ZeroEnergy);
        }
        for v in values.iter_mut().skip(1) {
            *v /= r0;
        }
        values[0] = Complex64::new(1.0, 0.0);
    }
    Ok(AutocorrSequence {
        values,
        normalized: normalize,
    })
}

/// Non-negative power per frequency bin.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    bins: Vec<f64>,
}

impl PowerSpectrum {
    pub fn from_bins(bins: Vec<f64>) -> Result<Self> {
        if bins.is_empty() {
            return Err(SenseError::Usage(
                "power spectrum needs at least one bin".into(),
            ));
        }
        if let Some(&bad) = bins.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
            return Err(SenseError::param(
                "spectrum bin",
                "finite and non-negative",
                bad,
            ));
        }
        Ok(Self { bins })
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn mean(&self) -> f64 {
        self.bins.iter().sum::<f64>() / self.bins.len() as f64
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `|DFT(frame)|² / N` per bin, in natural DFT order (bin 0 is DC).
pub fn periodogram(frame: &SignalFrame) -> Result<PowerSpectrum> {
    let n = frame.len();
    if n < 2 {
        return Err(SenseError::param("periodogram length", ">= 2", n as f64));
    }
    let mut buf = frame.samples().to_vec();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n));
    fft.process(&mut buf);
    let scale = 1.0 / n as f64;
    PowerSpectrum::from_bins(buf.iter().map(|x| x.norm_sqr() * scale).collect())
}
