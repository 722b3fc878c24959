//! Primary-user signals, receiver noise and the received frame under each
//! hypothesis.

pub mod io;
pub mod seeding;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, SenseError};
use seeding::{derive_seed, STREAM_NOISE, STREAM_SIGNAL};

/// A finite, non-empty block of complex baseband samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalFrame {
    samples: Vec<Complex64>,
}

impl SignalFrame {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(SenseError::EmptyFrame);
        }
        if let Some(index) = samples
            .iter()
            .position(|s| !s.re.is_finite() || !s.im.is_finite())
        {
            return Err(SenseError::NonFiniteSample { index });
        }
        Ok(Self { samples })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Σ|y(n)|².
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    pub fn mean_power(&self) -> f64 {
        self.energy() / self.len() as f64
    }

    pub fn scaled(&self, factor: Complex64) -> Result<Self> {
        Self::new(self.samples.iter().map(|&s| s * factor).collect())
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// PU absent.
    H0,
    /// PU present.
    H1,
}

impl Hypothesis {
    pub fn is_present(self) -> bool {
        self == Hypothesis::H1
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::H0 => "absent",
            Hypothesis::H1 => "present",
        })
    }
}

/// Whether generated samples are real-valued or circularly-symmetric complex.
///
/// `Real` puts the whole variance on the in-phase component and leaves the
/// quadrature component at zero. The closed-form energy and matched-filter
/// expressions (Gaussian approximation with `2N` degrees of freedom, matched
/// filter variance `E·σ²`) are exact for this model. `Complex` splits the
/// variance evenly over both components; `|w|²` keeps mean `σ²` but the
/// energy statistic's variance halves, so empirical thresholds should be used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleDomain {
    #[default]
    Real,
    Complex,
}

impl FromStr for SampleDomain {
    type Err = SenseError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" => Ok(SampleDomain::Real),
            "complex" => Ok(SampleDomain::Complex),
            other => Err(SenseError::Usage(format!(
                "unknown sample domain {other:?} (expected real or complex)"
            ))),
        }
    }
}

impl fmt::Display for SampleDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleDomain::Real => "real",
            SampleDomain::Complex => "complex",
        })
    }
}

/// Sensing channel gain and receiver noise power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub gain: Complex64,
    pub noise_variance: f64,
}

impl ChannelParams {
    pub fn new(gain: Complex64, noise_variance: f64) -> Result<Self> {
        if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
            return Err(SenseError::param(
                "noise variance",
                "finite and non-negative",
                noise_variance,
            ));
        }
        if !gain.re.is_finite() || !gain.im.is_finite() {
            return Err(SenseError::param("channel gain", "finite", gain.norm()));
        }
        Ok(Self {
            gain,
            noise_variance,
        })
    }

    /// Unit gain with the given noise variance.
    pub fn awgn(noise_variance: f64) -> Result<Self> {
        Self::new(Complex64::new(1.0, 0.0), noise_variance)
    }
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            gain: Complex64::new(1.0, 0.0),
            noise_variance: 1.0,
        }
    }
}

/// Known constant-modulus PU pilot.
///
/// `symbols` is one period of the pattern; it is repeated or truncated to the
/// frame length and scaled so that every sample has power
/// `per_sample_energy`.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotWaveform {
    symbols: Vec<Complex64>,
    per_sample_energy: f64,
}

impl PilotWaveform {
    pub fn new(symbols: Vec<Complex64>, per_sample_energy: f64) -> Result<Self> {
        let Some(first) = symbols.first() else {
            return Err(SenseError::Usage("pilot needs at least one symbol".into()));
        };
        let modulus = first.norm();
        if !(modulus > 0.0) || !modulus.is_finite() {
            return Err(SenseError::param(
                "pilot symbol modulus",
                "positive",
                modulus,
            ));
        }
        if let Some(bad) = symbols
            .iter()
            .find(|s| (s.norm() - modulus).abs() > 1e-12 * modulus)
        {
            return Err(SenseError::param(
                "pilot symbol modulus",
                "identical for every symbol",
                bad.norm(),
            ));
        }
        if !(per_sample_energy >= 0.0) || !per_sample_energy.is_finite() {
            return Err(SenseError::param(
                "pilot per-sample energy",
                "finite and non-negative",
                per_sample_energy,
            ));
        }
        let symbols = symbols.into_iter().map(|s| s / modulus).collect();
        Ok(Self {
            symbols,
            per_sample_energy,
        })
    }

    /// Real ±1 square wave: `half_period` samples at +1 then `half_period` at −1.
    ///
    /// Adjacent samples are equal except at the transitions, which gives the
    /// waveform a strong lag-one correlation.
    pub fn square_wave(half_period: usize, per_sample_energy: f64) -> Result<Self> {
        if half_period == 0 {
            return Err(SenseError::Usage("pilot half period must be >= 1".into()));
        }
        let symbols = (0..2 * half_period)
            .map(|i| {
                let v = if i < half_period { 1.0 } else { -1.0 };
                Complex64::new(v, 0.0)
            })
            .collect();
        Self::new(symbols, per_sample_energy)
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn per_sample_energy(&self) -> f64 {
        self.per_sample_energy
    }

    pub fn with_energy(&self, per_sample_energy: f64) -> Result<Self> {
        Self::new(self.symbols.clone(), per_sample_energy)
    }

    /// The pilot expanded to `n` samples.
    pub fn template(&self, n: usize) -> Result<SignalFrame> {
        let amplitude = self.per_sample_energy.sqrt();
        SignalFrame::new(
            self.symbols
                .iter()
                .cycle()
                .take(n)
                .map(|&s| s * amplitude)
                .collect(),
        )
    }

    /// Σ|x_p(n)|² over `n` samples of the expanded pilot.
    pub fn energy(&self, n: usize) -> Result<f64> {
        Ok(self.template(n)?.energy())
    }
}

impl Default for PilotWaveform {
    fn default() -> Self {
        Self::square_wave(8, 1.0).expect("valid default pilot")
    }
}

/// Kind of primary-user transmission.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum PuKind {
    /// Independent Gaussian samples with variance δ_s².
    #[default]
    GaussianSource,
    /// Deterministic pilot; its symbols are rescaled to power δ_s².
    PilotWaveform(PilotWaveform),
}

/// Everything needed to synthesize one received frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub hypothesis: Hypothesis,
    pub pu_kind: PuKind,
    pub signal_variance: f64,
    pub channel: ChannelParams,
    pub n_samples: usize,
    pub seed: u64,
    pub domain: SampleDomain,
}

impl ScenarioSpec {
    /// Unit-variance AWGN, unit gain, Gaussian source, zero signal power.
    pub fn new(hypothesis: Hypothesis, n_samples: usize) -> Self {
        Self {
            hypothesis,
            pu_kind: PuKind::GaussianSource,
            signal_variance: 0.0,
            channel: ChannelParams::default(),
            n_samples,
            seed: 0,
            domain: SampleDomain::Real,
        }
    }

    /// H1 scenario whose signal power gives `snr_db` over the channel noise.
    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.signal_variance = self.channel.noise_variance * 10f64.powf(snr_db / 10.0);
        self
    }

    pub fn with_signal_variance(mut self, signal_variance: f64) -> Self {
        self.signal_variance = signal_variance;
        self
    }

    pub fn with_noise_variance(mut self, noise_variance: f64) -> Self {
        self.channel.noise_variance = noise_variance;
        self
    }

    pub fn with_pu_kind(mut self, pu_kind: PuKind) -> Self {
        self.pu_kind = pu_kind;
        self
    }

    pub fn with_domain(mut self, domain: SampleDomain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_hypothesis(mut self, hypothesis: Hypothesis) -> Self {
        self.hypothesis = hypothesis;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(SenseError::param("n_samples", ">= 1", 0.0));
        }
        if !(self.signal_variance >= 0.0) || !self.signal_variance.is_finite() {
            return Err(SenseError::param(
                "signal variance",
                "finite and non-negative",
                self.signal_variance,
            ));
        }
        ChannelParams::new(self.channel.gain, self.channel.noise_variance)?;
        Ok(())
    }

    pub fn snr(&self) -> Result<Snr> {
        snr(self.signal_variance, self.channel.noise_variance)
    }

    /// The pilot this scenario transmits under H1, expanded to the frame
    /// length, if the PU sends a pilot.
    pub fn pilot_template(&self) -> Result<Option<SignalFrame>> {
        match &self.pu_kind {
            PuKind::GaussianSource => Ok(None),
            PuKind::PilotWaveform(p) => p
                .with_energy(self.signal_variance)?
                .template(self.n_samples)
                .map(Some),
        }
    }
}

fn gaussian_frame(domain: SampleDomain, n: usize, variance: f64, seed: u64) -> Result<SignalFrame> {
    if n == 0 {
        return Err(SenseError::param("sample count", ">= 1", 0.0));
    }
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(SenseError::param(
            "variance",
            "finite and non-negative",
            variance,
        ));
    }
    if variance == 0.0 {
        return SignalFrame::zeros(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = match domain {
        SampleDomain::Real => {
            let sigma = variance.sqrt();
            (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(sigma * z, 0.0)
                })
                .collect()
        }
        SampleDomain::Complex => {
            let sigma = (variance / 2.0).sqrt();
            (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(sigma * re, sigma * im)
                })
                .collect()
        }
    };
    SignalFrame::new(samples)
}

/// `n` circularly-symmetric complex Gaussian samples with total per-sample
/// variance `noise_variance` (half on each component).
pub fn gen_awgn(n: usize, noise_variance: f64, seed: u64) -> Result<SignalFrame> {
    gaussian_frame(SampleDomain::Complex, n, noise_variance, seed)
}

/// Zero-mean Gaussian noise with per-sample variance `noise_variance` in the
/// requested sample domain.
pub fn gen_noise(
    domain: SampleDomain,
    n: usize,
    noise_variance: f64,
    seed: u64,
) -> Result<SignalFrame> {
    gaussian_frame(domain, n, noise_variance, seed)
}

/// The PU waveform s(n) for `spec`, independent of the hypothesis.
pub fn gen_pu_signal(spec: &ScenarioSpec) -> Result<SignalFrame> {
    spec.validate()?;
    match &spec.pu_kind {
        PuKind::GaussianSource => gaussian_frame(
            spec.domain,
            spec.n_samples,
            spec.signal_variance,
            derive_seed(spec.seed, STREAM_SIGNAL, 0),
        ),
        PuKind::PilotWaveform(pilot) => pilot
            .with_energy(spec.signal_variance)?
            .template(spec.n_samples),
    }
}

/// y(n) = h·s(n) + w(n), element-wise.
pub fn apply_channel(
    signal: &SignalFrame,
    channel: &ChannelParams,
    noise: &SignalFrame,
) -> Result<SignalFrame> {
    if signal.len() != noise.len() {
        return Err(SenseError::LengthMismatch {
            left: signal.len(),
            right: noise.len(),
        });
    }
    SignalFrame::new(
        signal
            .samples()
            .iter()
            .zip(noise.samples())
            .map(|(&s, &w)| channel.gain * s + w)
            .collect(),
    )
}

/// The frame an SU observes for `spec`: noise only under H0, attenuated
/// signal plus noise under H1.
///
/// Noise is drawn from the same sub-stream of `spec.seed` under both
/// hypotheses, so an H1 scenario with zero signal power reproduces its H0
/// counterpart sample for sample.
pub fn received_frame(spec: &ScenarioSpec) -> Result<SignalFrame> {
    spec.validate()?;
    let noise = gen_noise(
        spec.domain,
        spec.n_samples,
        spec.channel.noise_variance,
        derive_seed(spec.seed, STREAM_NOISE, 0),
    )?;
    match spec.hypothesis {
        Hypothesis::H0 => Ok(noise),
        Hypothesis::H1 => apply_channel(&gen_pu_signal(spec)?, &spec.channel, &noise),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snr {
    pub linear: f64,
    /// `-inf` when the signal power is zero.
    pub db: f64,
}

pub fn snr(signal_variance: f64, noise_variance: f64) -> Result<Snr> {
    if !(noise_variance > 0.0) || !noise_variance.is_finite() {
        return Err(SenseError::param(
            "noise variance",
            "finite and positive",
            noise_variance,
        ));
    }
    if !(signal_variance >= 0.0) || !signal_variance.is_finite() {
        return Err(SenseError::param(
            "signal variance",
            "finite and non-negative",
            signal_variance,
        ));
    }
    let linear = signal_variance / noise_variance;
    Ok(Snr {
        linear,
        db: 10.0 * linear.log10(),
    })
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
