//! Monte Carlo trial runner, empirical calibration, metrics and ROC sweeps.
//!
//! Trials are generated in parallel but every trial frame is a pure function
//! of `(seed, stream, trial index)`, and results are gathered in trial order,
//! so serial and parallel runs produce identical tallies.

use rayon::prelude::*;

use crate::detectors::{Detector, Polarity, ThresholdSpec};
use crate::error::{Result, SenseError};
use crate::fusion::{fuse_votes, FusionRule};
use crate::signal_model::seeding::derive_seed;
use crate::signal_model::{received_frame, Hypothesis, ScenarioSpec};

const STREAM_TRIALS_H0: u64 = 0x7472_6961_6c30;
const STREAM_TRIALS_H1: u64 = 0x7472_6961_6c31;
const STREAM_CALIBRATION: u64 = 0x63_616c_6962;
const STREAM_VALIDATION: u64 = 0x76_616c_6964;

/// Stream tag for trial frames of `hypothesis` at secondary user `su`.
pub fn trial_stream(hypothesis: Hypothesis, su: usize) -> u64 {
    let base = match hypothesis {
        Hypothesis::H0 => STREAM_TRIALS_H0,
        Hypothesis::H1 => STREAM_TRIALS_H1,
    };
    base ^ ((su as u64) << 48)
}

/// Tallies of decisions against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    h1_trials: u64,
    h0_trials: u64,
    detections: u64,
    false_alarms: u64,
    misses: u64,
}

impl ConfusionCounts {
    pub fn from_parts(
        h1_trials: u64,
        h0_trials: u64,
        detections: u64,
        false_alarms: u64,
    ) -> Result<Self> {
        if detections > h1_trials {
            return Err(SenseError::Usage(format!(
                "{detections} detections exceed {h1_trials} H1 trials"
            )));
        }
        if false_alarms > h0_trials {
            return Err(SenseError::Usage(format!(
                "{false_alarms} false alarms exceed {h0_trials} H0 trials"
            )));
        }
        Ok(Self {
            h1_trials,
            h0_trials,
            detections,
            false_alarms,
            misses: h1_trials - detections,
        })
    }

    pub fn record(&mut self, truth: Hypothesis, declared_present: bool) {
        match truth {
            Hypothesis::H1 => {
                self.h1_trials += 1;
                if declared_present {
                    self.detections += 1;
                } else {
                    self.misses += 1;
                }
            }
            Hypothesis::H0 => {
                self.h0_trials += 1;
                self.false_alarms += u64::from(declared_present);
            }
        }
    }

    pub fn merge(&mut self, other: &ConfusionCounts) {
        self.h1_trials += other.h1_trials;
        self.h0_trials += other.h0_trials;
        self.detections += other.detections;
        self.false_alarms += other.false_alarms;
        self.misses += other.misses;
    }

    pub fn h1_trials(&self) -> u64 {
        self.h1_trials
    }
    pub fn h0_trials(&self) -> u64 {
        self.h0_trials
    }
    pub fn detections(&self) -> u64 {
        self.detections
    }
    pub fn false_alarms(&self) -> u64 {
        self.false_alarms
    }
    pub fn misses(&self) -> u64 {
        self.misses
    }

    fn ratio(num: u64, den: u64, what: &str) -> Result<f64> {
        if den == 0 {
            return Err(SenseError::Usage(format!(
                "no {what} trials to estimate from"
            )));
        }
        Ok(num as f64 / den as f64)
    }

    pub fn pd(&self) -> Result<f64> {
        Self::ratio(self.detections, self.h1_trials, "H1")
    }

    pub fn pmd(&self) -> Result<f64> {
        Self::ratio(self.misses, self.h1_trials, "H1")
    }

    pub fn pfa(&self) -> Result<f64> {
        Self::ratio(self.false_alarms, self.h0_trials, "H0")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingMetrics {
    pub pd: f64,
    pub pfa: f64,
    pub pmd: f64,
}

/// Pd, Pfa and Pmd from one set of tallies. Pd and Pmd condition on H1 and
/// sum to one; Pfa conditions on H0.
pub fn metrics(counts: &ConfusionCounts) -> Result<SensingMetrics> {
    Ok(SensingMetrics {
        pd: counts.pd()?,
        pfa: counts.pfa()?,
        pmd: counts.pmd()?,
    })
}

fn check_pair(h0: &ScenarioSpec, h1: &ScenarioSpec) -> Result<()> {
    if h0.hypothesis != Hypothesis::H0 || h1.hypothesis != Hypothesis::H1 {
        return Err(SenseError::Usage(
            "scenario pair must be (H0, H1) in that order".into(),
        ));
    }
    if h0.n_samples != h1.n_samples || h0.channel != h1.channel || h0.domain != h1.domain {
        return Err(SenseError::Usage(
            "H0 and H1 scenarios may differ only in hypothesis and signal".into(),
        ));
    }
    Ok(())
}

fn check_trials(n: usize) -> Result<()> {
    if n == 0 {
        return Err(SenseError::param("trial count", ">= 1", 0.0));
    }
    Ok(())
}

/// Statistic of each of `n_trials` frames of `scenario`, in trial order.
/// Trial `i` uses the sub-seed `derive_seed(seed, stream, i)`.
pub fn simulate_statistics(
    scenario: &ScenarioSpec,
    detector: &Detector,
    n_trials: usize,
    seed: u64,
    stream: u64,
) -> Result<Vec<f64>> {
    check_trials(n_trials)?;
    scenario.validate()?;
    (0..n_trials as u64)
        .into_par_iter()
        .map(|i| {
            let spec = scenario.clone().with_seed(derive_seed(seed, stream, i));
            Ok(detector.statistic(&received_frame(&spec)?)?.value)
        })
        .collect()
}

/// Statistics of a common trial set under both hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialStatistics {
    pub h0: Vec<f64>,
    pub h1: Vec<f64>,
}

impl TrialStatistics {
    pub fn simulate(
        h0: &ScenarioSpec,
        h1: &ScenarioSpec,
        detector: &Detector,
        n_trials: usize,
        seed: u64,
    ) -> Result<Self> {
        check_pair(h0, h1)?;
        Ok(Self {
            h0: simulate_statistics(
                h0,
                detector,
                n_trials,
                seed,
                trial_stream(Hypothesis::H0, 0),
            )?,
            h1: simulate_statistics(
                h1,
                detector,
                n_trials,
                seed,
                trial_stream(Hypothesis::H1, 0),
            )?,
        })
    }

    pub fn counts_at(&self, threshold: &ThresholdSpec) -> ConfusionCounts {
        let mut counts = ConfusionCounts::default();
        for &t in &self.h0 {
            counts.record(Hypothesis::H0, threshold.declares_present(t));
        }
        for &t in &self.h1 {
            counts.record(Hypothesis::H1, threshold.declares_present(t));
        }
        counts
    }
}

/// Runs `n_trials` frames under each hypothesis, decides each against
/// `threshold`, and tallies the outcomes.
pub fn run_trials(
    h0: &ScenarioSpec,
    h1: &ScenarioSpec,
    detector: &Detector,
    threshold: &ThresholdSpec,
    n_trials: usize,
    seed: u64,
) -> Result<ConfusionCounts> {
    Ok(TrialStatistics::simulate(h0, h1, detector, n_trials, seed)?.counts_at(threshold))
}

/// Threshold learned from a sample of H0 statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub threshold: ThresholdSpec,
    /// Every H0 statistic was identical; λ equals that value and the target
    /// rate cannot be met.
    pub degenerate: bool,
    pub trials: usize,
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(SenseError::InvalidProbability(p))
    }
}

/// Picks λ so that the fraction of `h0_sample` declared present is as close
/// as possible to `pfa_target`: the upper `pfa_target` quantile when large
/// values mean present, the lower one otherwise.
pub fn threshold_from_h0_sample(
    h0_sample: &[f64],
    polarity: Polarity,
    pfa_target: f64,
) -> Result<Calibration> {
    check_probability(pfa_target)?;
    if h0_sample.is_empty() {
        return Err(SenseError::param("calibration sample size", ">= 1", 0.0));
    }
    let mut sorted = h0_sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let alarms = ((pfa_target * n as f64).round() as usize)
        .max(1)
        .min((n - 1).max(1));
    let lambda = match polarity {
        Polarity::AboveMeansPresent => sorted[n - alarms],
        Polarity::AboveMeansAbsent => sorted[alarms.min(n - 1)],
    };
    let degenerate = sorted[0] == sorted[n - 1];
    if degenerate {
        log::warn!(
            "calibration sample is constant ({lambda}); target false-alarm rate {pfa_target} is unreachable"
        );
    }
    Ok(Calibration {
        threshold: ThresholdSpec::new(lambda, polarity),
        degenerate,
        trials: n,
    })
}

/// Empirical (CFAR-style) threshold from `n_cal_trials` H0 frames.
pub fn calibrate_empirical(
    detector: &Detector,
    scenario_h0: &ScenarioSpec,
    pfa_target: f64,
    n_cal_trials: usize,
    seed: u64,
) -> Result<Calibration> {
    calibrate_empirical_with_polarity(
        detector,
        detector.polarity(),
        scenario_h0,
        pfa_target,
        n_cal_trials,
        seed,
    )
}

pub fn calibrate_empirical_with_polarity(
    detector: &Detector,
    polarity: Polarity,
    scenario_h0: &ScenarioSpec,
    pfa_target: f64,
    n_cal_trials: usize,
    seed: u64,
) -> Result<Calibration> {
    check_probability(pfa_target)?;
    if n_cal_trials < 100 {
        return Err(SenseError::param(
            "calibration trials",
            ">= 100",
            n_cal_trials as f64,
        ));
    }
    if scenario_h0.hypothesis != Hypothesis::H0 {
        return Err(SenseError::Usage("calibration needs an H0 scenario".into()));
    }
    let sample = calibration_sample(detector, scenario_h0, n_cal_trials, seed)?;
    threshold_from_h0_sample(&sample, polarity, pfa_target)
}

/// The H0 statistics [`calibrate_empirical`] draws for a given seed.
pub fn calibration_sample(
    detector: &Detector,
    scenario_h0: &ScenarioSpec,
    n_cal_trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    simulate_statistics(
        scenario_h0,
        detector,
        n_cal_trials,
        seed,
        STREAM_CALIBRATION,
    )
}

/// False-alarm rate of `threshold` over fresh H0 frames (independent of the
/// calibration frames drawn with the same seed).
pub fn validate_pfa(
    detector: &Detector,
    scenario_h0: &ScenarioSpec,
    threshold: &ThresholdSpec,
    n_trials: usize,
    seed: u64,
) -> Result<f64> {
    let sample = simulate_statistics(scenario_h0, detector, n_trials, seed, STREAM_VALIDATION)?;
    let alarms = sample
        .iter()
        .filter(|&&t| threshold.declares_present(t))
        .count();
    Ok(alarms as f64 / n_trials as f64)
}

/// `3·√(p(1−p)/n)`, the binomial acceptance band used for validation.
pub fn binomial_band(p: f64, n: usize) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub pfa: f64,
    pub pd: f64,
}

/// (Pfa, Pd) pairs sorted by ascending Pfa.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// True when Pd never decreases along the curve.
    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[1].pd >= w[0].pd)
    }

    /// Largest Pd among points whose Pfa does not exceed `max_pfa`.
    pub fn best_pd_at(&self, max_pfa: f64) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.pfa <= max_pfa)
            .map(|p| p.pd)
            .reduce(f64::max)
    }

    /// Trapezoidal area under the curve.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].pfa - w[0].pfa) * (w[1].pd + w[0].pd) / 2.0)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdGrid {
    Explicit(Vec<f64>),
    /// Quantiles 0.01, 0.02, …, 0.99 of the pooled H0/H1 statistics,
    /// optionally bracketed by the ±∞ sentinels.
    Auto {
        sentinels: bool,
    },
}

impl ThresholdGrid {
    pub fn resolve(&self, stats: &TrialStatistics) -> Vec<f64> {
        match self {
            ThresholdGrid::Explicit(v) => v.clone(),
            ThresholdGrid::Auto { sentinels } => {
                let mut pooled: Vec<f64> = stats.h0.iter().chain(&stats.h1).copied().collect();
                pooled.sort_by(f64::total_cmp);
                let last = pooled.len().saturating_sub(1) as f64;
                let mut grid: Vec<f64> = (1..=99)
                    .map(|i| pooled[(i as f64 / 100.0 * last).round() as usize])
                    .collect();
                if *sentinels {
                    grid.insert(0, f64::NEG_INFINITY);
                    grid.push(f64::INFINITY);
                }
                grid
            }
        }
    }
}

fn count_present(sorted: &[f64], lambda: f64, polarity: Polarity) -> usize {
    let below = sorted.partition_point(|&t| t < lambda);
    match polarity {
        Polarity::AboveMeansPresent => sorted.len() - below,
        Polarity::AboveMeansAbsent => below,
    }
}

/// One ROC point per threshold, all evaluated on the same trial statistics.
pub fn roc_from_statistics(
    stats: &TrialStatistics,
    thresholds: &[f64],
    polarity: Polarity,
) -> Result<RocCurve> {
    if thresholds.len() < 2 {
        return Err(SenseError::param(
            "threshold count",
            ">= 2",
            thresholds.len() as f64,
        ));
    }
    if stats.h0.is_empty() || stats.h1.is_empty() {
        return Err(SenseError::Usage(
            "ROC needs trials under both hypotheses".into(),
        ));
    }
    let mut h0 = stats.h0.clone();
    let mut h1 = stats.h1.clone();
    h0.sort_by(f64::total_cmp);
    h1.sort_by(f64::total_cmp);
    let mut points: Vec<RocPoint> = thresholds
        .iter()
        .map(|&lambda| RocPoint {
            threshold: lambda,
            pfa: count_present(&h0, lambda, polarity) as f64 / h0.len() as f64,
            pd: count_present(&h1, lambda, polarity) as f64 / h1.len() as f64,
        })
        .collect();
    points.sort_by(|a, b| a.pfa.total_cmp(&b.pfa).then(a.pd.total_cmp(&b.pd)));
    Ok(RocCurve { points })
}

/// Simulates a common trial set and sweeps `grid` over it with the
/// detector's own polarity.
pub fn roc_sweep(
    h0: &ScenarioSpec,
    h1: &ScenarioSpec,
    detector: &Detector,
    grid: &ThresholdGrid,
    n_trials: usize,
    seed: u64,
) -> Result<RocCurve> {
    let stats = TrialStatistics::simulate(h0, h1, detector, n_trials, seed)?;
    roc_from_statistics(&stats, &grid.resolve(&stats), detector.polarity())
}

/// Affine map that makes a statistic zero-mean and unit-variance under H0,
/// oriented so that larger values favour "present".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardizer {
    pub mean: f64,
    pub std_dev: f64,
    pub sign: f64,
}

impl Standardizer {
    pub fn new(mean: f64, std_dev: f64, polarity: Polarity) -> Result<Self> {
        if !(std_dev > 0.0) || !std_dev.is_finite() {
            return Err(SenseError::param(
                "H0 standard deviation",
                "positive",
                std_dev,
            ));
        }
        let sign = match polarity {
            Polarity::AboveMeansPresent => 1.0,
            Polarity::AboveMeansAbsent => -1.0,
        };
        Ok(Self {
            mean,
            std_dev,
            sign,
        })
    }

    pub fn from_h0_sample(sample: &[f64], polarity: Polarity) -> Result<Self> {
        let n = sample.len() as f64;
        if sample.len() < 2 {
            return Err(SenseError::param("H0 sample size", ">= 2", n));
        }
        let mean = sample.iter().sum::<f64>() / n;
        let var = sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self::new(mean, var.sqrt(), polarity)
    }

    #[inline]
    pub fn apply(&self, value: f64) -> f64 {
        self.sign * (value - self.mean) / self.std_dev
    }
}

/// One cooperating secondary user.
#[derive(Debug, Clone, PartialEq)]
pub struct CooperativeSu {
    pub h0: ScenarioSpec,
    pub h1: ScenarioSpec,
    pub detector: Detector,
    pub threshold: ThresholdSpec,
    pub standardizer: Standardizer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CooperativeCounts {
    pub per_su: Vec<ConfusionCounts>,
    pub fused: ConfusionCounts,
}

fn su_statistics(
    su: &CooperativeSu,
    k: usize,
    hyp: Hypothesis,
    trial: u64,
    seed: u64,
) -> Result<f64> {
    let scenario = match hyp {
        Hypothesis::H0 => &su.h0,
        Hypothesis::H1 => &su.h1,
    };
    let spec = scenario
        .clone()
        .with_seed(derive_seed(seed, trial_stream(hyp, k), trial));
    Ok(su.detector.statistic(&received_frame(&spec)?)?.value)
}

/// Every SU observes its own independent frame in each trial; the fusion
/// center combines the local reports under `rule`.
pub fn run_cooperative(
    sus: &[CooperativeSu],
    rule: FusionRule,
    n_trials: usize,
    seed: u64,
) -> Result<CooperativeCounts> {
    if sus.is_empty() {
        return Err(SenseError::NoReports);
    }
    check_trials(n_trials)?;
    for su in sus {
        check_pair(&su.h0, &su.h1)?;
    }
    if let FusionRule::KofN(k) = rule {
        if !(1..=sus.len()).contains(&k) {
            return Err(SenseError::KOutOfRange { k, n: sus.len() });
        }
    }

    let mut per_su = vec![ConfusionCounts::default(); sus.len()];
    let mut fused = ConfusionCounts::default();
    for hyp in [Hypothesis::H0, Hypothesis::H1] {
        let outcomes: Vec<(Vec<bool>, bool)> = (0..n_trials as u64)
            .into_par_iter()
            .map(|t| {
                let mut local = Vec::with_capacity(sus.len());
                let mut soft_sum = 0.0;
                for (k, su) in sus.iter().enumerate() {
                    let stat = su_statistics(su, k, hyp, t, seed)?;
                    local.push(su.threshold.declares_present(stat));
                    soft_sum += su.standardizer.apply(stat);
                }
                let present = match rule {
                    FusionRule::SoftSum(th) => soft_sum >= th,
                    hard => fuse_votes(local.iter().filter(|&&p| p).count(), sus.len(), hard)?
                        .is_present(),
                };
                Ok((local, present))
            })
            .collect::<Result<_>>()?;
        for (local, present) in outcomes {
            for (counts, p) in per_su.iter_mut().zip(local) {
                counts.record(hyp, p);
            }
            fused.record(hyp, present);
        }
    }
    Ok(CooperativeCounts { per_su, fused })
}

/// Empirical fusion-center threshold for soft combining: the upper
/// `pfa_target` quantile of the H0 standardized sum.
pub fn calibrate_soft_fusion(
    sus: &[CooperativeSu],
    pfa_target: f64,
    n_cal_trials: usize,
    seed: u64,
) -> Result<Calibration> {
    if sus.is_empty() {
        return Err(SenseError::NoReports);
    }
    check_trials(n_cal_trials)?;
    let sums: Vec<f64> = (0..n_cal_trials as u64)
        .into_par_iter()
        .map(|t| {
            sus.iter().enumerate().try_fold(0.0, |acc, (k, su)| {
                let spec = su.h0.clone().with_seed(derive_seed(
                    seed,
                    STREAM_CALIBRATION ^ ((k as u64) << 48),
                    t,
                ));
                let stat = su.detector.statistic(&received_frame(&spec)?)?.value;
                Ok(acc + su.standardizer.apply(stat))
            })
        })
        .collect::<Result<_>>()?;
    threshold_from_h0_sample(&sums, Polarity::AboveMeansPresent, pfa_target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{energy_threshold, DetectorId};
    use proptest::prelude::*;

    fn pair(n: usize, snr_db: f64) -> (ScenarioSpec, ScenarioSpec) {
        let h0 = ScenarioSpec::new(Hypothesis::H0, n);
        let h1 = h0
            .clone()
            .with_hypothesis(Hypothesis::H1)
            .with_snr_db(snr_db);
        (h0, h1)
    }

    #[test]
    fn metrics_examples() {
        let c = ConfusionCounts::from_parts(100, 0, 90, 0).unwrap();
        assert_eq!(c.pd().unwrap(), 0.9);
        assert_eq!(c.pmd().unwrap(), 0.1);
        assert!(c.pfa().is_err());
        assert!(metrics(&c).is_err());

        let c = ConfusionCounts::from_parts(1, 200, 1, 10).unwrap();
        assert_eq!(c.pfa().unwrap(), 0.05);
        assert!(ConfusionCounts::from_parts(5, 5, 6, 0).is_err());
        assert!(ConfusionCounts::from_parts(5, 5, 5, 6).is_err());
    }

    proptest! {
        #[test]
        fn pd_and_pmd_are_complementary(h1 in 1u64..100_000, frac in 0.0f64..=1.0, h0 in 1u64..1000) {
            let d = (h1 as f64 * frac) as u64;
            let c = ConfusionCounts::from_parts(h1, h0, d, 0).unwrap();
            let m = metrics(&c).unwrap();
            prop_assert_eq!(c.detections() + c.misses(), c.h1_trials());
            prop_assert_eq!(m.pd + m.pmd, 1.0);
        }

        #[test]
        fn empirical_quantile_hits_target(n in 100usize..2000, p in 0.01f64..0.99, seed in any::<u64>()) {
            let sample: Vec<f64> = (0..n as u64).map(|i| derive_seed(seed, 0, i) as f64).collect();
            for polarity in [Polarity::AboveMeansPresent, Polarity::AboveMeansAbsent] {
                let cal = threshold_from_h0_sample(&sample, polarity, p).unwrap();
                let alarms = sample.iter().filter(|&&t| cal.threshold.declares_present(t)).count();
                let expected = ((p * n as f64).round() as usize).clamp(1, n - 1);
                prop_assert_eq!(alarms, expected);
            }
        }
    }

    #[test]
    fn degenerate_thresholds() {
        let (h0, h1) = pair(64, 0.0);
        let all = ThresholdSpec::for_detector(DetectorId::Energy, 0.0);
        let c = run_trials(&h0, &h1, &Detector::Energy, &all, 200, 1).unwrap();
        assert_eq!((c.pd().unwrap(), c.pfa().unwrap()), (1.0, 1.0));
        let none = ThresholdSpec::for_detector(DetectorId::Energy, f64::INFINITY);
        let c = run_trials(&h0, &h1, &Detector::Energy, &none, 200, 1).unwrap();
        assert_eq!((c.pd().unwrap(), c.pfa().unwrap()), (0.0, 0.0));
    }

    #[test]
    fn runs_are_reproducible() {
        let (h0, h1) = pair(128, -3.0);
        let t = energy_threshold(0.1, 128, 1.0).unwrap();
        let a = run_trials(&h0, &h1, &Detector::Energy, &t, 500, 9).unwrap();
        let b = run_trials(&h0, &h1, &Detector::Energy, &t, 500, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(
            a,
            run_trials(&h0, &h1, &Detector::Energy, &t, 500, 10).unwrap()
        );
    }

    #[test]
    fn parallel_matches_serial() {
        let (h0, _) = pair(64, 0.0);
        let parallel = simulate_statistics(
            &h0,
            &Detector::Autocorr,
            300,
            5,
            trial_stream(Hypothesis::H0, 0),
        )
        .unwrap();
        let serial: Vec<f64> = (0..300u64)
            .map(|i| {
                let spec = h0
                    .clone()
                    .with_seed(derive_seed(5, trial_stream(Hypothesis::H0, 0), i));
                Detector::Autocorr
                    .statistic(&received_frame(&spec).unwrap())
                    .unwrap()
                    .value
            })
            .collect();
        assert_eq!(parallel, serial);
    }

    #[test]
    fn rejects_mismatched_pairs() {
        let (h0, h1) = pair(64, 0.0);
        let t = ThresholdSpec::for_detector(DetectorId::Energy, 1.0);
        assert!(run_trials(&h1, &h0, &Detector::Energy, &t, 10, 0).is_err());
        let longer = h1.clone().with_signal_variance(1.0);
        let longer = ScenarioSpec {
            n_samples: 65,
            ..longer
        };
        assert!(run_trials(&h0, &longer, &Detector::Energy, &t, 10, 0).is_err());
        assert!(run_trials(&h0, &h1, &Detector::Energy, &t, 0, 0).is_err());
    }

    #[test]
    fn calibration_preconditions_and_degenerate_case() {
        let (h0, _) = pair(64, 0.0);
        assert!(calibrate_empirical(&Detector::Energy, &h0, 1.5, 1000, 0).is_err());
        assert!(calibrate_empirical(&Detector::Energy, &h0, 0.1, 99, 0).is_err());

        // zero noise: every H0 energy is exactly 0
        let silent = h0.clone().with_noise_variance(0.0);
        let cal = calibrate_empirical(&Detector::Energy, &silent, 0.1, 200, 0).unwrap();
        assert!(cal.degenerate);
        assert_eq!(cal.threshold.lambda, 0.0);
    }

    #[test]
    fn sentinel_endpoints() {
        let (h0, h1) = pair(64, 0.0);
        let grid = ThresholdGrid::Explicit(vec![f64::NEG_INFINITY, f64::INFINITY]);
        let roc = roc_sweep(&h0, &h1, &Detector::Energy, &grid, 100, 2).unwrap();
        let pts: Vec<(f64, f64)> = roc.points.iter().map(|p| (p.pfa, p.pd)).collect();
        assert_eq!(pts, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert!(roc_sweep(
            &h0,
            &h1,
            &Detector::Energy,
            &ThresholdGrid::Explicit(vec![1.0]),
            10,
            0
        )
        .is_err());
    }

    #[test]
    fn auto_grid_size() {
        let (h0, h1) = pair(64, 0.0);
        let stats = TrialStatistics::simulate(&h0, &h1, &Detector::Energy, 300, 0).unwrap();
        assert_eq!(
            ThresholdGrid::Auto { sentinels: false }
                .resolve(&stats)
                .len(),
            99
        );
        assert_eq!(
            ThresholdGrid::Auto { sentinels: true }
                .resolve(&stats)
                .len(),
            101
        );
    }

    #[test]
    fn raising_lambda_never_adds_detections() {
        let (h0, h1) = pair(128, -5.0);
        let stats = TrialStatistics::simulate(&h0, &h1, &Detector::Energy, 2000, 3).unwrap();
        let mut prev = u64::MAX;
        for i in 0..200 {
            let t = ThresholdSpec::for_detector(DetectorId::Energy, 80.0 + i as f64);
            let d = stats.counts_at(&t).detections();
            assert!(d <= prev);
            prev = d;
        }
    }

    #[test]
    fn standardizer_orients_absent_polarity() {
        let s = Standardizer::new(10.0, 2.0, Polarity::AboveMeansAbsent).unwrap();
        assert_eq!(s.apply(14.0), -2.0);
        assert!(Standardizer::new(0.0, 0.0, Polarity::AboveMeansPresent).is_err());
    }

    #[test]
    fn cooperative_or_with_one_su_matches_local() {
        let (h0, h1) = pair(128, -3.0);
        let threshold = energy_threshold(0.1, 128, 1.0).unwrap();
        let su = CooperativeSu {
            h0: h0.clone(),
            h1: h1.clone(),
            detector: Detector::Energy,
            threshold,
            standardizer: Standardizer::new(128.0, 16.0, Polarity::AboveMeansPresent).unwrap(),
        };
        let c = run_cooperative(std::slice::from_ref(&su), FusionRule::Or, 1000, 4).unwrap();
        assert_eq!(c.fused, c.per_su[0]);
        // SU 0 shares the single-detector trial streams
        let single = run_trials(&h0, &h1, &Detector::Energy, &threshold, 1000, 4).unwrap();
        assert_eq!(single, c.per_su[0]);
        assert!(run_cooperative(&[su], FusionRule::KofN(2), 10, 0).is_err());
    }
}
