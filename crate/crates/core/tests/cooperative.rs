use sensekit::harness::{
    calibrate_empirical, calibrate_soft_fusion, calibration_sample, run_cooperative, CooperativeSu,
    Standardizer,
};
use sensekit::{
    decide, fuse_hard, Detector, DetectorId, FusionRule, Hypothesis, LocalReport, ScenarioSpec,
    TestStatistic, ThresholdSpec,
};

const SEED: u64 = 99;

fn identical_sus(k: usize, n: usize, snr_db: f64, pfa: f64) -> Vec<CooperativeSu> {
    let h0 = ScenarioSpec::new(Hypothesis::H0, n);
    let h1 = h0
        .clone()
        .with_hypothesis(Hypothesis::H1)
        .with_snr_db(snr_db);
    let cal = calibrate_empirical(&Detector::Energy, &h0, pfa, 20_000, SEED).unwrap();
    let sample = calibration_sample(&Detector::Energy, &h0, 20_000, SEED).unwrap();
    let standardizer = Standardizer::from_h0_sample(&sample, Detector::Energy.polarity()).unwrap();
    (0..k)
        .map(|_| CooperativeSu {
            h0: h0.clone(),
            h1: h1.clone(),
            detector: Detector::Energy,
            threshold: cal.threshold,
            standardizer,
        })
        .collect()
}

#[test]
fn soft_combining_beats_every_single_su() {
    let sus = identical_sus(3, 256, -12.0, 0.1);
    let soft = calibrate_soft_fusion(&sus, 0.1, 20_000, SEED).unwrap();
    let counts = run_cooperative(
        &sus,
        FusionRule::SoftSum(soft.threshold.lambda),
        20_000,
        SEED,
    )
    .unwrap();
    let fused_pd = counts.fused.pd().unwrap();
    let fused_pfa = counts.fused.pfa().unwrap();
    assert!((fused_pfa - 0.1).abs() < 0.01, "fused pfa {fused_pfa}");
    for c in &counts.per_su {
        assert!((c.pfa().unwrap() - 0.1).abs() < 0.01);
        assert!(
            fused_pd >= c.pd().unwrap() - 0.01,
            "{fused_pd} vs {}",
            c.pd().unwrap()
        );
    }
}

#[test]
fn and_or_fused_false_alarms_follow_iid_closed_form() {
    let sus = identical_sus(2, 64, -10.0, 0.2);
    let or = run_cooperative(&sus, FusionRule::Or, 50_000, SEED).unwrap();
    let and = run_cooperative(&sus, FusionRule::And, 50_000, SEED).unwrap();
    let p: Vec<f64> = or.per_su.iter().map(|c| c.pfa().unwrap()).collect();
    let or_oracle = 1.0 - (1.0 - p[0]) * (1.0 - p[1]);
    assert!((or.fused.pfa().unwrap() - or_oracle).abs() < 0.01);
    assert!((and.fused.pfa().unwrap() - p[0] * p[1]).abs() < 0.01);
    // local tallies do not depend on the fusion rule
    assert_eq!(or.per_su, and.per_su);
}

#[test]
fn single_su_fusion_reproduces_local_decisions() {
    let sus = identical_sus(1, 128, -8.0, 0.1);
    for rule in [FusionRule::Or, FusionRule::And, FusionRule::KofN(1)] {
        let counts = run_cooperative(&sus, rule, 3000, SEED).unwrap();
        assert_eq!(counts.fused, counts.per_su[0], "{rule}");
    }
}

#[test]
fn k_outside_su_count_is_rejected() {
    let sus = identical_sus(3, 32, 0.0, 0.1);
    assert!(run_cooperative(&sus, FusionRule::KofN(4), 10, SEED).is_err());
    assert!(run_cooperative(&sus, FusionRule::KofN(0), 10, SEED).is_err());
    assert!(run_cooperative(&[], FusionRule::Or, 10, SEED).is_err());
}

#[test]
fn distributed_peers_agree_when_they_share_all_reports() {
    let th = ThresholdSpec::for_detector(DetectorId::Energy, 10.0);
    let reports: Vec<_> = [4.0, 12.0, 9.0, 15.0]
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let stat = TestStatistic {
                value: v,
                detector: DetectorId::Energy,
            };
            LocalReport::hard(format!("su{i}"), decide(stat, &th))
        })
        .collect();
    // each peer fuses its own report with the ones it received
    let outcomes: Vec<Hypothesis> = (0..reports.len())
        .map(|me| {
            let mut view = vec![reports[me].clone()];
            view.extend(
                reports
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != me)
                    .map(|(_, r)| r.clone()),
            );
            fuse_hard(&view, FusionRule::KofN(2)).unwrap().hypothesis
        })
        .collect();
    assert!(outcomes.iter().all(|&h| h == Hypothesis::H1));
}
