use std::path::Path;
use std::process::{Command, Output};

fn sensekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sensekit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> usize {
    rows[0].iter().position(|c| c == name).unwrap()
}

#[test]
fn sense_emits_one_row_per_snr() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let o = sensekit(&[
        "sense",
        "--detector",
        "energy",
        "--snr-db",
        "-10",
        "--snr-db",
        "-5",
        "--snr-db",
        "0",
        "--trials",
        "500",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out);
    assert_eq!(
        rows[0].join(","),
        "detector,snr_db,n_samples,threshold,pd,pfa,pmd,trials,seed"
    );
    assert_eq!(rows.len(), 1 + 3);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("# snr_db = -10,-5,0"));
}

#[test]
fn zero_trials_is_a_config_error() {
    let o = sensekit(&["sense", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trials"));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.conf");
    std::fs::write(&cfg, "# test\nsamples = 128\nbandwidth = 6e6\n").unwrap();
    let o = sensekit(&["sense", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bandwidth"));
}

#[test]
fn missing_config_file_and_unwritable_output_are_io_errors() {
    let o = sensekit(&["sense", "--config", "/nonexistent/exp.conf"]);
    assert_eq!(o.status.code(), Some(3));
    let o = sensekit(&["sense", "--trials", "10", "--out", "/nonexistent/dir/m.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.conf");
    std::fs::write(&cfg, "samples = 128\ntrials = 50\nseed = 4\n").unwrap();
    let out = dir.path().join("m.csv");
    let o = sensekit(&[
        "sense",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
        "--snr-db",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows[1][column(&rows, "n_samples")], "128");
    assert_eq!(rows[1][column(&rows, "trials")], "50");
    assert_eq!(rows[1][column(&rows, "seed")], "9");
}

#[test]
fn reruns_with_the_same_seed_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["sense", "roc", "calibrate", "fuse"] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{cmd}{run}.csv"));
            let o = sensekit(&[
                cmd,
                "--detector",
                "energy,euclid",
                "--snr-db",
                "-8",
                "--samples",
                "128",
                "--trials",
                "300",
                "--set",
                "cal_trials=300",
                "--seed",
                "77",
                "--out",
                out.to_str().unwrap(),
            ]);
            assert!(
                o.status.success(),
                "{cmd}: {}",
                String::from_utf8_lossy(&o.stderr)
            );
            outputs.push(std::fs::read(&out).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{cmd}");
    }
}

#[test]
fn different_seeds_differ() {
    let a = sensekit(&["sense", "--snr-db", "-15", "--trials", "300", "--seed", "1"]);
    let b = sensekit(&["sense", "--snr-db", "-15", "--trials", "300", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn roc_svg_has_one_polyline_per_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("roc.csv");
    let svg = dir.path().join("roc.svg");
    let o = sensekit(&[
        "roc",
        "--detector",
        "energy,matched-filter",
        "--snr-db",
        "-10",
        "--samples",
        "256",
        "--trials",
        "400",
        "--out",
        out.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 2);
    assert!(text.starts_with("<svg"));
    assert!(text.contains("energy @ -10 dB"));
}

#[test]
fn roc_rows_and_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("roc.csv");
    let o = sensekit(&[
        "roc",
        "--detector",
        "energy,autocorr,wavelet",
        "--snr-db",
        "-10,-3",
        "--samples",
        "128",
        "--trials",
        "200",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out);
    assert_eq!(rows[0].join(","), "detector,snr_db,threshold,pfa,pd");
    assert_eq!(rows.len() - 1, 3 * 2 * 101);

    let (pfa, pd) = (column(&rows, "pfa"), column(&rows, "pd"));
    for curve in rows[1..].chunks(101) {
        let points: Vec<(f64, f64)> = curve
            .iter()
            .map(|r| (r[pfa].parse().unwrap(), r[pd].parse().unwrap()))
            .collect();
        assert!(points.contains(&(0.0, 0.0)));
        assert!(points.contains(&(1.0, 1.0)));
        assert!(points
            .windows(2)
            .all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
    }
}

#[test]
fn roc_without_sentinels_has_99_thresholds() {
    let o = sensekit(&[
        "roc",
        "--snr-db",
        "0",
        "--samples",
        "64",
        "--trials",
        "200",
        "--set",
        "roc_sentinels=false",
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 99);
}

#[test]
fn calibrate_reports_gap_for_energy_and_na_for_wavelet() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cal.csv");
    let o = sensekit(&[
        "calibrate",
        "--detector",
        "energy,wavelet",
        "--samples",
        "256",
        "--trials",
        "5000",
        "--set",
        "cal_trials=5000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out);
    let (an, em, gap) = (
        column(&rows, "analytic_threshold"),
        column(&rows, "empirical_threshold"),
        column(&rows, "relative_gap"),
    );

    let energy = &rows[1];
    assert_eq!(energy[0], "energy");
    let a: f64 = energy[an].parse().unwrap();
    let e: f64 = energy[em].parse().unwrap();
    let g: f64 = energy[gap].parse().unwrap();
    assert!(((e - a) / a - g).abs() < 1e-4);
    assert!(g.abs() < 0.02, "gap {g}");

    let wavelet = &rows[2];
    assert_eq!(wavelet[0], "wavelet");
    assert_eq!(wavelet[an], "n/a");
    assert_eq!(wavelet[gap], "n/a");
    assert!(wavelet[em].parse::<f64>().is_ok());
}

#[test]
fn calibrate_rejects_invalid_pfa() {
    let o = sensekit(&["calibrate", "--pfa", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analytic_threshold_mode_rejects_detectors_without_closed_form() {
    let o = sensekit(&[
        "sense",
        "--detector",
        "euclid",
        "--trials",
        "10",
        "--set",
        "threshold=analytic",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

fn fuse_rows(extra: &[&str]) -> Vec<Vec<String>> {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fuse.csv");
    let mut args = vec!["fuse", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = sensekit(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    csv_rows(&out)
}

#[test]
fn single_su_or_fusion_equals_local_metrics() {
    let rows = fuse_rows(&[
        "--snr-db",
        "-12",
        "--trials",
        "2000",
        "--set",
        "sus=1",
        "--set",
        "fusion_rule=or",
    ]);
    assert_eq!(
        rows[0].join(","),
        "su_id,rule,detector,snr_db,n_samples,threshold,pd,pfa,pmd,trials,seed"
    );
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][0], "su0");
    assert_eq!(rows[2][0], "fusion");
    assert_eq!(rows[1][6..9], rows[2][6..9]);
}

#[test]
fn or_fusion_of_three_iid_sus_follows_the_closed_form() {
    let rows = fuse_rows(&[
        "--snr-db",
        "-10",
        "--samples",
        "200",
        "--trials",
        "20000",
        "--set",
        "fusion_rule=or",
        "--set",
        "sus=3",
    ]);
    let pfa = column(&rows, "pfa");
    let local: Vec<f64> = rows[1..4].iter().map(|r| r[pfa].parse().unwrap()).collect();
    let fused: f64 = rows[4][pfa].parse().unwrap();
    let miss_all: f64 = local.iter().map(|p| 1.0 - p).product();
    assert!(
        (fused - (1.0 - miss_all)).abs() < 0.015,
        "{fused} vs {local:?}"
    );
}

#[test]
fn heterogeneous_su_snrs_are_honoured() {
    let rows = fuse_rows(&[
        "--trials",
        "500",
        "--samples",
        "128",
        "--set",
        "sus=2",
        "--set",
        "su_snr_db=-20,0",
    ]);
    let (snr, pd) = (column(&rows, "snr_db"), column(&rows, "pd"));
    assert_eq!(rows[1][snr], "-20");
    assert_eq!(rows[2][snr], "0");
    assert_eq!(rows[3][snr], "nan");
    let weak: f64 = rows[1][pd].parse().unwrap();
    let strong: f64 = rows[2][pd].parse().unwrap();
    assert!(strong > weak);
}

#[test]
fn soft_fusion_runs_with_a_calibrated_threshold() {
    let rows = fuse_rows(&[
        "--snr-db",
        "-12",
        "--samples",
        "256",
        "--trials",
        "3000",
        "--set",
        "fusion_rule=soft",
        "--set",
        "cal_trials=3000",
    ]);
    let pfa: f64 = rows[4][column(&rows, "pfa")].parse().unwrap();
    assert!((pfa - 0.1).abs() < 0.03, "{pfa}");
    assert!(rows[4][1].starts_with("soft:"));
}

#[test]
fn k_larger_than_su_count_is_a_config_error() {
    let o = sensekit(&["fuse", "--set", "sus=3", "--set", "fusion_rule=kofn:4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn statistics_stream_has_one_row_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("stats.csv");
    let o = sensekit(&[
        "sense",
        "--detector",
        "autocorr",
        "--snr-db",
        "0",
        "--samples",
        "64",
        "--trials",
        "25",
        "--set",
        "cal_trials=200",
        "--stats",
        stats.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stats);
    assert_eq!(rows[0].join(","), "trial_id,detector,statistic,decision");
    assert_eq!(rows.len(), 1 + 50);
    assert!(rows[1..]
        .iter()
        .all(|r| r[1] == "autocorr" && (r[3] == "present" || r[3] == "absent")));
}
