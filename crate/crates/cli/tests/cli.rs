use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_asmc-sim"));
    c.env("RUST_LOG", "warn");
    c
}

fn scenario() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/default.toml")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_into(dir: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("run")
        .arg(scenario())
        .arg("--out")
        .arg(dir)
        .args(["--decimation", "4"])
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn bundled_scenario_runs_and_metrics_reproduce_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), &["--plot", "--kv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.starts_with("# asmc-sim "));
    assert!(summary.contains("dq_rms_deg"));
    for f in ["trace.csv", "summary.kv", "tracking.svg", "error.svg", "torque.svg", "disturbance.svg"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }

    let m = bin().arg("metrics").arg(dir.path().join("trace.csv")).output().unwrap();
    assert_eq!(m.status.code(), Some(0), "{}", stderr(&m));
    assert_eq!(stdout(&m), summary);
}

#[test]
fn same_seed_gives_identical_trace() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = run_into(d.path(), &["--seed", "7"]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let ta = fs::read(a.path().join("trace.csv")).unwrap();
    let tb = fs::read(b.path().join("trace.csv")).unwrap();
    assert!(ta == tb, "traces differ for the same seed");
    assert!(String::from_utf8_lossy(&ta).starts_with("# asmc-sim"));
    assert!(String::from_utf8_lossy(&ta).lines().next().unwrap().contains("seed=7"));
}

#[test]
fn negative_gain_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenario()).unwrap();
    let bad = text.replacen("k1 = [", "k1 = [-", 1);
    assert_ne!(bad, text);
    let path = dir.path().join("bad.toml");
    fs::write(&path, bad).unwrap();
    let out = bin().arg("run").arg(&path).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gains.k1"), "{}", stderr(&out));
    assert!(!dir.path().join("trace.csv").exists());
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.toml");
    fs::write(&path, "[sim]\nduraton = 3.0\n").unwrap();
    let out = bin().arg("run").arg(&path).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("duraton"), "{}", stderr(&out));
}

const HEADER: &str = "t,q1,q2,qd1,qd2,dq1,dq2,eta1,eta2,tau1,tau2,tv1,tv2,tl1,tl2,phi1,phi2,phi3,V";

fn row(t: f64, dq1: f64) -> String {
    let mut v = [0.0; 19];
    v[0] = t;
    v[5] = dq1;
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[test]
fn metrics_on_hand_written_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.csv");
    let body = [HEADER.to_string(), row(0.0, 1.0), row(0.1, -2.0), row(0.2, 4.0)].join("\n");
    fs::write(&path, body + "\n").unwrap();
    let out = bin().arg("metrics").arg(&path).arg("--kv").output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let value = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{key}=")))
            .unwrap_or_else(|| panic!("{key} missing in\n{text}"))
            .parse()
            .unwrap()
    };
    assert_eq!(value("dq_max_deg1"), 4.0);
    assert!((value("dq_rms_deg1") - (7.0f64).sqrt()).abs() < 1e-12);
    assert_eq!(value("dq_max_deg2"), 0.0);
}

#[test]
fn malformed_traces_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("empty.csv", String::new()),
        ("header_only.csv", format!("{HEADER}\n")),
        ("wrong_header.csv", "a,b,c\n1,2,3\n".to_string()),
        ("bad_number.csv", format!("{HEADER}\n{}\n", row(0.0, 1.0).replacen('0', "x", 1))),
    ];
    for (name, body) in cases {
        let path = dir.path().join(name);
        fs::write(&path, body).unwrap();
        let out = bin().arg("metrics").arg(&path).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{name}: {}", stderr(&out));
    }
    let missing = bin().arg("metrics").arg(dir.path().join("nope.csv")).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
}

fn compare(seeds: &str) -> Output {
    bin()
        .arg("compare")
        .arg(scenario())
        .args(["--seeds", seeds, "--decimation", "8"])
        .output()
        .unwrap()
}

fn rms_means(text: &str, ctrl: &str) -> [f64; 2] {
    let line = text
        .lines()
        .find(|l| l.starts_with(ctrl) && l.contains("dq_rms_deg"))
        .unwrap_or_else(|| panic!("no {ctrl} row in\n{text}"));
    let nums: Vec<f64> = line
        .split_whitespace()
        .filter_map(|w| w.parse().ok())
        .collect();
    [nums[0], nums[2]]
}

#[test]
fn compare_single_seed_has_zero_spread() {
    let out = compare("3..4");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    for l in text.lines().skip(2) {
        assert_eq!(l.matches("± 0.000000").count(), 2, "{l}");
    }
}

#[test]
fn compare_empty_range_is_rejected() {
    let out = compare("4..4");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_adaptive_beats_pd() {
    let out = compare("0..5");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let a = rms_means(&text, "asmc");
    let p = rms_means(&text, "pd");
    assert!(a[0] < p[0] && a[1] < p[1], "asmc {a:?} vs pd {p:?}");
}
