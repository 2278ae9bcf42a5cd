use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command as Process;

use heatpoint_cli::config::{AnchorInput, ExperimentConfig};
use heatpoint_cli::output::inventory;
use heatpoint_cli::{run, Command};
use heatpoint_core::AnchorPoint;
use serde_json::Value;
use sha2::{Digest, Sha256};

fn small(out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        anchor: AnchorInput::Point(AnchorPoint::rational(3, 10).unwrap()),
        horizon: 0.5,
        eps_count: 3,
        n_start: 4,
        n_max: 16,
        classify_n_max: 200,
        datum: vec![1.0, 0.0, 0.5],
        signal_samples: 11,
        out: out.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

fn read_json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    inventory(dir).unwrap().into_iter().map(|f| (f.path.clone(), fs::read(dir.join(&f.path)).unwrap())).collect()
}

fn csv_column(dir: &Path, name: &str, column: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(dir.join(name)).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == column).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].to_string()).collect()
}

#[test]
fn config_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let mut configs = vec![ExperimentConfig::default(), small(tmp.path())];
    let mut c = ExperimentConfig::default();
    c.anchor = AnchorInput::constructed(1.0, 1);
    c.bits = vec![256, 1024];
    configs.push(c);
    let mut c = ExperimentConfig::default();
    c.anchor = AnchorInput::Point(AnchorPoint::quadratic(-1, 1, 5, 2).unwrap());
    c.eps_start = 0.1;
    c.eps_ratio = 0.7;
    configs.push(c);
    for c in configs {
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json(), c.to_json());
    }
}

#[test]
fn manifest_lists_every_file_with_its_checksum() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let summary = run(Command::All, &small(&out)).unwrap();
    assert_eq!(summary.tasks.len(), 4);
    let m = read_json(&out, "manifest.json");
    let listed: BTreeMap<String, String> = m["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| (f["path"].as_str().unwrap().to_string(), f["sha256"].as_str().unwrap().to_string()))
        .collect();
    let on_disk: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert_eq!(on_disk.len(), listed.len() + 1);
    for name in on_disk.iter().filter(|n| *n != "manifest.json") {
        let digest = hex::encode(Sha256::digest(fs::read(out.join(name)).unwrap()));
        assert_eq!(listed[name], digest, "{name}");
    }
    for name in ["classify.json", "exponents.csv", "sweep.csv", "fit.json", "plot.dat", "plot.gp", "control.json", "signals.csv", "blowup.csv", "lemmas.json", "config.json"] {
        assert!(listed.contains_key(name), "{name}");
    }
    assert_eq!(m["tool"], "heatpoint");
    assert_eq!(ExperimentConfig::from_json(&m["config"].to_string()).unwrap(), small(&out));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let mut cfg = small(&out);
    cfg.jobs = 1;
    run(Command::All, &cfg).unwrap();
    let first = files(&out);
    fs::remove_dir_all(&out).unwrap();
    run(Command::All, &cfg).unwrap();
    assert_eq!(files(&out), first);
    // the worker count changes only the echoed config
    fs::remove_dir_all(&out).unwrap();
    cfg.jobs = 4;
    run(Command::All, &cfg).unwrap();
    let third = files(&out);
    for (k, v) in &first {
        if k != "config.json" && k != "manifest.json" {
            assert_eq!(&third[k], v, "{k}");
        }
    }
}

#[test]
fn classify_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("half");
    let mut cfg = small(&out);
    cfg.anchor = AnchorInput::Point(AnchorPoint::rational(1, 2).unwrap());
    run(Command::Classify, &cfg).unwrap();
    let r = read_json(&out, "classify.json");
    assert_eq!(r["estimate"]["t0_lower"], "+inf");
    assert_eq!(r["estimate"]["resonance"], 2);
    assert_eq!(r["series_at_horizon"]["verdict"], "resonant");
    assert_eq!(csv_column(&out, "exponents.csv", "exponent")[1], "inf");

    let out = tmp.path().join("sqrt2");
    cfg.anchor = AnchorInput::Point(AnchorPoint::sqrt2_minus_1());
    cfg.out = out.clone();
    cfg.classify_n_max = 1000;
    run(Command::Classify, &cfg).unwrap();
    let r = read_json(&out, "classify.json");
    assert!(r["estimate"]["t0_lower"].as_f64().unwrap() < 1e-3);
    assert_eq!(csv_column(&out, "exponents.csv", "n").len(), 1000);

    let out = tmp.path().join("constructed");
    cfg.anchor = AnchorInput::constructed(1.0, 1);
    cfg.out = out.clone();
    run(Command::Classify, &cfg).unwrap();
    let r = read_json(&out, "classify.json");
    let scales = r["scales"].as_array().unwrap();
    assert_eq!(scales.len(), 1);
    assert!((scales[0]["exponent"].as_f64().unwrap() - 1.0).abs() < 0.2);
}

#[test]
fn control_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    let mut cfg = small(&out);
    cfg.eps_start = 0.1;
    run(Command::Control, &cfg).unwrap();
    let r = read_json(&out, "control.json");
    let moment = &r["controls"][0];
    assert_eq!(moment["name"], "moment-interval");
    assert!(moment["report"]["residual_norm"].as_f64().unwrap() <= 1e-6);
    assert_eq!(csv_column(&out, "signals.csv", "t").len(), 11);

    // φ2 at the node 1/2
    let out = tmp.path().join("b");
    cfg.out = out.clone();
    cfg.anchor = AnchorInput::Point(AnchorPoint::rational(1, 2).unwrap());
    cfg.datum = vec![0.0, 1.0];
    cfg.horizon = 1.0;
    cfg.eps_start = 0.125;
    cfg.eps_count = 5;
    let s = run(Command::Control, &cfg).unwrap();
    assert_eq!(s.exit_code(), 3);
    let r = read_json(&out, "control.json");
    let point = r["controls"].as_array().unwrap().iter().find(|c| c["name"] == "moment-point").unwrap();
    assert_eq!(point["error"]["kind"], "not-pointwise-controllable");
    let scaled: Vec<f64> = csv_column(&out, "blowup.csv", "scaled_norm").iter().map(|v| v.parse().unwrap()).collect();
    assert!(scaled.windows(2).all(|w| w[1] > w[0]));
    assert!(scaled[4] / scaled[0] >= 2.0);
}

#[test]
fn lemma_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    let mut cfg = small(&out);
    let s = run(Command::Lemmas, &cfg).unwrap();
    assert_eq!(s.exit_code(), 0);
    let r = read_json(&out, "lemmas.json");
    assert!(r["sequence"]["margins"].as_f64().unwrap() >= 1.0);
    assert!(r["ineqsin"]["min_ratio"].as_f64().unwrap() > 0.0);
    assert!(r["family"]["growth"]["slope"].as_f64().unwrap() > 0.0);
    assert_eq!(r["family"]["norms"].as_array().unwrap().len(), 10);

    cfg.lemma_delta = 5.0;
    cfg.out = tmp.path().join("b");
    run(Command::Lemmas, &cfg).unwrap();
    let r = read_json(&cfg.out, "lemmas.json");
    assert!(r["sequence"]["margins"].as_f64().unwrap() > 1.0);
    assert!(r["sequence"]["draws"].as_array().unwrap().iter().all(|d| d.as_u64().unwrap() <= 3));
}

#[test]
fn sweep_flags_unconverged_points() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    let s = run(Command::ObsSweep, &small(&out)).unwrap();
    assert_eq!(s.exit_code(), 3);
    let fit = read_json(&out, "fit.json");
    let converged = csv_column(&out, "sweep.csv", "converged");
    let used = fit["used"].as_array().unwrap().len();
    assert_eq!(used, converged.iter().filter(|c| *c == "true").count());
    assert_eq!(fit["excluded"].as_array().unwrap().len(), 3 - used);
    let plot = fs::read_to_string(out.join("plot.dat")).unwrap();
    assert_eq!(plot.lines().count(), used + 1);
}

fn heatpoint(args: &[&str]) -> i32 {
    Process::new(env!("CARGO_BIN_EXE_heatpoint")).args(args).output().unwrap().status.code().unwrap()
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = |n: &str| tmp.path().join(n).to_string_lossy().into_owned();
    let write = |n: &str, body: &str| {
        let p = tmp.path().join(n);
        fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    };
    let bad = write("bad.json", r#"{"eps_count": 0}"#);
    assert_eq!(heatpoint(&["lemmas", "--config", &bad, "--out", &dir("x")]), 2);
    let unknown = write("unknown.json", r#"{"epsilon": 0.1}"#);
    assert_eq!(heatpoint(&["lemmas", "--config", &unknown, "--out", &dir("x")]), 2);
    assert_eq!(heatpoint(&["lemmas", "--config", &dir("missing.json")]), 2);
    assert_eq!(heatpoint(&["lemmas", "--bits", "256,128", "--out", &dir("x")]), 2);

    let ok = write("ok.json", &small(Path::new("unused")).to_json());
    assert_eq!(heatpoint(&["lemmas", "--config", &ok, "--out", &dir("ok"), "--seed", "3", "--jobs", "2"]), 0);
    let echoed = read_json(&tmp.path().join("ok"), "config.json");
    assert_eq!(echoed["seed"], 3);
    assert_eq!(echoed["jobs"], 2);
    assert_eq!(heatpoint(&["obs-sweep", "--config", &ok, "--out", &dir("partial"), "--bits", "128,256"]), 3);

    // the output path is a regular file
    let blocked = write("blocked", "");
    assert_eq!(heatpoint(&["lemmas", "--config", &ok, "--out", &blocked]), 4);
}
