use std::path::Path;
use std::process::{Command, Output};

const SMALL: &[&str] = &[
    "--override",
    "train_samples=4000",
    "--override",
    "eval_samples=4000",
    "--override",
    "metrics.nfft=1024",
];

fn pimcancel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pimcancel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_small(verb: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![verb, "--out", out.to_str().unwrap()];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    let o = pimcancel(&args);
    assert!(o.status.success(), "{verb} failed: {}", stderr(&o));
    o
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn plan_b1_b3_midpoints() {
    let o = pimcancel(&[
        "plan", "--f1", "1950", "--bw1", "5", "--f2", "1745", "--bw2", "5",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let verdicts: Vec<&str> = v["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap())
        .collect();
    assert_eq!(verdicts, vec!["upper IM3 hits B1 downlink"]);
    assert_eq!(v["products"][0]["center_mhz"], 2155.0);
    assert_eq!(v["products"][0]["bandwidth_mhz"], 15.0);
}

#[test]
fn plan_accepts_band_names() {
    let by_name = pimcancel(&["plan", "--f1", "B1", "--f2", "b3"]);
    let by_value = pimcancel(&["plan", "--f1", "1950", "--f2", "1745"]);
    assert!(by_name.status.success());
    assert_eq!(stdout(&by_name), stdout(&by_value));
}

#[test]
fn plan_unknown_band_lists_available() {
    let o = pimcancel(&["plan", "--f1", "B1", "--f2", "B3", "--bands", "B7"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("B7") && err.contains("B1, B3"), "{err}");
}

#[test]
fn plan_colocated_carriers() {
    let o = pimcancel(&["plan", "--f1", "2140", "--f2", "2140"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["colocated"], true);
    assert_eq!(v["products"][0]["center_mhz"], 2140.0);
    assert_eq!(v["products"][1]["center_mhz"], 2140.0);
}

#[test]
fn selftest_passes() {
    let o = pimcancel(&["selftest"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().filter(|l| l.starts_with("PASS")).count() >= 9);
    assert!(!out.contains("FAIL"));
}

#[test]
fn malformed_config_leaves_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "seed = \n[carrier1\n").unwrap();
    let out = dir.path().join("run");
    let o = pimcancel(&[
        "cancel",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error:"));
    assert!(!out.exists());

    std::fs::write(&cfg, "no_such_key = 1\n").unwrap();
    let o = pimcancel(&[
        "cancel",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(!out.exists());
}

#[test]
fn bad_override_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = pimcancel(&[
        "cancel",
        "--out",
        out.to_str().unwrap(),
        "--override",
        "metrics.overlap=2",
    ]);
    assert!(!o.status.success());
    assert!(!out.exists());
}

#[test]
fn cancel_writes_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    run_small("cancel", &out, &["--dbm-offset", "-30"]);
    for f in [
        "config.toml",
        "frontend.toml",
        "coefficients.json",
        "terms.txt",
        "report.json",
        "psd_pre.csv",
        "psd_post.csv",
        "psd_noise.csv",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let psd = std::fs::read_to_string(out.join("psd_post.csv")).unwrap();
    assert_eq!(psd.lines().next(), Some("freq_hz,psd_db_per_hz"));
    assert_eq!(psd.lines().count(), 1025);
    let r = report(&out);
    assert!(r["suppression_db"].as_f64().unwrap() > 0.0);
    assert_eq!(r["terms"], 102);
    let pre = r["pre_power_db"].as_f64().unwrap();
    assert_eq!(r["dbm"]["pre_power_dbm"].as_f64().unwrap(), pre - 30.0);
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_small("cancel", &a, &["--seed", "17"]);
    run_small("cancel", &b, &["--seed", "17"]);
    for f in [
        "psd_pre.csv",
        "psd_post.csv",
        "psd_noise.csv",
        "report.json",
        "coefficients.json",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let c = dir.path().join("c");
    run_small("cancel", &c, &["--seed", "18"]);
    assert_ne!(
        std::fs::read(a.join("psd_pre.csv")).unwrap(),
        std::fs::read(c.join("psd_pre.csv")).unwrap()
    );
}

#[test]
fn model_flag_selects_basis() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    run_small("cancel", &out, &["--model", "memoryless"]);
    let r = report(&out);
    assert_eq!(r["terms"], 8);
    assert_eq!(r["canceller"]["kind"], "memoryless_tx");
}

#[test]
fn train_then_cancel_with_saved_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let (t, c, full) = (
        dir.path().join("t"),
        dir.path().join("c"),
        dir.path().join("full"),
    );
    run_small("train", &t, &[]);
    assert!(t.join("diagnostics.json").is_file());
    let coef = t.join("coefficients.json");
    run_small("cancel", &c, &["--coefficients", coef.to_str().unwrap()]);
    run_small("cancel", &full, &[]);
    assert_eq!(report(&c)["post_power_db"], report(&full)["post_power_db"]);
    assert_eq!(
        std::fs::read(c.join("psd_post.csv")).unwrap(),
        std::fs::read(full.join("psd_post.csv")).unwrap()
    );
}

#[test]
fn simulate_writes_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    run_small("simulate", &out, &["--diversity"]);
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("simulation.json")).unwrap())
            .unwrap();
    assert_eq!(s["receiver"], "diversity");
    assert!(out.join("psd_rx.csv").is_file());
}

#[test]
fn sweep_diversity_is_ten_db_down() {
    let dir = tempfile::tempdir().unwrap();
    let (m, d) = (dir.path().join("m"), dir.path().join("d"));
    let values = ["--override", "sweep.values=[-18.0, -14.0]"];
    run_small("sweep", &m, &values);
    run_small("sweep", &d, &[values[0], values[1], "--diversity"]);
    let rows = |p: &Path| -> Vec<Vec<f64>> {
        let text = std::fs::read_to_string(p.join("sweep.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("tx_power_db,pim_power_db,residual_db,suppression_db")
        );
        lines
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect()
    };
    let (rm, rd) = (rows(&m), rows(&d));
    assert_eq!(rm.len(), 2);
    for (a, b) in rm.iter().zip(&rd) {
        assert_eq!(a[0], b[0]);
        assert!((a[1] - b[1] - 10.0).abs() < 1e-9, "{a:?} {b:?}");
    }
}
