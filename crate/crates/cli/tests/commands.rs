use std::path::Path;
use std::process::{Command, Output};

use structscan::experiments::ExperimentReport;
use structscan::io;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_structscan"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn estimate_interval() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("x.csv"), "index,value\n0,0\n1,5\n2,5\n3,0\n").unwrap();
    let o = run(
        dir.path(),
        &["estimate", "--family", "interval", "--estimator", "mle", "--input", "x.csv", "-o", "est.json"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&dir.path().join("est.json"));
    assert_eq!(v["set"], serde_json::json!([1, 2]));
    assert!((v["score"].as_f64().unwrap() - 10.0 / 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(v["solver"], "exact");
    assert_eq!(v["seed"], 0);
    assert_eq!(v["content_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn disease_toy() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.csv"), "index,count,baseline\n0,5,2\n1,1,2\n").unwrap();
    let o = run(dir.path(), &["disease", "--input", "c.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["set"], serde_json::json!([0]));
    assert_eq!(v["command"], "disease");
}

#[test]
fn estimate_with_gmm_writes_the_fit() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["sample", "--family", "unstructured", "--n", "400", "--k", "40", "--mu", "4", "--seed", "3", "-o", "x.csv"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let meta = json(&dir.path().join("x.meta.json"));
    assert_eq!(meta["anomaly"].as_array().unwrap().len(), 40);
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"family": {"kind": "unstructured"}, "estimator": "gmm", "input": "x.csv", "fit_output": "fit.json"}"#,
    )
    .unwrap();
    let o = run(dir.path(), &["estimate", "--config", "cfg.json", "--seed", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let size = v["size"].as_u64().unwrap();
    assert!((30..=50).contains(&size), "{size}");
    let fit = io::read_fit(dir.path().join("fit.json")).unwrap();
    assert_eq!(fit.responsibilities.len(), 400);
}

#[test]
fn same_seed_same_sample() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sample", "--family", "interval", "--n", "50", "--k", "5", "--mu", "2", "--seed", "9"];
    for out in ["a.csv", "b.csv"] {
        let mut a = args.to_vec();
        a.extend(["-o", out]);
        assert!(run(dir.path(), &a).status.success());
    }
    let read = |p| std::fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
}

#[test]
fn bias_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bias.json"),
        r#"{"command": "bias", "family": {"kind": "interval", "n": 100}, "k": 5, "mu_grid": [1, 3], "trials": 6}"#,
    )
    .unwrap();
    let o = run(dir.path(), &["bias", "--config", "bias.json", "--seed", "4", "-o", "rep.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rep: ExperimentReport = io::read_report(dir.path().join("rep.json"), dir.path().join("rep.csv")).unwrap();
    assert_eq!(rep.rows.len(), 12);
    assert_eq!(rep.config.seed, 4);
    let header = std::fs::read_to_string(dir.path().join("rep.csv")).unwrap();
    assert!(header.starts_with(&io::TRIAL_COLUMNS.join(",")));
    // thread count does not change results
    let o = Command::new(env!("CARGO_BIN_EXE_structscan"))
        .current_dir(dir.path())
        .env("STRUCTSCAN_THREADS", "1")
        .args(["bias", "--config", "bias.json", "--seed", "4", "-o", "rep1.json"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(
        std::fs::read(dir.path().join("rep.csv")).unwrap(),
        std::fs::read(dir.path().join("rep1.csv")).unwrap()
    );
}

#[test]
fn bias_requires_a_seed_and_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["bias", "--family", "graph_cut", "--estimator", "best"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    for needle in ["`seed` is required", "`output` is required", "unknown estimator", "needs `rho`", "mu_grid"] {
        assert!(e.contains(needle), "missing {needle:?} in {e}");
    }
}

#[test]
fn bad_input_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("x.csv"), "index,value\n0,1\n0,2\n").unwrap();
    let o = run(dir.path(), &["estimate", "--family", "interval", "--input", "x.csv"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 3"));
}

#[test]
fn infeasible_sampling_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"family": {"kind": "graph_cut", "rho": 1, "graph": {"kind": "lattice"}, "n": 16}, "k": 8, "mu": 1}"#,
    )
    .unwrap();
    let o = run(dir.path(), &["sample", "--config", "cfg.json", "--seed", "1", "-o", "x.csv"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn config_for_another_command_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"command": "bias"}"#).unwrap();
    let o = run(dir.path(), &["estimate", "--config", "c.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn export_ilp_writes_lp() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("x.csv"), "index,value\n0,1\n1,-1\n2,2\n3,0.5\n").unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"family": {"kind": "connected", "graph": {"kind": "path", "seed": 0}}, "size": 2, "input": "x.csv", "output": "m.lp"}"#,
    )
    .unwrap();
    let o = run(dir.path(), &["export-ilp", "--config", "cfg.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lp = std::fs::read_to_string(dir.path().join("m.lp")).unwrap();
    assert!(lp.starts_with("\\ seed = 0\n\\ content_hash = "));
    assert!(lp.contains("obj: 1 y_0 - 1 y_1 + 2 y_2 + 0.5 y_3"));
    assert!(lp.contains("f_2_3"));
}

#[test]
fn asymptotic_bias_prints() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["asymptotic-bias", "--alpha", "0.1", "--mu", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let b = v["values"][0]["bias"].as_f64().unwrap();
    assert!((b - 0.1708).abs() < 1e-3, "{b}");
}
