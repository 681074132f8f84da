use std::path::Path;
use std::process::{Command, Output};

use boolnet_cli::config::digest_of;
use serde_json::Value;

fn boolnet(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_boolnet"));
    cmd.args(args).env_remove("BOOLNET_WORKERS");
    if let Some(w) = workers {
        cmd.env("BOOLNET_WORKERS", w);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

fn header(path: &Path) -> Vec<String> {
    csv::Reader::from_path(path).unwrap().headers().unwrap().iter().map(String::from).collect()
}

fn column(path: &Path, name: &str) -> usize {
    header(path).iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

/// CSV text with the wall_time column blanked.
fn without_wall_time(path: &Path) -> Vec<Vec<String>> {
    let w = column(path, "wall_time");
    rows(path)
        .iter()
        .map(|r| r.iter().enumerate().map(|(i, c)| if i == w { String::new() } else { c.to_string() }).collect())
        .collect()
}

const CHAIN: &str = r#"{"schema_version": 1, "experiment": "chain-analyze", "seed": 1,
    "params": {"n": 8, "steps": 10000, "eps": 0.1}}"#;

#[test]
fn small_chain_is_absorbed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CHAIN);
    let out = boolnet(&["run", &cfg, "--out", dir.path().to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("chain-analyze.csv");
    let (m, e, s) = (column(&csv, "metric"), column(&csv, "estimate"), column(&csv, "samples"));
    let all = rows(&csv);
    assert_eq!(all.len(), 1);
    let absorbed = &all[0];
    assert_eq!(&absorbed[m], "absorbed");
    assert!(absorbed[e].parse::<f64>().unwrap() >= 0.99);
    assert_eq!(&absorbed[s], "0");
}

#[test]
fn stability_grid_has_bound_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"schema_version": 1, "experiment": "conv-stability", "seed": 2,
            "params": {"n": 201, "eps": 0.1, "replicas": 2000}, "sweep": {"eps": [0.05, 0.1, 0.2]}}"#,
    );
    let out = boolnet(&["sweep", &cfg, "--out", dir.path().to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("conv-stability.csv");
    let (m, e, r, se) =
        (column(&csv, "metric"), column(&csv, "estimate"), column(&csv, "reference"), column(&csv, "stderr"));
    let flips = rows(&csv);
    assert_eq!(flips.len(), 3);
    assert!(flips.iter().all(|x| &x[m] == "flip_probability"));
    for f in flips {
        let (p, b, s): (f64, f64, f64) = (f[e].parse().unwrap(), f[r].parse().unwrap(), f[se].parse().unwrap());
        assert!(p <= b + 4.0 * s, "{p} above bound {b}");
    }
}

#[test]
fn output_is_deterministic_across_reruns_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "f.json",
        r#"{"schema_version": 1, "experiment": "ffnn-sensitivity", "seed": 5,
            "params": {"n": 16, "depth": 3, "eps": 0.1, "samples": 3000},
            "sweep": {"rho": [0.3, 0.9]}}"#,
    );
    let mut tables = Vec::new();
    let mut sidecars = Vec::new();
    for (i, w) in ["1", "3", "1"].iter().enumerate() {
        let out_dir = dir.path().join(format!("o{i}"));
        let o = out_dir.to_str().unwrap();
        let out = if i == 1 {
            boolnet(&["sweep", &cfg, "--out", o, "--workers", w], Some("2"))
        } else {
            boolnet(&["sweep", &cfg, "--out", o], Some(w))
        };
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        tables.push(without_wall_time(&out_dir.join("ffnn-sensitivity.csv")));
        sidecars.push(std::fs::read(out_dir.join("ffnn-sensitivity.json")).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
    assert_eq!(tables[0], tables[2]);
    assert_eq!(sidecars[0], sidecars[1]);
    assert_eq!(tables[0].len(), 2);
}

#[test]
fn digest_matches_sidecar_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CHAIN);
    let o = dir.path().to_str().unwrap();
    assert!(boolnet(&["run", &cfg, "--out", o, "--seed", "99"], None).status.success());
    let side: Value = serde_json::from_slice(&std::fs::read(dir.path().join("chain-analyze.json")).unwrap()).unwrap();
    assert_eq!(side["config"]["seed"], 99);
    let digest = digest_of(&side["config"]);
    assert_eq!(side["config_digest"], Value::from(digest.clone()));
    let csv = dir.path().join("chain-analyze.csv");
    let (d, s) = (column(&csv, "config_digest"), column(&csv, "seed"));
    assert!(rows(&csv).iter().all(|r| r[d] == digest && &r[s] == "99"));
}

#[test]
fn invalid_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let bad = [
        r#"{"schema_version": 1, "experiment": "chain-analyze", "seed": 1, "params": {"n": 8, "steps": 3, "eps": 0.1}, "extra": 1}"#,
        r#"{"schema_version": 1, "experiment": "chain-analyze", "seed": 1, "params": {"n": 8, "steps": 3, "eps": 0.1, "colour": 1}}"#,
        r#"{"schema_version": 1, "experiment": "chain-analyze", "seed": 1, "params": {"n": 8, "steps": 3, "eps": 0.9}}"#,
        r#"{"schema_version": 7, "experiment": "chain-analyze", "seed": 1, "params": {"n": 8, "steps": 3, "eps": 0.1}}"#,
        r#"{"schema_version": 1, "experiment": "nope", "seed": 1, "params": {}}"#,
        "not json",
    ];
    for (i, text) in bad.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("b{i}.json"), text);
        assert_eq!(boolnet(&["run", &cfg, "--out", o], None).status.code(), Some(2), "{text}");
    }
    let big = write_config(
        dir.path(),
        "big.json",
        r#"{"schema_version": 1, "experiment": "chain-analyze", "seed": 1, "max_points": 3,
            "params": {"n": 8, "steps": 3, "eps": 0.1}, "sweep": {"n": [2, 4], "steps": [1, 2]}}"#,
    );
    assert_eq!(boolnet(&["sweep", &big, "--out", o], None).status.code(), Some(2));
    // A sweep config must go through `sweep`, and `sweep` needs a grid.
    assert_eq!(boolnet(&["run", &big, "--out", o], None).status.code(), Some(2));
    let single = write_config(dir.path(), "c.json", CHAIN);
    assert_eq!(boolnet(&["sweep", &single, "--out", o], None).status.code(), Some(2));
    assert_eq!(boolnet(&["run", "/nonexistent/c.json"], None).status.code(), Some(2));
    assert!(!dir.path().join("chain-analyze.csv").exists());
}

#[test]
fn eps_families_resolve_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e.json",
        r#"{"schema_version": 1, "experiment": "chain-analyze", "seed": 1,
            "params": {"n": 16, "steps": 5, "eps": {"form": "power", "c": 1.0, "alpha": 0.5}},
            "sweep": {"n": [16, 64], "eps": [{"form": "power", "c": 1.0, "alpha": 0.5}, {"form": "inverse-log", "c": 0.5}, 0.25]}}"#,
    );
    let out = boolnet(&["sweep", &cfg, "--out", dir.path().to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("chain-analyze.csv");
    let (n, e) = (column(&csv, "n"), column(&csv, "eps_value"));
    let rs = rows(&csv);
    assert_eq!(rs.len(), 6);
    let mut seen = Vec::new();
    for r in rs {
        let nn: f64 = r[n].parse().unwrap();
        seen.push((nn, r[e].parse::<f64>().unwrap()));
    }
    let expect = |n: f64| [1.0 / n.sqrt(), 0.5 / n.ln(), 0.25];
    for (nn, eps) in seen {
        assert!(expect(nn).iter().any(|x| (x - eps).abs() < 1e-15), "n = {nn}, eps = {eps}");
    }
}

#[test]
fn sweep_row_count_and_sidecar_toggle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "r.json",
        r#"{"schema_version": 1, "experiment": "revealment", "seed": 4, "sidecar": false, "output": "rev.csv",
            "params": {"depth": 3, "replicas": 500}, "sweep": {"depth": [2, 3, 4]}}"#,
    );
    let out = boolnet(&["sweep", &cfg, "--out", dir.path().to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("rev.csv");
    assert_eq!(rows(&csv).len(), 3);
    column(&csv, "mean_queries_stderr");
    assert!(!dir.path().join("rev.json").exists());
}

#[test]
fn selftest_passes() {
    let out = boolnet(&["selftest"], None);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}
