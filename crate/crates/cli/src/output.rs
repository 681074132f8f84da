//! Running a loaded config and writing its CSV and sidecar.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use boolnet_core::SeedStream;

use crate::config::{Loaded, SCHEMA_VERSION};
use crate::experiments::{Job, Metric};
use crate::CliError;

/// Fixed columns before and after the parameter columns.
pub const LEADING: [&str; 3] = ["config_digest", "experiment", "point"];
pub const PRIMARY: [&str; 6] = ["eps_value", "metric", "estimate", "stderr", "samples", "reference"];
pub const TRAILING: [&str; 2] = ["seed", "wall_time"];

#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub index: usize,
    pub params: serde_json::Map<String, Value>,
    pub eps: Option<f64>,
    pub metrics: Vec<Metric>,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub csv: PathBuf,
    pub sidecar: Option<PathBuf>,
    pub digest: String,
    pub points: Vec<PointOutcome>,
}

/// Seed stream of point `index`.
pub fn point_seed(loaded: &Loaded, index: usize) -> SeedStream {
    SeedStream::new(loaded.config.seed).named(loaded.config.experiment.name()).child(index as u64)
}

/// Validate every point, then run them in order.
pub fn run_points(loaded: &Loaded) -> Result<Vec<PointOutcome>, CliError> {
    let kind = loaded.config.experiment;
    let jobs: Vec<Job> = loaded.points()?.iter().map(|p| Job::prepare(kind, p)).collect::<Result<_, _>>()?;
    jobs.iter()
        .enumerate()
        .map(|(index, job)| {
            let start = Instant::now();
            let metrics = job.run(&point_seed(loaded, index))?;
            let params = match job.resolved() {
                Value::Object(m) => m,
                _ => unreachable!("parameter structs serialize to objects"),
            };
            Ok(PointOutcome { index, params, eps: job.eps_value(), metrics, wall_time: start.elapsed().as_secs_f64() })
        })
        .collect()
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per point. The primary metric fills `metric`, `estimate`, `stderr`,
/// `samples` and `reference`; every other metric gets `<name>` and `<name>_stderr`
/// columns (plus `<name>_reference` when it has one), in first-seen order.
pub fn write_csv<W: std::io::Write>(
    w: W,
    digest: &str,
    loaded: &Loaded,
    points: &[PointOutcome],
) -> Result<(), CliError> {
    let keys: BTreeSet<&String> = points.iter().flat_map(|p| p.params.keys()).collect();
    let mut extra: Vec<(&str, bool)> = Vec::new();
    for m in points.iter().flat_map(|p| p.metrics.iter().skip(1)) {
        match extra.iter_mut().find(|(n, _)| *n == m.name) {
            Some(e) => e.1 |= m.reference.is_some(),
            None => extra.push((&m.name, m.reference.is_some())),
        }
    }
    let mut header: Vec<String> = LEADING.iter().map(|s| s.to_string()).collect();
    header.extend(keys.iter().map(|k| k.to_string()));
    header.extend(PRIMARY.iter().map(|s| s.to_string()));
    for (name, has_ref) in &extra {
        header.push(name.to_string());
        header.push(format!("{name}_stderr"));
        if *has_ref {
            header.push(format!("{name}_reference"));
        }
    }
    header.extend(TRAILING.iter().map(|s| s.to_string()));

    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    out.write_record(&header).map_err(io)?;
    for p in points {
        let primary = p.metrics.first().ok_or_else(|| CliError::Numeric("point produced no metrics".into()))?;
        let mut row = vec![digest.to_string(), loaded.config.experiment.name().to_string(), p.index.to_string()];
        row.extend(keys.iter().map(|k| p.params.get(*k).map(cell).unwrap_or_default()));
        row.extend([
            opt(p.eps),
            primary.name.clone(),
            primary.estimate.to_string(),
            primary.stderr.to_string(),
            primary.samples.to_string(),
            opt(primary.reference),
        ]);
        for (name, has_ref) in &extra {
            let m = p.metrics.iter().skip(1).find(|m| m.name == *name);
            row.push(opt(m.map(|m| m.estimate)));
            row.push(opt(m.map(|m| m.stderr)));
            if *has_ref {
                row.push(opt(m.and_then(|m| m.reference)));
            }
        }
        row.extend([loaded.config.seed.to_string(), format!("{:.6}", p.wall_time)]);
        out.write_record(&row).map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

pub fn sidecar_json(digest: &str, loaded: &Loaded, csv_name: &str, points: &[PointOutcome]) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "config_digest": digest,
        "config": loaded.value,
        "csv": csv_name,
        "points": points.len(),
        "version": env!("CARGO_PKG_VERSION"),
    })
}

/// Run a config and write its outputs into `out_dir`.
pub fn execute(loaded: &Loaded, out_dir: &Path) -> Result<RunSummary, CliError> {
    let name = loaded.config.output.clone().unwrap_or_else(|| format!("{}.csv", loaded.config.experiment.name()));
    if name.is_empty() || Path::new(&name).components().count() != 1 {
        return Err(CliError::Config(format!("output `{name}` must be a plain file name")));
    }
    let digest = loaded.digest();
    let points = run_points(loaded)?;
    fs::create_dir_all(out_dir)?;
    let csv = out_dir.join(&name);
    write_csv(fs::File::create(&csv)?, &digest, loaded, &points)?;
    let sidecar = if loaded.config.sidecar {
        let path = csv.with_extension("json");
        let text =
            serde_json::to_string_pretty(&sidecar_json(&digest, loaded, &name, &points)).expect("JSON serializes");
        fs::write(&path, text + "\n")?;
        Some(path)
    } else {
        None
    };
    Ok(RunSummary { csv, sidecar, digest, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let loaded = Loaded::parse(
            r#"{"schema_version": 1, "experiment": "chain-analyze", "seed": 3,
                "params": {"n": 8, "steps": 100, "eps": 0.1}, "sweep": {"n": [4, 8]}}"#,
        )
        .unwrap();
        let pts = run_points(&loaded).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, "abc", &loaded, &pts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "config_digest,experiment,point,band_delta,eps,n,replicas,rho,steps,\
             eps_value,metric,estimate,stderr,samples,reference,\
             absorbed_at_0,absorbed_at_0_stderr,absorbed_at_n,absorbed_at_n_stderr,band_hit,band_hit_stderr,\
             seed,wall_time"
        );
        assert_eq!(text.lines().count(), 1 + 2);
        assert!(lines.next().unwrap().starts_with("abc,chain-analyze,0,0.1,0.1,4,10000,,100,0.1,absorbed,"));
    }
}
