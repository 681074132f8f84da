//! Experiment configuration files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "experiment": "chain-analyze",
//!   "seed": 7,
//!   "params": { "n": 8, "steps": 10000, "eps": 0.1 },
//!   "sweep": { "n": [8, 16, 32] },
//!   "max_points": 100
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_MAX_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    FfnnSensitivity,
    ChainAnalyze,
    ConvStability,
    ConvFreeze,
    Revealment,
    BoundsCheck,
    Decomposition,
    Mk,
    SharpThreshold,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::FfnnSensitivity => "ffnn-sensitivity",
            Self::ChainAnalyze => "chain-analyze",
            Self::ConvStability => "conv-stability",
            Self::ConvFreeze => "conv-freeze",
            Self::Revealment => "revealment",
            Self::BoundsCheck => "bounds-check",
            Self::Decomposition => "decomposition",
            Self::Mk => "mk",
            Self::SharpThreshold => "sharp-threshold",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub seed: u64,
    /// CSV file name inside the output directory; defaults to `<experiment>.csv`.
    #[serde(default)]
    pub output: Option<String>,
    /// Write a JSON sidecar next to the CSV.
    #[serde(default = "default_true")]
    pub sidecar: bool,
    #[serde(default)]
    pub max_points: Option<usize>,
    pub params: serde_json::Map<String, Value>,
    #[serde(default)]
    pub sweep: Option<BTreeMap<String, Vec<Value>>>,
}

fn default_true() -> bool {
    true
}

/// A parsed config together with the exact JSON it came from.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: Config,
    pub value: Value,
}

impl Loaded {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
        let config: Config =
            serde_json::from_value(value.clone()).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                config.schema_version
            )));
        }
        Ok(Self { config, value })
    }

    /// Replace the root seed (the `--seed` flag).
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.config.seed = seed;
        self.value["seed"] = Value::from(seed);
        self
    }

    /// SHA-256 of the effective config as compact JSON with sorted keys.
    pub fn digest(&self) -> String {
        digest_of(&self.value)
    }

    /// Parameter sets to run: the base params, or the cartesian product of the sweep grid over them.
    pub fn points(&self) -> Result<Vec<serde_json::Map<String, Value>>, CliError> {
        let base = self.config.params.clone();
        let Some(grid) = &self.config.sweep else {
            return Ok(vec![base]);
        };
        let max = self.config.max_points.unwrap_or(DEFAULT_MAX_POINTS);
        let mut total: usize = 1;
        for (k, vals) in grid {
            if vals.is_empty() {
                return Err(CliError::Config(format!("sweep axis `{k}` is empty")));
            }
            total = total.saturating_mul(vals.len());
        }
        if total > max {
            return Err(CliError::Config(format!("sweep has {total} points, more than max_points = {max}")));
        }
        let mut points = vec![base];
        for (k, vals) in grid {
            points = points
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |v| {
                        let mut q = p.clone();
                        q.insert(k.clone(), v.clone());
                        q
                    })
                })
                .collect();
        }
        Ok(points)
    }
}

pub fn digest_of(value: &Value) -> String {
    let canonical = serde_json::to_string(value).expect("JSON values serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// A noise level or a level sequence evaluated at the configured n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsSpec {
    Value(f64),
    Family(EpsFamily),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EpsFamily {
    Constant {
        c: f64,
    },
    /// c·n^(−alpha)
    Power {
        c: f64,
        alpha: f64,
    },
    /// c / ln n
    InverseLog {
        c: f64,
    },
}

impl EpsSpec {
    pub fn at(self, n: usize) -> Result<f64, CliError> {
        let eps = match self {
            Self::Value(e) | Self::Family(EpsFamily::Constant { c: e }) => e,
            Self::Family(EpsFamily::Power { c, alpha }) => c * (n as f64).powf(-alpha),
            Self::Family(EpsFamily::InverseLog { c }) => {
                if n < 2 {
                    return Err(CliError::Config("c/log n needs n >= 2".into()));
                }
                c / (n as f64).ln()
            }
        };
        if !(0.0..=0.5).contains(&eps) {
            return Err(CliError::Config(format!("noise level {eps} (at n = {n}) outside [0, 1/2]")));
        }
        Ok(eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> String {
        format!(r#"{{"schema_version": 1, "experiment": "chain-analyze", "seed": 1, "params": {{"n": 8}}{extra}}}"#)
    }

    #[test]
    fn strict_parsing() {
        assert!(Loaded::parse(&cfg("")).is_ok());
        assert!(Loaded::parse(&cfg(r#", "colour": 1"#)).is_err());
        assert!(Loaded::parse(&cfg("").replace("\"schema_version\": 1", "\"schema_version\": 2")).is_err());
        assert!(Loaded::parse("{").is_err());
    }

    #[test]
    fn sweep_grid_and_guard() {
        let l = Loaded::parse(&cfg(r#", "sweep": {"n": [4, 8], "steps": [1, 2, 3]}"#)).unwrap();
        let pts = l.points().unwrap();
        assert_eq!(pts.len(), 6);
        assert!(pts.iter().all(|p| p.contains_key("steps")));
        let l = Loaded::parse(&cfg(r#", "sweep": {"n": [4, 8], "steps": [1, 2, 3]}, "max_points": 5"#)).unwrap();
        assert!(l.points().is_err());
    }

    #[test]
    fn eps_families() {
        let e: EpsSpec = serde_json::from_str("0.1").unwrap();
        assert_eq!(e.at(10).unwrap(), 0.1);
        let e: EpsSpec = serde_json::from_str(r#"{"form": "power", "c": 1.0, "alpha": 0.5}"#).unwrap();
        assert!((e.at(100).unwrap() - 0.1).abs() < 1e-15);
        let e: EpsSpec = serde_json::from_str(r#"{"form": "inverse-log", "c": 0.5}"#).unwrap();
        assert!((e.at(100).unwrap() - 0.5 / 100f64.ln()).abs() < 1e-15);
        assert!(serde_json::from_str::<EpsSpec>(r#"{"form": "power", "c": 1.0}"#).is_err());
        assert!(EpsSpec::Value(0.7).at(3).is_err());
    }

    #[test]
    fn digest_tracks_seed() {
        let l = Loaded::parse(&cfg("")).unwrap();
        let d = l.digest();
        assert_eq!(d.len(), 64);
        assert_ne!(l.clone().with_seed(2).digest(), d);
        assert_eq!(l.with_seed(1).digest(), d);
    }
}
