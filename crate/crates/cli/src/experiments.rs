//! Typed parameters for each experiment and the work they run.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use boolnet_core::bits::{apply_noise_with, sample_uniform, sample_uniform_with, NoiseSpec};
use boolnet_core::chain::{
    binomial_pmf, bound_oracles, evolve_with_band, exact_kernel, probability_check, probability_lower_bound,
    sampled_kernel, BoundCheck, WedgeParams, MAX_DENSE_N,
};
use boolnet_core::conv::{
    all_majority, build_graph, closest_pair, closest_pair_distance_pmf, evaluate_direct, freeze_analysis, line_width,
    stride1_flip_bound, ConvGraphSpec, Filter,
};
use boolnet_core::estimators::{
    annealed_pairs, decomposition_check, mk_fraction, quenched_profile, sharp_threshold_check, NetworkFamily,
};
use boolnet_core::ffnn::sample_network;
use boolnet_core::revealment::{decay_constant, revealment_for_random_filters, FilterDistribution};
use boolnet_core::stats::{binomial_se, Moments};
use boolnet_core::{Error, HeadFunction, ReferenceFunction, SeedStream, WeightModel};

use crate::config::{EpsSpec, ExperimentKind};
use crate::CliError;

/// One output quantity of a parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: String,
    pub estimate: f64,
    pub stderr: f64,
    /// Monte Carlo sample count; 0 for exact computations.
    pub samples: u64,
    /// Closed-form or target value to compare against, when there is one.
    pub reference: Option<f64>,
}

impl Metric {
    fn new(name: impl Into<String>, estimate: f64, stderr: f64, samples: u64) -> Self {
        Self { name: name.into(), estimate, stderr, samples, reference: None }
    }

    fn exact(name: impl Into<String>, value: f64) -> Self {
        Self::new(name, value, 0.0, 0)
    }

    fn with_reference(mut self, r: f64) -> Self {
        self.reference = Some(r);
        self
    }

    fn proportion(name: impl Into<String>, hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Self::new(name, p, binomial_se(p, n), n)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeadSpec {
    /// Majority; for even n a fixed tie-break weight on the first input.
    #[default]
    Majority,
    Parity,
    EvenPairProduct,
    /// The first input.
    Dictator,
    /// Weights drawn uniformly from [1, 2] with the point's seed.
    WeightedMajority,
}

impl HeadSpec {
    fn function(self, n: usize, seed: &SeedStream) -> boolnet_core::Result<ReferenceFunction> {
        match self {
            Self::Majority if n % 2 == 1 => ReferenceFunction::majority(n),
            Self::Majority => ReferenceFunction::tie_broken_majority(n),
            Self::Parity => ReferenceFunction::parity(n),
            Self::EvenPairProduct => ReferenceFunction::even_pair_product(n),
            Self::Dictator => ReferenceFunction::dictator(n, 0),
            Self::WeightedMajority => {
                let mut rng = seed.named("weights").rng();
                ReferenceFunction::weighted_majority((0..n).map(|_| rng.random_range(1.0..2.0)).collect())
            }
        }
    }

    fn head(self, n: usize, seed: &SeedStream) -> boolnet_core::Result<HeadFunction> {
        HeadFunction::reference(self.function(n, seed)?)
    }
}

fn model(rho: Option<f64>) -> boolnet_core::Result<WeightModel> {
    match rho {
        None => Ok(WeightModel::Uncorrelated),
        Some(r) => WeightModel::correlated(r),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SensitivityMode {
    /// Joint covariance and flip probability over fresh networks.
    #[default]
    Annealed,
    /// Per-network covariances of materialized networks.
    Quenched,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FfnnParams {
    pub n: usize,
    pub depth: usize,
    pub eps: EpsSpec,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub head: HeadSpec,
    #[serde(default)]
    pub mode: SensitivityMode,
    #[serde(default = "d_samples")]
    pub samples: u64,
    #[serde(default = "d_theta")]
    pub theta_samples: u64,
    #[serde(default = "d_inner")]
    pub inner_samples: u64,
    #[serde(default = "d_delta")]
    pub delta: f64,
}

fn d_samples() -> u64 {
    10_000
}
fn d_theta() -> u64 {
    50
}
fn d_inner() -> u64 {
    2000
}
fn d_delta() -> f64 {
    0.05
}
fn d_replicas() -> u64 {
    10_000
}
fn d_band() -> f64 {
    0.1
}
fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    pub n: usize,
    pub steps: usize,
    /// Initial disagreement D_0 ~ Binomial(n, eps).
    pub eps: EpsSpec,
    /// Correlated weights (sampled chain); exact kernel when absent.
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default = "d_replicas")]
    pub replicas: u64,
    #[serde(default = "d_band")]
    pub band_delta: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologySpec {
    #[default]
    Line,
    Cycle,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvStabilityParams {
    /// Input width.
    pub n: usize,
    pub eps: EpsSpec,
    #[serde(default = "one")]
    pub k: usize,
    #[serde(default = "one")]
    pub s: usize,
    #[serde(default)]
    pub topology: TopologySpec,
    /// Cycle depth; defaults to n. Line depth follows from n, k and s.
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default = "d_replicas")]
    pub replicas: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvFreezeParams {
    pub n: usize,
    #[serde(default = "d_replicas")]
    pub replicas: u64,
    #[serde(default)]
    pub t_max: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FilterSpec {
    #[default]
    Majority,
    /// Majority with probability p, else a uniform dictator.
    MajorityOrDictator { p: f64 },
    /// i.i.d. standard normal weights.
    Gaussian,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RevealmentParams {
    pub depth: usize,
    #[serde(default = "d_replicas")]
    pub replicas: u64,
    #[serde(default)]
    pub filters: FilterSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsParams {
    /// Points per bound at which its hypotheses hold.
    #[serde(default = "d_points")]
    pub points: usize,
    #[serde(default = "d_rho")]
    pub rho: f64,
    #[serde(default = "d_v_values")]
    pub v_values: Vec<f64>,
    #[serde(default = "d_mc")]
    pub mc_samples: u64,
}

fn d_points() -> usize {
    100
}
fn d_rho() -> f64 {
    0.5
}
fn d_v_values() -> Vec<f64> {
    vec![0.1, 0.3, 0.5]
}
fn d_mc() -> u64 {
    100_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionParams {
    pub n: usize,
    pub depth: usize,
    pub eps: EpsSpec,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub head: HeadSpec,
    #[serde(default = "d_theta_dec")]
    pub theta_samples: u64,
    #[serde(default = "d_inner")]
    pub inner_samples: u64,
}

fn d_theta_dec() -> u64 {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MkParams {
    pub n: usize,
    pub depth: usize,
    #[serde(default = "one")]
    pub k: usize,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub head: HeadSpec,
    #[serde(default = "d_theta_mk")]
    pub theta_samples: u64,
    #[serde(default = "d_eta")]
    pub eta_samples: u64,
    /// Window ((1−δ)/2, (1+δ)/2) for the concentration fraction.
    #[serde(default = "d_mk_delta")]
    pub delta: f64,
}

fn d_theta_mk() -> u64 {
    100
}
fn d_eta() -> u64 {
    1000
}
fn d_mk_delta() -> f64 {
    0.3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpParams {
    pub n: usize,
    #[serde(default)]
    pub head: HeadSpec,
    pub p_values: Vec<f64>,
    #[serde(default = "d_replicas")]
    pub samples: u64,
}

/// A validated parameter point.
#[derive(Debug, Clone)]
pub enum Job {
    Ffnn(FfnnParams),
    Chain(ChainParams),
    ConvStability(ConvStabilityParams),
    ConvFreeze(ConvFreezeParams),
    Revealment(RevealmentParams),
    Bounds(BoundsParams),
    Decomposition(DecompositionParams),
    Mk(MkParams),
    Sharp(SharpParams),
}

fn parse<T: for<'de> Deserialize<'de>>(params: &Map<String, Value>) -> Result<T, CliError> {
    serde_json::from_value(Value::Object(params.clone())).map_err(|e| CliError::Config(format!("invalid params: {e}")))
}

fn cfg<T>(r: boolnet_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Config(e.to_string()))
}

fn require(cond: bool, msg: &str) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(msg.into()))
    }
}

/// Line depth whose input width is `n`.
fn line_depth(k: usize, s: usize, n: usize) -> Option<usize> {
    (0..=n).find(|&d| line_width(k, s, d) == n)
}

impl Job {
    /// Parse and check every precondition that can be checked without running.
    pub fn prepare(kind: ExperimentKind, params: &Map<String, Value>) -> Result<Self, CliError> {
        let probe = SeedStream::new(0);
        let job = match kind {
            ExperimentKind::FfnnSensitivity => {
                let p: FfnnParams = parse(params)?;
                require(p.n >= 1 && p.depth >= 1, "n and depth must be at least 1")?;
                p.eps.at(p.n)?;
                cfg(model(p.rho))?;
                cfg(p.head.head(p.n, &probe))?;
                require(p.samples >= 2, "samples must be at least 2")?;
                require(p.theta_samples >= 2 && p.inner_samples >= 2, "theta/inner samples must be at least 2")?;
                Job::Ffnn(p)
            }
            ExperimentKind::ChainAnalyze => {
                let p: ChainParams = parse(params)?;
                require(p.n >= 1, "n must be at least 1")?;
                p.eps.at(p.n)?;
                require((0.0..=0.5).contains(&p.band_delta), "band_delta must lie in [0, 1/2]")?;
                match p.rho {
                    None => require(p.n <= MAX_DENSE_N, "exact kernel needs n <= 4096")?,
                    Some(_) => {
                        cfg(model(p.rho))?;
                        require(p.replicas >= 1, "replicas must be at least 1")?;
                    }
                }
                Job::Chain(p)
            }
            ExperimentKind::ConvStability => {
                let p: ConvStabilityParams = parse(params)?;
                p.eps.at(p.n)?;
                require(p.replicas >= 1, "replicas must be at least 1")?;
                let spec = conv_spec(&p)?;
                cfg(build_graph(spec))?;
                Job::ConvStability(p)
            }
            ExperimentKind::ConvFreeze => {
                let p: ConvFreezeParams = parse(params)?;
                require(p.n >= 3 && p.n % 2 == 1, "cycle width must be odd and at least 3")?;
                require(p.replicas >= 1, "replicas must be at least 1")?;
                Job::ConvFreeze(p)
            }
            ExperimentKind::Revealment => {
                let p: RevealmentParams = parse(params)?;
                require(p.replicas >= 1, "replicas must be at least 1")?;
                require(p.depth <= 15, "depth above 15 is out of reach for the query algorithm")?;
                if let FilterSpec::MajorityOrDictator { p } = p.filters {
                    require(p > 0.0 && p <= 1.0, "majority probability must lie in (0, 1]")?;
                }
                Job::Revealment(p)
            }
            ExperimentKind::BoundsCheck => {
                let p: BoundsParams = parse(params)?;
                require(p.rho > 0.0 && p.rho < 1.0, "rho must lie in (0, 1)")?;
                require(p.v_values.iter().all(|&v| v > 0.0 && v <= 0.5), "v values must lie in (0, 1/2]")?;
                require(p.points >= 1 && p.mc_samples >= 1, "points and mc_samples must be at least 1")?;
                Job::Bounds(p)
            }
            ExperimentKind::Decomposition => {
                let p: DecompositionParams = parse(params)?;
                require(p.n >= 1 && p.depth >= 1, "n and depth must be at least 1")?;
                p.eps.at(p.n)?;
                cfg(model(p.rho))?;
                cfg(p.head.head(p.n, &probe))?;
                require(p.theta_samples >= 2 && p.inner_samples >= 2, "theta/inner samples must be at least 2")?;
                Job::Decomposition(p)
            }
            ExperimentKind::Mk => {
                let p: MkParams = parse(params)?;
                require(p.n >= 2 && p.depth >= 1, "need n >= 2 and depth >= 1")?;
                require(p.k >= 1 && p.k < p.n, "k must lie in 1..n-1")?;
                cfg(model(p.rho))?;
                cfg(p.head.head(p.n, &probe))?;
                require(p.theta_samples >= 1 && p.eta_samples >= 1, "sample counts must be at least 1")?;
                require(p.delta > 0.0 && p.delta <= 1.0, "delta must lie in (0, 1]")?;
                Job::Mk(p)
            }
            ExperimentKind::SharpThreshold => {
                let p: SharpParams = parse(params)?;
                require(p.n >= 1 && p.samples >= 1, "n and samples must be at least 1")?;
                require(!p.p_values.is_empty(), "p_values must not be empty")?;
                require(
                    p.p_values.iter().all(|&q| (0.0..=1.0).contains(&q) && q != 0.5),
                    "p values must lie in [0, 1] and differ from 1/2",
                )?;
                cfg(p.head.function(p.n, &probe))?;
                Job::Sharp(p)
            }
        };
        Ok(job)
    }

    /// The parameters with defaults filled in.
    pub fn resolved(&self) -> Value {
        let v = match self {
            Job::Ffnn(p) => serde_json::to_value(p),
            Job::Chain(p) => serde_json::to_value(p),
            Job::ConvStability(p) => serde_json::to_value(p),
            Job::ConvFreeze(p) => serde_json::to_value(p),
            Job::Revealment(p) => serde_json::to_value(p),
            Job::Bounds(p) => serde_json::to_value(p),
            Job::Decomposition(p) => serde_json::to_value(p),
            Job::Mk(p) => serde_json::to_value(p),
            Job::Sharp(p) => serde_json::to_value(p),
        };
        v.expect("parameters serialize")
    }

    /// The noise level this point runs at, if it has one.
    pub fn eps_value(&self) -> Option<f64> {
        match self {
            Job::Ffnn(p) => p.eps.at(p.n).ok(),
            Job::Chain(p) => p.eps.at(p.n).ok(),
            Job::ConvStability(p) => p.eps.at(p.n).ok(),
            Job::Decomposition(p) => p.eps.at(p.n).ok(),
            _ => None,
        }
    }

    /// Run the point. The first metric is its primary quantity.
    pub fn run(&self, seed: &SeedStream) -> Result<Vec<Metric>, CliError> {
        let eps = self.eps_value().unwrap_or(0.0);
        let out = match self {
            Job::Ffnn(p) => run_ffnn(p, eps, seed),
            Job::Chain(p) => run_chain(p, eps, seed),
            Job::ConvStability(p) => run_conv_stability(p, eps, seed),
            Job::ConvFreeze(p) => run_conv_freeze(p, seed),
            Job::Revealment(p) => run_revealment(p, seed),
            Job::Bounds(p) => run_bounds(p, seed),
            Job::Decomposition(p) => run_decomposition(p, eps, seed),
            Job::Mk(p) => run_mk(p, seed),
            Job::Sharp(p) => run_sharp(p, seed),
        };
        out.map_err(|e| match e {
            Error::Numeric(m) => CliError::Numeric(m),
            other => CliError::Config(other.to_string()),
        })
    }
}

type Run = boolnet_core::Result<Vec<Metric>>;

fn run_ffnn(p: &FfnnParams, eps: f64, seed: &SeedStream) -> Run {
    let fam = NetworkFamily::new(p.n, p.depth, model(p.rho)?, p.head.head(p.n, seed)?)?;
    match p.mode {
        SensitivityMode::Annealed => {
            let pc = annealed_pairs(&fam, eps, p.samples, seed)?;
            let flip = pc.disagreement();
            Ok(vec![
                Metric::new("covariance", pc.covariance(), pc.jackknife_se(), p.samples),
                Metric::new("flip_probability", flip, binomial_se(flip, p.samples), p.samples),
            ])
        }
        SensitivityMode::Quenched => {
            let q = quenched_profile(&fam, eps, p.theta_samples, p.inner_samples, p.delta, seed)?;
            let m: Moments = q.estimates.iter().map(|e| e.value).collect();
            let below = q.estimates.iter().filter(|e| e.value <= p.delta).count() as u64;
            Ok(vec![
                Metric::proportion("fraction_below", below, p.theta_samples),
                Metric::new("mean_quenched_covariance", m.mean, m.stderr(), p.theta_samples * p.inner_samples),
            ])
        }
    }
}

fn run_chain(p: &ChainParams, eps: f64, seed: &SeedStream) -> Run {
    let init = binomial_pmf(p.n, eps);
    let (kernel, replicas) = match p.rho {
        None => (exact_kernel(p.n)?, 0),
        Some(rho) => (sampled_kernel(p.n, rho, p.replicas, seed.clone())?, p.replicas),
    };
    let h = evolve_with_band(&kernel, &init, p.steps, p.band_delta)?;
    let m = |name: &str, v: f64| {
        if replicas == 0 {
            Metric::exact(name, v)
        } else {
            Metric::new(name, v, binomial_se(v, replicas), replicas)
        }
    };
    Ok(vec![
        m("absorbed", h.absorb0_prob + h.absorb_n_prob),
        m("absorbed_at_0", h.absorb0_prob),
        m("absorbed_at_n", h.absorb_n_prob),
        m("band_hit", h.band_hit_prob),
    ])
}

fn conv_spec(p: &ConvStabilityParams) -> Result<ConvGraphSpec, CliError> {
    match p.topology {
        TopologySpec::Line => {
            require(p.depth.is_none(), "line depth follows from n; drop `depth`")?;
            require(p.k >= 1 && p.s >= 1, "k and s must be at least 1")?;
            let d = line_depth(p.k, p.s, p.n).ok_or_else(|| {
                CliError::Config(format!("no line graph with k = {}, s = {} has width {}", p.k, p.s, p.n))
            })?;
            Ok(ConvGraphSpec::line(p.k, p.s, d))
        }
        TopologySpec::Cycle => {
            require(p.s == 1, "cycle graphs use stride 1")?;
            Ok(ConvGraphSpec::cycle(p.k, p.n, p.depth.unwrap_or(p.n)))
        }
    }
}

/// Count `hit` over `samples` draws in fixed chunks with their own seed child.
fn chunked_count<F>(samples: u64, seed: &SeedStream, hit: F) -> boolnet_core::Result<u64>
where
    F: Fn(&mut boolnet_core::seed::StreamRng) -> boolnet_core::Result<bool> + Sync,
{
    const CHUNK: u64 = 1024;
    let parts: Vec<boolnet_core::Result<u64>> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.child(c).rng();
            let mut hits = 0;
            for _ in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                hits += u64::from(hit(&mut rng)?);
            }
            Ok(hits)
        })
        .collect();
    parts.into_iter().sum()
}

fn run_conv_stability(p: &ConvStabilityParams, eps: f64, seed: &SeedStream) -> Run {
    let spec = conv_spec(p).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let graph = build_graph(spec)?;
    let filters = all_majority(graph.depth());
    let noise = NoiseSpec::new(eps)?;
    let closest = p.k == 1 && p.s == 1 && p.topology == TopologySpec::Line;
    let eval = |x: &boolnet_core::BitVector| -> boolnet_core::Result<i8> {
        if closest {
            Ok(closest_pair(x)?.0)
        } else {
            evaluate_direct(&graph, &filters, x)
        }
    };
    let flips = chunked_count(p.replicas, &seed.named("flip"), |rng| {
        let x = sample_uniform_with(p.n, rng);
        let y = apply_noise_with(&x, noise, rng);
        Ok(eval(&x)? != eval(&y)?)
    })?;
    let mut out = vec![Metric::proportion("flip_probability", flips, p.replicas)];
    if closest {
        out[0].reference = Some(stride1_flip_bound(eps));
        for k in 1..=5usize.min(p.n / 2) {
            let hits = chunked_count(p.replicas, &seed.named("k").child(k as u64), |rng| {
                Ok(closest_pair(&sample_uniform_with(p.n, rng))?.1 == Some(k))
            })?;
            out.push(
                Metric::proportion(format!("p_k={k}"), hits, p.replicas).with_reference(closest_pair_distance_pmf(k)),
            );
        }
    }
    Ok(out)
}

fn run_conv_freeze(p: &ConvFreezeParams, seed: &SeedStream) -> Run {
    let t_max = p.t_max.unwrap_or(p.n);
    let results: Vec<boolnet_core::Result<(Option<usize>, bool)>> = (0..p.replicas)
        .into_par_iter()
        .map(|r| {
            let x = sample_uniform(p.n, &seed.child(r))?;
            let f = freeze_analysis(&x, 1, t_max)?;
            let within = match (f.frozen_at, f.d_bar) {
                (Some(t), Some(d)) => t <= d,
                _ => false,
            };
            Ok((f.frozen_at, within))
        })
        .collect();
    let results: Vec<(Option<usize>, bool)> = results.into_iter().collect::<boolnet_core::Result<_>>()?;
    let frozen = results.iter().filter(|r| r.0.is_some()).count() as u64;
    let within = results.iter().filter(|r| r.1).count() as u64;
    let times: Moments = results.iter().filter_map(|r| r.0).map(|t| t as f64).collect();
    let max = results.iter().filter_map(|r| r.0).max().unwrap_or(0);
    Ok(vec![
        Metric::proportion("within_bound_fraction", within, p.replicas).with_reference(1.0),
        Metric::proportion("frozen_fraction", frozen, p.replicas).with_reference(1.0),
        Metric::new("mean_freeze_time", times.mean, times.stderr(), times.count),
        Metric::new("max_freeze_time", max as f64, 0.0, p.replicas),
    ])
}

fn run_revealment(p: &RevealmentParams, seed: &SeedStream) -> Run {
    let dist = match p.filters {
        FilterSpec::Majority => FilterDistribution::Categorical(vec![(Filter::Majority, 1.0)]),
        FilterSpec::MajorityOrDictator { p } => FilterDistribution::majority_or_dictator(p),
        FilterSpec::Gaussian => FilterDistribution::Gaussian,
    };
    let r = revealment_for_random_filters(p.depth, &dist, p.replicas, seed)?;
    let e = &r.estimate;
    Ok(vec![
        Metric::new("delta_hat", e.delta_hat.value, e.delta_hat.stderr, p.replicas),
        Metric::new("mean_queries", e.mean_queries, 0.0, p.replicas),
        Metric::exact("argmax_bit", e.argmax as f64),
        Metric::exact("majority_blocks", r.majority_blocks as f64),
        Metric::exact("proven_block_factor", decay_constant()),
    ])
}

fn run_bounds(p: &BoundsParams, seed: &SeedStream) -> Run {
    let mut rng = seed.named("points").rng();
    let mut checked = [0u64; 3];
    let mut passed = [0u64; 3];
    let mut tries = 0;
    while checked.iter().any(|&c| c < p.points as u64) && tries < 1000 * p.points {
        tries += 1;
        let w = WedgeParams::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0));
        let v = rng.random_range(0.005..0.995);
        let r = bound_oracles(w, v, p.rho, 0, seed)?;
        for (i, c) in [r.lower, r.half, r.upper].iter().enumerate() {
            if checked[i] < p.points as u64 {
                if let BoundCheck::Checked { pass, .. } = c {
                    checked[i] += 1;
                    passed[i] += u64::from(*pass);
                }
            }
        }
    }
    let total = checked.iter().sum::<u64>();
    let all = if total > 0 { passed.iter().sum::<u64>() as f64 / total as f64 } else { f64::NAN };
    let mut out = vec![Metric::new("pass_fraction", all, 0.0, total).with_reference(1.0)];
    out.extend(["lower_bound", "half_bound", "upper_bound"].iter().enumerate().map(|(i, name)| {
        let frac = if checked[i] > 0 { passed[i] as f64 / checked[i] as f64 } else { f64::NAN };
        Metric::new(format!("{name}_pass_fraction"), frac, 0.0, checked[i]).with_reference(1.0)
    }));
    for (i, &v) in p.v_values.iter().enumerate() {
        let c = probability_check(v, p.rho, p.mc_samples, &seed.named("probability").child(i as u64))?;
        out.push(
            Metric::new(format!("p_half@v={v}"), c.estimate, c.stderr, p.mc_samples)
                .with_reference(probability_lower_bound(v, p.rho)),
        );
    }
    Ok(out)
}

fn run_decomposition(p: &DecompositionParams, eps: f64, seed: &SeedStream) -> Run {
    let fam = NetworkFamily::new(p.n, p.depth, model(p.rho)?, p.head.head(p.n, seed)?)?;
    let r = decomposition_check(&fam, eps, p.theta_samples, p.inner_samples, seed)?;
    let m = |name: &str, e: &boolnet_core::EstimateRecord| Metric::new(name, e.value, e.stderr, e.samples);
    let diff_se = r.lhs.stderr.hypot(r.rhs.stderr);
    Ok(vec![
        Metric::new("lhs_minus_rhs", r.lhs.value - r.rhs.value, diff_se, r.lhs.samples).with_reference(0.0),
        m("lhs", &r.lhs),
        m("expected_covariance", &r.expected_cov),
        m("variance_of_mean", &r.var_mean),
        m("rhs", &r.rhs).with_reference(r.lhs.value),
        Metric::new("z", r.z, 0.0, r.lhs.samples),
    ])
}

fn run_mk(p: &MkParams, seed: &SeedStream) -> Run {
    let h = p.head.head(p.n, seed)?;
    let m = model(p.rho)?;
    // ω is fixed; the randomness is over the network.
    let omega = sample_uniform(p.n, &seed.named("omega"))?;
    let fractions: Vec<boolnet_core::Result<f64>> = (0..p.theta_samples)
        .into_par_iter()
        .map(|i| {
            let s = seed.child(i);
            let net = sample_network(p.n, p.depth, m, &s.child(0))?;
            Ok(mk_fraction(&net, &h, &omega, p.k, p.eta_samples, &s.child(1))?.value)
        })
        .collect();
    let fractions: Vec<f64> = fractions.into_iter().collect::<boolnet_core::Result<_>>()?;
    let (lo, hi) = ((1.0 - p.delta) / 2.0, (1.0 + p.delta) / 2.0);
    let inside = fractions.iter().filter(|&&f| f > lo && f < hi).count() as u64;
    let mom: Moments = fractions.iter().copied().collect();
    Ok(vec![
        Metric::proportion("within_window", inside, p.theta_samples),
        Metric::new("mean_fraction", mom.mean, mom.stderr(), p.theta_samples).with_reference(0.5),
    ])
}

fn run_sharp(p: &SharpParams, seed: &SeedStream) -> Run {
    let f = p.head.function(p.n, seed)?;
    let pts = sharp_threshold_check(&f, &p.p_values, p.samples, seed)?;
    let worst =
        pts.iter().min_by(|a, b| a.agreement.value.total_cmp(&b.agreement.value)).expect("p_values is non-empty");
    let mut out = vec![Metric::new("min_agreement", worst.agreement.value, worst.agreement.stderr, p.samples)];
    out.extend(
        pts.iter()
            .map(|t| Metric::new(format!("agreement@p={}", t.p), t.agreement.value, t.agreement.stderr, p.samples)),
    );
    Ok(out)
}
