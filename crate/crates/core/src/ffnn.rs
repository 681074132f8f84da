//! Fully connected sign-activation networks with Gaussian weights.
//!
//! Layer `t` maps ω_{t−1} to ω_t = sign(θ_t ω_{t−1}), row `i` of θ_t producing
//! coordinate `i`. The final output is h(ω_T).

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use crate::bits::{sample_uniform_with, BitVector};
use crate::chain::g;
use crate::error::{check_len, invalid, Error, Result};
use crate::functions::{sign, BooleanMap, Parity, ReferenceFunction};
use crate::seed::{SeedStream, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightModel {
    /// i.i.d. standard normal entries.
    Uncorrelated,
    /// Entries in a column share a common factor: θ(i,j) = √ρ·ν(j) + √(1−ρ)·ψ(i,j).
    Correlated { rho: f64 },
}

impl WeightModel {
    pub fn correlated(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(invalid(format!("correlation {rho} outside (0, 1)")));
        }
        Ok(Self::Correlated { rho })
    }

    pub fn rho(self) -> f64 {
        match self {
            Self::Uncorrelated => 0.0,
            Self::Correlated { rho } => rho,
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            Self::Uncorrelated => Ok(()),
            Self::Correlated { rho } => Self::correlated(rho).map(|_| ()),
        }
    }
}

/// A sampled network Θ = (θ_1, …, θ_T), each θ_t stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    n: usize,
    layers: Vec<Vec<f64>>,
    model: WeightModel,
    seed: Option<SeedStream>,
}

impl NetworkParams {
    /// Network from explicit matrices (row-major, each n×n).
    pub fn from_layers(n: usize, layers: Vec<Vec<f64>>, model: WeightModel) -> Result<Self> {
        if n == 0 || layers.is_empty() {
            return Err(Error::InvalidDimension("need n >= 1 and T >= 1".into()));
        }
        for m in &layers {
            check_len(n * n, m.len())?;
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::Numeric("non-finite weight".into()));
            }
        }
        Ok(Self { n, layers, model, seed: None })
    }

    pub fn width(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn model(&self) -> WeightModel {
        self.model
    }

    pub fn seed(&self) -> Option<&SeedStream> {
        self.seed.as_ref()
    }

    /// Layer `t` (0-based) as a row-major slice.
    pub fn layer(&self, t: usize) -> &[f64] {
        &self.layers[t]
    }

    /// Apply layer `t` to a ±1 state.
    pub fn apply_layer(&self, t: usize, x: &[i8]) -> Vec<i8> {
        let n = self.n;
        let xf: Vec<f64> = x.iter().map(|&b| b as f64).collect();
        self.layers[t].chunks_exact(n).map(|row| sign(row.iter().zip(&xf).map(|(a, b)| a * b).sum())).collect()
    }

    /// All states ω_0, …, ω_T.
    pub fn layer_states(&self, omega: &BitVector) -> Result<Vec<BitVector>> {
        check_len(self.n, omega.len())?;
        let mut states = Vec::with_capacity(self.depth() + 1);
        states.push(omega.clone());
        for t in 0..self.depth() {
            let next = self.apply_layer(t, states[t].as_slice());
            states.push(BitVector::from_vec_unchecked(next));
        }
        Ok(states)
    }
}

/// Draw the T weight matrices. Layer `t` uses substream `seed.child(t)`.
pub fn sample_network(n: usize, depth: usize, model: WeightModel, seed: &SeedStream) -> Result<NetworkParams> {
    if n == 0 || depth == 0 {
        return Err(Error::InvalidDimension("need n >= 1 and T >= 1".into()));
    }
    model.validate()?;
    let layers = (0..depth).map(|t| sample_layer(n, model, &mut seed.child(t as u64).rng())).collect();
    Ok(NetworkParams { n, layers, model, seed: Some(seed.clone()) })
}

/// One n×n weight matrix, row-major.
pub fn sample_layer<R: Rng + ?Sized>(n: usize, model: WeightModel, rng: &mut R) -> Vec<f64> {
    match model {
        WeightModel::Uncorrelated => (0..n * n).map(|_| rng.sample(StandardNormal)).collect(),
        WeightModel::Correlated { rho } => {
            let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
            let nu: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let mut m = Vec::with_capacity(n * n);
            for _ in 0..n {
                for &v in &nu {
                    let psi: f64 = rng.sample(StandardNormal);
                    m.push(a * v + b * psi);
                }
            }
            m
        }
    }
}

/// Pointwise sign with sign(±0) = +1.
pub fn sign_activation(x: &[f64]) -> Result<BitVector> {
    if x.is_empty() {
        return Err(Error::InvalidDimension("empty vector".into()));
    }
    if let Some(v) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite activation {v}")));
    }
    Ok(BitVector::from_vec_unchecked(x.iter().map(|&v| sign(v)).collect()))
}

/// The output function h applied to ω_T, with its declared negation symmetry.
#[derive(Clone)]
pub struct HeadFunction {
    f: Arc<dyn BooleanMap>,
    parity: Parity,
}

impl std::fmt::Debug for HeadFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HeadFunction").field("arity", &self.f.arity()).field("parity", &self.parity).finish()
    }
}

impl HeadFunction {
    /// Wrap `f`, checking the declared symmetry exhaustively for arity ≤ 12
    /// and on 512 pseudo-random inputs otherwise.
    pub fn new(f: Arc<dyn BooleanMap>, parity: Parity) -> Result<Self> {
        let n = f.arity();
        if n == 0 {
            return Err(Error::InvalidDimension("head function arity must be >= 1".into()));
        }
        if parity != Parity::Neither {
            let s: i8 = if parity == Parity::Odd { -1 } else { 1 };
            let check = |x: &BitVector| f.eval_slice((-x).as_slice()) == s * f.eval_slice(x.as_slice());
            let ok = if n <= 12 {
                BitVector::enumerate(n).all(|x| check(&x))
            } else {
                let mut rng = SeedStream::new(0).named("head-parity-check").rng();
                (0..512).all(|_| check(&sample_uniform_with(n, &mut rng)))
            };
            if !ok {
                return Err(invalid(format!("head function is not {parity:?}")));
            }
        }
        Ok(Self { f, parity })
    }

    pub fn reference(f: ReferenceFunction) -> Result<Self> {
        let parity = f.parity_class();
        Self::new(Arc::new(f), parity)
    }

    pub fn arity(&self) -> usize {
        self.f.arity()
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn eval_slice(&self, x: &[i8]) -> i8 {
        self.f.eval_slice(x)
    }
}

pub fn forward(net: &NetworkParams, omega: &BitVector, h: &HeadFunction) -> Result<i8> {
    check_len(net.width(), omega.len())?;
    check_len(net.width(), h.arity())?;
    let mut x = omega.as_slice().to_vec();
    for t in 0..net.depth() {
        x = net.apply_layer(t, &x);
    }
    Ok(h.eval_slice(&x))
}

/// Outputs of two inputs pushed through the same network, with the
/// disagreement count D_t between their layer states for t = 0..=T.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairTrace {
    pub out_x: i8,
    pub out_y: i8,
    pub trace: Vec<usize>,
}

pub fn forward_pair(net: &NetworkParams, omega: &BitVector, eta: &BitVector, h: &HeadFunction) -> Result<PairTrace> {
    let n = net.width();
    check_len(n, omega.len())?;
    check_len(n, eta.len())?;
    check_len(n, h.arity())?;
    let mut x = omega.as_slice().to_vec();
    let mut y = eta.as_slice().to_vec();
    let mut trace = Vec::with_capacity(net.depth() + 1);
    trace.push(count_diff(&x, &y));
    for t in 0..net.depth() {
        let d = *trace.last().unwrap();
        // Equal or antipodal states stay so; one product suffices.
        if d == 0 {
            x = net.apply_layer(t, &x);
            y.clone_from(&x);
        } else if d == n {
            x = net.apply_layer(t, &x);
            y = x.iter().map(|&b| -b).collect();
        } else {
            x = net.apply_layer(t, &x);
            y = net.apply_layer(t, &y);
        }
        trace.push(count_diff(&x, &y));
    }
    Ok(PairTrace { out_x: h.eval_slice(&x), out_y: h.eval_slice(&y), trace })
}

fn count_diff(x: &[i8], y: &[i8]) -> usize {
    x.iter().zip(y).filter(|(a, b)| a != b).count()
}

/// Final layer states of a pair pushed through a freshly drawn network.
///
/// Given the previous states, row `i` of a fresh layer only sees the pair
/// through S_A = Σ_{j∈A} θ_ij x_j and S_C = Σ_{j∈C} θ_ij x_j, where A and C
/// are the agreement and disagreement sets; the two new coordinates are
/// sign(S_A + S_C) and sign(S_A − S_C). S_A, S_C are Gaussian with variances
/// |A| and |C| (plus a column-shared part under correlation), so a layer costs
/// O(n) draws instead of O(n²) while having exactly the same law.
pub fn fresh_pair_states<R: Rng + ?Sized>(
    n: usize,
    depth: usize,
    model: WeightModel,
    d0: usize,
    rng: &mut R,
) -> (Vec<i8>, Vec<i8>) {
    assert!(n >= 1 && depth >= 1 && d0 <= n);
    let mut d = d0;
    for _ in 1..depth {
        if d == 0 || d == n {
            break;
        }
        d = fresh_disagreement_step(n, model, d, rng);
    }
    // Once absorbed the last layer is a single fresh layer from any input.
    let (a, c) = if d == 0 || d == n { (n, 0) } else { (n - d, d) };
    let (x, mut y) = fresh_layer(n, model, a, c, rng);
    if d == n {
        y = x.iter().map(|&b| -b).collect();
    } else if d == 0 {
        y.clone_from(&x);
    }
    (x, y)
}

/// Disagreement count after one fresh layer, given `d` disagreements before it.
pub fn fresh_disagreement_step<R: Rng + ?Sized>(n: usize, model: WeightModel, d: usize, rng: &mut R) -> usize {
    if d == 0 || d == n {
        return d;
    }
    match model {
        WeightModel::Uncorrelated => {
            let p = g(d as f64 / n as f64);
            Binomial::new(n as u64, p).expect("valid binomial").sample(rng) as usize
        }
        WeightModel::Correlated { .. } => {
            let (x, y) = fresh_layer(n, model, n - d, d, rng);
            count_diff(&x, &y)
        }
    }
}

fn fresh_layer<R: Rng + ?Sized>(n: usize, model: WeightModel, a: usize, c: usize, rng: &mut R) -> (Vec<i8>, Vec<i8>) {
    let (sa, sc) = ((a as f64).sqrt(), (c as f64).sqrt());
    let rho = model.rho();
    let (shared_a, shared_c) = if rho > 0.0 {
        let ua: f64 = rng.sample(StandardNormal);
        let uc: f64 = rng.sample(StandardNormal);
        (rho.sqrt() * sa * ua, rho.sqrt() * sc * uc)
    } else {
        (0.0, 0.0)
    };
    let own = (1.0 - rho).sqrt();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let za: f64 = rng.sample(StandardNormal);
        let a_part = shared_a + own * sa * za;
        let c_part = if c > 0 {
            let zc: f64 = rng.sample(StandardNormal);
            shared_c + own * sc * zc
        } else {
            0.0
        };
        x.push(sign(a_part + c_part));
        y.push(sign(a_part - c_part));
    }
    (x, y)
}

/// Outputs (f(ω), f(ω^ε)) for fresh (Θ, ω, noise), with D_0 ~ Binomial(n, ε).
pub fn fresh_pair_outputs(
    n: usize,
    depth: usize,
    model: WeightModel,
    h: &HeadFunction,
    eps: f64,
    rng: &mut StreamRng,
) -> (i8, i8) {
    let d0 = if eps > 0.0 { Binomial::new(n as u64, eps).expect("valid binomial").sample(rng) as usize } else { 0 };
    let (x, y) = fresh_pair_states(n, depth, model, d0, rng);
    (h.eval_slice(&x), h.eval_slice(&y))
}
