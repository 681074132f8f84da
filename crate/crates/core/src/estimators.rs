//! Annealed and quenched noise-sensitivity estimators, the conditional
//! covariance decomposition, M_k fractions and a sharp-threshold check.

use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::bits::{apply_noise_with, sample_biased_with, sample_uniform_with, BitVector, NoiseSpec};
use crate::error::{check_len, invalid, Result};
use crate::ffnn::{
    forward, forward_pair, fresh_pair_outputs, sample_network, HeadFunction, NetworkParams, WeightModel,
};
use crate::functions::BooleanMap;
use crate::seed::{SeedStream, StreamRng};
use crate::stats::{binomial_se, EstimateRecord, Moments, PairCounts};

/// Work is split into fixed-size chunks with their own seed child, so results
/// do not depend on how many threads run them.
const CHUNK: u64 = 1024;

/// One concrete function drawn from a family.
pub trait Realization: Send + Sync {
    fn arity(&self) -> usize;

    fn eval_slice(&self, x: &[i8]) -> i8;

    fn eval_pair(&self, x: &BitVector, y: &BitVector) -> (i8, i8) {
        (self.eval_slice(x.as_slice()), self.eval_slice(y.as_slice()))
    }
}

/// A fixed Boolean function viewed as a realization.
pub struct Fixed(pub Arc<dyn BooleanMap>);

impl Realization for Fixed {
    fn arity(&self) -> usize {
        self.0.arity()
    }

    fn eval_slice(&self, x: &[i8]) -> i8 {
        self.0.eval_slice(x)
    }
}

/// A materialized network with its head.
pub struct NetworkRealization {
    pub net: NetworkParams,
    pub head: HeadFunction,
}

impl Realization for NetworkRealization {
    fn arity(&self) -> usize {
        self.net.width()
    }

    fn eval_slice(&self, x: &[i8]) -> i8 {
        let mut s = x.to_vec();
        for t in 0..self.net.depth() {
            s = self.net.apply_layer(t, &s);
        }
        self.head.eval_slice(&s)
    }

    fn eval_pair(&self, x: &BitVector, y: &BitVector) -> (i8, i8) {
        let tr = forward_pair(&self.net, x, y, &self.head).expect("widths checked at construction");
        (tr.out_x, tr.out_y)
    }
}

/// A probability law over functions {−1,+1}^n → {−1,+1}.
pub trait FunctionFamily: Send + Sync {
    fn arity(&self) -> usize;

    fn sample_function(&self, seed: &SeedStream) -> Result<Box<dyn Realization>>;

    /// (f(ω), f(ω^ε)) with f, ω and the noise all drawn fresh.
    fn sample_pair(&self, eps: f64, rng: &mut StreamRng) -> (i8, i8);
}

/// A single deterministic function.
pub struct PointMass(pub Arc<dyn BooleanMap>);

impl FunctionFamily for PointMass {
    fn arity(&self) -> usize {
        self.0.arity()
    }

    fn sample_function(&self, _seed: &SeedStream) -> Result<Box<dyn Realization>> {
        Ok(Box::new(Fixed(self.0.clone())))
    }

    fn sample_pair(&self, eps: f64, rng: &mut StreamRng) -> (i8, i8) {
        pair_of(self.0.as_ref(), eps, rng)
    }
}

/// Uniform choice among finitely many functions of the same arity.
pub struct UniformMixture {
    atoms: Vec<Arc<dyn BooleanMap>>,
}

impl UniformMixture {
    pub fn new(atoms: Vec<Arc<dyn BooleanMap>>) -> Result<Self> {
        let n = atoms.first().ok_or_else(|| invalid("mixture needs at least one atom"))?.arity();
        for a in &atoms {
            check_len(n, a.arity())?;
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[Arc<dyn BooleanMap>] {
        &self.atoms
    }
}

impl FunctionFamily for UniformMixture {
    fn arity(&self) -> usize {
        self.atoms[0].arity()
    }

    fn sample_function(&self, seed: &SeedStream) -> Result<Box<dyn Realization>> {
        let i = seed.rng().random_range(0..self.atoms.len());
        Ok(Box::new(Fixed(self.atoms[i].clone())))
    }

    fn sample_pair(&self, eps: f64, rng: &mut StreamRng) -> (i8, i8) {
        let i = rng.random_range(0..self.atoms.len());
        pair_of(self.atoms[i].as_ref(), eps, rng)
    }
}

fn pair_of(f: &dyn BooleanMap, eps: f64, rng: &mut StreamRng) -> (i8, i8) {
    let x = sample_uniform_with(f.arity(), rng);
    let y = apply_noise_with(&x, NoiseSpec::new(eps).expect("validated"), rng);
    (f.eval_slice(x.as_slice()), f.eval_slice(y.as_slice()))
}

/// Sign networks of fixed width and depth with a head function.
#[derive(Debug, Clone)]
pub struct NetworkFamily {
    pub n: usize,
    pub depth: usize,
    pub model: WeightModel,
    pub head: HeadFunction,
}

impl NetworkFamily {
    pub fn new(n: usize, depth: usize, model: WeightModel, head: HeadFunction) -> Result<Self> {
        if n == 0 || depth == 0 {
            return Err(invalid("network width and depth must be at least 1"));
        }
        check_len(n, head.arity())?;
        Ok(Self { n, depth, model, head })
    }
}

impl FunctionFamily for NetworkFamily {
    fn arity(&self) -> usize {
        self.n
    }

    fn sample_function(&self, seed: &SeedStream) -> Result<Box<dyn Realization>> {
        let net = sample_network(self.n, self.depth, self.model, seed)?;
        Ok(Box::new(NetworkRealization { net, head: self.head.clone() }))
    }

    fn sample_pair(&self, eps: f64, rng: &mut StreamRng) -> (i8, i8) {
        fresh_pair_outputs(self.n, self.depth, self.model, &self.head, eps, rng)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    NoiseSpec::new(eps).map(|_| ())
}

/// Joint counts of (f(ω), f(ω^ε)) over `samples` fresh draws.
pub fn annealed_pairs(family: &dyn FunctionFamily, eps: f64, samples: u64, seed: &SeedStream) -> Result<PairCounts> {
    check_eps(eps)?;
    let parts: Vec<PairCounts> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.child(c).rng();
            let mut pc = PairCounts::default();
            for _ in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let (a, b) = family.sample_pair(eps, &mut rng);
                pc.push(a, b);
            }
            pc
        })
        .collect();
    let mut total = PairCounts::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

/// Cov(f(ω), f(ω^ε)) jointly over f, ω and the noise, with jackknife error.
pub fn annealed_covariance(
    family: &dyn FunctionFamily,
    eps: f64,
    samples: u64,
    seed: &SeedStream,
) -> Result<EstimateRecord> {
    if samples < 2 {
        return Err(invalid("need at least 2 samples"));
    }
    let pc = annealed_pairs(family, eps, samples, seed)?;
    Ok(EstimateRecord::new(pc.covariance(), pc.jackknife_se(), samples, seed.clone()))
}

/// P(f(ω) ≠ f(ω^ε)) jointly over f, ω and the noise.
pub fn annealed_flip_probability(
    family: &dyn FunctionFamily,
    eps: f64,
    samples: u64,
    seed: &SeedStream,
) -> Result<EstimateRecord> {
    if samples == 0 {
        return Err(invalid("need at least 1 sample"));
    }
    let pc = annealed_pairs(family, eps, samples, seed)?;
    let p = pc.disagreement();
    Ok(EstimateRecord::new(p, binomial_se(p, samples), samples, seed.clone()))
}

/// Flip probability P(f(ω) ≠ f(ω^ε)) of one fixed function.
pub fn stability_probability(f: &dyn BooleanMap, eps: f64, samples: u64, seed: &SeedStream) -> Result<EstimateRecord> {
    if samples == 0 {
        return Err(invalid("need at least 1 sample"));
    }
    check_eps(eps)?;
    let hits: u64 = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.child(c).rng();
            (c * CHUNK..((c + 1) * CHUNK).min(samples))
                .filter(|_| {
                    let (a, b) = pair_of(f, eps, &mut rng);
                    a != b
                })
                .count() as u64
        })
        .sum();
    let p = hits as f64 / samples as f64;
    Ok(EstimateRecord::new(p, binomial_se(p, samples), samples, seed.clone()))
}

/// Within-function pair counts for one realization.
fn inner_pairs(f: &dyn Realization, eps: f64, samples: u64, rng: &mut StreamRng) -> PairCounts {
    let noise = NoiseSpec::new(eps).expect("validated");
    let mut pc = PairCounts::default();
    for _ in 0..samples {
        let x = sample_uniform_with(f.arity(), rng);
        let y = apply_noise_with(&x, noise, rng);
        let (a, b) = f.eval_pair(&x, &y);
        pc.push(a, b);
    }
    pc
}

/// For Θ number i: the realization comes from `seed.child(i).child(0)`, inputs from `.child(1)`.
fn per_theta(
    family: &dyn FunctionFamily,
    eps: f64,
    theta_samples: u64,
    inner_samples: u64,
    seed: &SeedStream,
) -> Result<Vec<PairCounts>> {
    if theta_samples < 2 || inner_samples < 2 {
        return Err(invalid("theta and inner sample counts must be at least 2"));
    }
    check_eps(eps)?;
    (0..theta_samples)
        .into_par_iter()
        .map(|i| {
            let s = seed.child(i);
            let f = family.sample_function(&s.child(0))?;
            Ok(inner_pairs(f.as_ref(), eps, inner_samples, &mut s.child(1).rng()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuenchedProfile {
    pub estimates: Vec<EstimateRecord>,
    pub delta: f64,
    pub fraction_below: f64,
}

/// Per-realization covariance estimates and the fraction at or below `delta`.
pub fn quenched_profile(
    family: &dyn FunctionFamily,
    eps: f64,
    theta_samples: u64,
    inner_samples: u64,
    delta: f64,
    seed: &SeedStream,
) -> Result<QuenchedProfile> {
    let pcs = per_theta(family, eps, theta_samples, inner_samples, seed)?;
    let estimates: Vec<EstimateRecord> = pcs
        .iter()
        .enumerate()
        .map(|(i, pc)| EstimateRecord::new(pc.covariance(), pc.jackknife_se(), inner_samples, seed.child(i as u64)))
        .collect();
    let below = estimates.iter().filter(|e| e.value <= delta).count();
    Ok(QuenchedProfile { fraction_below: below as f64 / estimates.len() as f64, estimates, delta })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    /// Joint covariance from independent fresh draws.
    pub lhs: EstimateRecord,
    /// Mean over realizations of the within-realization covariance.
    pub expected_cov: EstimateRecord,
    /// Variance over realizations of E_ω[f].
    pub var_mean: EstimateRecord,
    /// expected_cov + var_mean, with a joint jackknife error.
    pub rhs: EstimateRecord,
    pub z: f64,
    pub pass: bool,
}

/// Estimate Cov_{f,ω,ω^ε} = E_f[Cov_{ω,ω^ε}] + Var_f(E_ω f) term by term.
///
/// The left side uses `theta_samples · inner_samples` fresh joint draws from
/// `seed.named("lhs")`; the right side uses per-realization draws.
pub fn decomposition_check(
    family: &dyn FunctionFamily,
    eps: f64,
    theta_samples: u64,
    inner_samples: u64,
    seed: &SeedStream,
) -> Result<DecompositionReport> {
    let pcs = per_theta(family, eps, theta_samples, inner_samples, &seed.named("rhs"))?;
    let lhs = annealed_covariance(family, eps, theta_samples * inner_samples, &seed.named("lhs"))?;

    let n_in = inner_samples as f64;
    let covs: Vec<f64> = pcs.iter().map(|p| p.unbiased_covariance()).collect();
    let means: Vec<f64> = pcs.iter().map(|p| p.mean_x()).collect();
    // Unbiased within-realization variance of f(ω), divided by the inner count.
    let noise: Vec<f64> = means.iter().map(|m| (1.0 - m * m) * n_in / (n_in - 1.0) / n_in).collect();

    let terms = |skip: Option<usize>| -> (f64, f64) {
        let keep = |i: &usize| Some(*i) != skip;
        let idx: Vec<usize> = (0..pcs.len()).filter(keep).collect();
        let e: f64 = idx.iter().map(|&i| covs[i]).sum::<f64>() / idx.len() as f64;
        let m: Moments = idx.iter().map(|&i| means[i]).collect();
        let nz: f64 = idx.iter().map(|&i| noise[i]).sum::<f64>() / idx.len() as f64;
        (e, m.variance() - nz)
    };
    let (e_full, v_full) = terms(None);
    let k = pcs.len() as f64;
    let loo: Vec<(f64, f64)> = (0..pcs.len()).map(|i| terms(Some(i))).collect();
    let jack = |f: &dyn Fn(&(f64, f64)) -> f64| -> f64 {
        let vals: Vec<f64> = loo.iter().map(f).collect();
        let mean = vals.iter().sum::<f64>() / k;
        ((k - 1.0) / k * vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt()
    };
    let se_e = jack(&|t| t.0);
    // The jackknife is first order and collapses when the means sit symmetrically
    // around zero; the sample-variance formula (μ4 − σ⁴(k−3)/(k−1))/k does not.
    let mm: Moments = means.iter().copied().collect();
    let m4 = means.iter().map(|m| (m - mm.mean).powi(4)).sum::<f64>() / k;
    let m2 = mm.variance() * (k - 1.0) / k;
    let se_v = jack(&|t| t.1).max(((m4 - m2 * m2 * (k - 3.0) / (k - 1.0)) / k).max(0.0).sqrt());
    let se_sum = jack(&|t| t.0 + t.1).max(se_e.hypot(se_v));

    let samples = theta_samples * inner_samples;
    let rhs_val = e_full + v_full;
    let combined = (lhs.stderr.powi(2) + se_sum.powi(2)).sqrt();
    let z = if combined > 0.0 {
        (lhs.value - rhs_val) / combined
    } else if lhs.value == rhs_val {
        0.0
    } else {
        f64::INFINITY
    };
    let s = seed.named("rhs");
    Ok(DecompositionReport {
        expected_cov: EstimateRecord::new(e_full, se_e, samples, s.clone()),
        var_mean: EstimateRecord::new(v_full, se_v, samples, s.clone()),
        rhs: EstimateRecord::new(rhs_val, se_sum, samples, s),
        pass: z.abs() <= 3.0,
        z,
        lhs,
    })
}

/// Exact (lhs, E[Cov], Var) for a finite mixture by enumerating inputs and flip patterns.
pub fn exact_decomposition(atoms: &[(Arc<dyn BooleanMap>, f64)], eps: f64) -> Result<(f64, f64, f64)> {
    check_eps(eps)?;
    let n = atoms.first().ok_or_else(|| invalid("need at least one atom"))?.0.arity();
    if n > 10 {
        return Err(invalid("exact decomposition enumerates 4^n terms; n must be at most 10"));
    }
    let total_p: f64 = atoms.iter().map(|a| a.1).sum();
    let (mut joint, mut mean, mut mean_sq, mut ecov) = (0.0, 0.0, 0.0, 0.0);
    for (f, p) in atoms {
        check_len(n, f.arity())?;
        let p = p / total_p;
        let xs: Vec<BitVector> = BitVector::enumerate(n).collect();
        let vals: Vec<f64> = xs.iter().map(|x| f.eval_slice(x.as_slice()) as f64).collect();
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        let mut ff = 0.0;
        for (xi, _) in xs.iter().enumerate() {
            for flip in 0..1usize << n {
                let k = flip.count_ones() as i32;
                let w = eps.powi(k) * (1.0 - eps).powi(n as i32 - k);
                ff += w * vals[xi] * vals[xi ^ flip];
            }
        }
        ff /= xs.len() as f64;
        joint += p * ff;
        mean += p * m;
        mean_sq += p * m * m;
        ecov += p * (ff - m * m);
    }
    Ok((joint - mean * mean, ecov, mean_sq - mean * mean))
}

/// C(n, k) as u128, saturating.
pub fn binomial_coefficient(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = match c.checked_mul((n - i) as u128) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    c
}

/// The `rank`-th k-subset of {0..n} in colex order.
pub fn unrank_combination(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut top = n;
    for j in (1..=k).rev() {
        // Largest c < top with C(c, j) ≤ rank.
        let mut c = j - 1;
        while c + 1 < top && binomial_coefficient((c + 1) as u64, j as u64) <= rank {
            c += 1;
        }
        rank -= binomial_coefficient(c as u64, j as u64);
        out.push(c);
        top = c;
    }
    out.reverse();
    out
}

/// Largest population sampled without replacement by rank.
const RANKED_LIMIT: u128 = 1 << 40;

/// M_k/C(n,k): the fraction of η at Hamming distance k from ω with f(η) ≠ f(ω).
///
/// All subsets are enumerated when `eta_samples ≥ C(n,k)` (zero error). Otherwise
/// subsets are drawn uniformly, without replacement via ranks when C(n,k) is
/// moderate and with replacement beyond that.
pub fn mk_fraction_of(
    f: &dyn Fn(&BitVector) -> i8,
    omega: &BitVector,
    k: usize,
    eta_samples: u64,
    seed: &SeedStream,
) -> Result<EstimateRecord> {
    let n = omega.len();
    if k == 0 || k >= n {
        return Err(invalid(format!("k must lie in 1..={}, got {k}", n.saturating_sub(1))));
    }
    if eta_samples == 0 {
        return Err(invalid("need at least 1 sample"));
    }
    let base = f(omega);
    let flips = |set: &[usize]| {
        let mut eta = omega.clone();
        for &i in set {
            eta.flip_in_place(i);
        }
        f(&eta) != base
    };
    let pop = binomial_coefficient(n as u64, k as u64);
    let mut rng = seed.rng();
    let (hits, m, fpc) = if (eta_samples as u128) >= pop {
        let pop64 = pop as u64;
        let hits = (0..pop64).filter(|&r| flips(&unrank_combination(n, k, r as u128))).count() as u64;
        (hits, pop64, 0.0)
    } else if pop <= RANKED_LIMIT {
        let mut ranks = std::collections::BTreeSet::new();
        // Floyd's algorithm: eta_samples distinct ranks out of pop.
        for j in (pop - eta_samples as u128)..pop {
            let t = rng.random_range(0..=j);
            if !ranks.insert(t) {
                ranks.insert(j);
            }
        }
        let hits = ranks.iter().filter(|&&r| flips(&unrank_combination(n, k, r))).count() as u64;
        let fpc = ((pop - eta_samples as u128) as f64 / (pop - 1) as f64).sqrt();
        (hits, eta_samples, fpc)
    } else {
        let hits = (0..eta_samples).filter(|_| flips(&index::sample(&mut rng, n, k).into_vec())).count() as u64;
        (hits, eta_samples, 1.0)
    };
    let p = hits as f64 / m as f64;
    Ok(EstimateRecord::new(p, binomial_se(p, m) * fpc, m, seed.clone()))
}

pub fn mk_fraction(
    net: &NetworkParams,
    h: &HeadFunction,
    omega: &BitVector,
    k: usize,
    eta_samples: u64,
    seed: &SeedStream,
) -> Result<EstimateRecord> {
    check_len(net.width(), omega.len())?;
    check_len(net.width(), h.arity())?;
    mk_fraction_of(&|x| forward(net, x, h).expect("widths checked"), omega, k, eta_samples, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdPoint {
    pub p: f64,
    pub target: i8,
    /// P(h(ω) = sign(p − 1/2)) for ω with i.i.d. Bernoulli(p) coordinates.
    pub agreement: EstimateRecord,
}

/// Agreement of h with sign(p − 1/2) on biased inputs, for each p.
pub fn sharp_threshold_check(
    h: &dyn BooleanMap,
    p_values: &[f64],
    samples: u64,
    seed: &SeedStream,
) -> Result<Vec<ThresholdPoint>> {
    if samples == 0 {
        return Err(invalid("need at least 1 sample"));
    }
    p_values
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if !(0.0..=1.0).contains(&p) || p == 0.5 {
                return Err(invalid(format!("p = {p} must lie in [0, 1] and differ from 1/2")));
            }
            let target = if p > 0.5 { 1 } else { -1 };
            let s = seed.child(i as u64);
            let hits: u64 = (0..samples.div_ceil(CHUNK))
                .into_par_iter()
                .map(|c| {
                    let mut rng = s.child(c).rng();
                    (c * CHUNK..((c + 1) * CHUNK).min(samples))
                        .filter(|_| h.eval_slice(sample_biased_with(h.arity(), p, &mut rng).as_slice()) == target)
                        .count() as u64
                })
                .sum();
            let a = hits as f64 / samples as f64;
            Ok(ThresholdPoint { p, target, agreement: EstimateRecord::new(a, binomial_se(a, samples), samples, s) })
        })
        .collect()
}
