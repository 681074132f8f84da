//! The disagreement chain D_t on {0, …, n}: exact kernel, correlated steps, evolution.

use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use super::wedge::{g, g_w_unchecked, w_variance, WedgeParams};
use crate::error::{invalid, Error, Result};
use crate::ffnn::WeightModel;
use crate::seed::SeedStream;
use crate::stats::{wilson_interval, EstimateRecord};

/// Largest width for which the dense exact kernel is built.
pub const MAX_DENSE_N: usize = 4096;

/// Binomial(n, p) pmf evaluated in log space.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    if p <= 0.0 {
        let mut v = vec![0.0; n + 1];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; n + 1];
        v[n] = 1.0;
        return v;
    }
    let nf = n as f64;
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let lnf = ln_gamma(nf + 1.0);
    let mut row: Vec<f64> = (0..=n)
        .map(|k| {
            let kf = k as f64;
            (lnf - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0) + kf * lp + (nf - kf) * lq).exp()
        })
        .collect();
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= s);
    row
}

#[derive(Debug, Clone, PartialEq)]
pub enum DisagreementKernel {
    /// Row d is Binomial(n, g(d/n)).
    Exact { n: usize, rows: Vec<Vec<f64>> },
    /// Correlated weights; rows are mixtures over W and are sampled, not stored.
    SampledCorrelated { n: usize, rho: f64, replicas: u64, seed: SeedStream },
}

pub fn exact_kernel(n: usize) -> Result<DisagreementKernel> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    if n > MAX_DENSE_N {
        return Err(invalid(format!("dense kernel limited to n <= {MAX_DENSE_N}")));
    }
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    for d in 0..=n / 2 {
        rows[d] = binomial_pmf(n, g(d as f64 / n as f64));
    }
    if n.is_multiple_of(2) {
        // Middle row: force exact mirror symmetry.
        let m = n / 2;
        let r = &mut rows[m];
        for k in 0..m {
            let avg = 0.5 * (r[k] + r[n - k]);
            r[k] = avg;
            r[n - k] = avg;
        }
    }
    for d in n / 2 + 1..=n {
        let mut r = rows[n - d].clone();
        r.reverse();
        rows[d] = r;
    }
    Ok(DisagreementKernel::Exact { n, rows })
}

pub fn sampled_kernel(n: usize, rho: f64, replicas: u64, seed: SeedStream) -> Result<DisagreementKernel> {
    check_rho(rho)?;
    if n == 0 || replicas == 0 {
        return Err(invalid("need n >= 1 and replicas >= 1"));
    }
    Ok(DisagreementKernel::SampledCorrelated { n, rho, replicas, seed })
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("correlation {rho} outside (0, 1)")))
    }
}

impl DisagreementKernel {
    pub fn n(&self) -> usize {
        match self {
            Self::Exact { n, .. } | Self::SampledCorrelated { n, .. } => *n,
        }
    }

    pub fn row(&self, d: usize) -> Option<&[f64]> {
        match self {
            Self::Exact { rows, .. } => rows.get(d).map(|r| r.as_slice()),
            Self::SampledCorrelated { .. } => None,
        }
    }

    /// One step of the distribution: (μP)(k) = Σ_d μ(d) P(d, k).
    pub fn apply(&self, dist: &[f64]) -> Result<Vec<f64>> {
        let Self::Exact { n, rows } = self else {
            return Err(Error::Unsupported("sampled kernels have no explicit rows".into()));
        };
        let mut out = vec![0.0; n + 1];
        for (d, &m) in dist.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(&rows[d]) {
                *o += m * p;
            }
        }
        Ok(out)
    }
}

/// State used in place of "D/n = 1/2" for odd n.
pub fn half_state(n: usize) -> usize {
    n.div_ceil(2)
}

/// Inclusive band {d : (1/2 − δ)n ≤ d ≤ (1/2 + δ)n}.
pub fn band(n: usize, delta: f64) -> (usize, usize) {
    let nf = n as f64;
    let lo = ((0.5 - delta) * nf - 1e-9).ceil().max(0.0) as usize;
    let hi = ((0.5 + delta) * nf + 1e-9).floor().min(nf) as usize;
    (lo, hi)
}

/// Default band half-width.
pub const DEFAULT_BAND_DELTA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct HittingResult {
    pub absorb0_prob: f64,
    pub absorb_n_prob: f64,
    /// Probability the band was entered at some t ≤ T (t = 0 included).
    pub band_hit_prob: f64,
    pub distribution_at_t: Vec<f64>,
    /// First band-entry time per replica (sampled kernels only).
    pub tau_samples: Option<Vec<Option<usize>>>,
}

/// Evolve an initial distribution for `t` steps; the band uses [`DEFAULT_BAND_DELTA`].
pub fn evolve(kernel: &DisagreementKernel, initial: &[f64], t: usize) -> Result<HittingResult> {
    evolve_with_band(kernel, initial, t, DEFAULT_BAND_DELTA)
}

pub fn evolve_with_band(kernel: &DisagreementKernel, initial: &[f64], t: usize, delta: f64) -> Result<HittingResult> {
    let n = kernel.n();
    if initial.len() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, actual: initial.len() });
    }
    let total: f64 = initial.iter().sum();
    if initial.iter().any(|&p| p < 0.0 || !p.is_finite()) || (total - 1.0).abs() > 1e-9 {
        return Err(invalid("initial distribution must be non-negative and sum to 1"));
    }
    if !(0.0..=0.5).contains(&delta) {
        return Err(invalid("band half-width must lie in [0, 1/2]"));
    }
    let (lo, hi) = band(n, delta);
    match kernel {
        DisagreementKernel::Exact { .. } => {
            let mut dist = initial.to_vec();
            for _ in 0..t {
                dist = kernel.apply(&dist)?;
            }
            // Same chain with the band made absorbing; its mass there is the hit probability.
            let mut free: Vec<f64> = initial.to_vec();
            let mut hit: f64 = free[lo..=hi].iter().sum();
            free[lo..=hi].iter_mut().for_each(|x| *x = 0.0);
            for _ in 0..t {
                free = kernel.apply(&free)?;
                hit += free[lo..=hi].iter().sum::<f64>();
                free[lo..=hi].iter_mut().for_each(|x| *x = 0.0);
            }
            Ok(HittingResult {
                absorb0_prob: dist[0],
                absorb_n_prob: dist[n],
                band_hit_prob: hit.min(1.0),
                distribution_at_t: dist,
                tau_samples: None,
            })
        }
        DisagreementKernel::SampledCorrelated { rho, replicas, seed, .. } => {
            let model = WeightModel::Correlated { rho: *rho };
            let cdf: Vec<f64> = initial
                .iter()
                .scan(0.0, |acc, p| {
                    *acc += p;
                    Some(*acc)
                })
                .collect();
            let runs: Vec<(usize, Option<usize>)> = (0..*replicas)
                .into_par_iter()
                .map(|r| {
                    let mut rng = seed.child(r).rng();
                    let u: f64 = rng.random::<f64>() * total;
                    let mut d = cdf.partition_point(|&c| c < u).min(n);
                    let mut tau = (lo..=hi).contains(&d).then_some(0);
                    for step in 1..=t {
                        if d == 0 || d == n {
                            break;
                        }
                        d = step_model_with(n, model, d, &mut rng);
                        if tau.is_none() && (lo..=hi).contains(&d) {
                            tau = Some(step);
                        }
                    }
                    (d, tau)
                })
                .collect();
            let mut counts = vec![0u64; n + 1];
            let mut taus = Vec::with_capacity(runs.len());
            for (d, tau) in runs {
                counts[d] += 1;
                taus.push(tau);
            }
            let reps = *replicas as f64;
            let dist: Vec<f64> = counts.iter().map(|&c| c as f64 / reps).collect();
            let hit = taus.iter().filter(|t| t.is_some()).count() as f64 / reps;
            Ok(HittingResult {
                absorb0_prob: dist[0],
                absorb_n_prob: dist[n],
                band_hit_prob: hit,
                distribution_at_t: dist,
                tau_samples: Some(taus),
            })
        }
    }
}

/// A draw of the random wedge mean W = (W_C, W_Cc).
pub fn sample_w<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> WedgeParams {
    let s = w_variance(rho).sqrt();
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    WedgeParams::new(s * a, s * b)
}

/// One correlated step from state `d`: draw W, then Binomial(n, g_W(d/n)).
pub fn step_correlated(n: usize, rho: f64, d: usize, seed: &SeedStream) -> Result<usize> {
    check_rho(rho)?;
    if d > n {
        return Err(invalid(format!("state {d} outside 0..={n}")));
    }
    Ok(step_model_with(n, WeightModel::Correlated { rho }, d, &mut seed.rng()))
}

/// One chain step under either weight model (endpoints absorb).
pub fn step_model_with<R: Rng + ?Sized>(n: usize, model: WeightModel, d: usize, rng: &mut R) -> usize {
    if d == 0 || d == n {
        return d;
    }
    let v = d as f64 / n as f64;
    let p = match model {
        WeightModel::Uncorrelated => g(v),
        WeightModel::Correlated { rho } => g_w_unchecked(sample_w(rho, rng), v),
    };
    binomial_draw(n, p, rng)
}

fn binomial_draw<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> usize {
    Binomial::new(n as u64, p.clamp(0.0, 1.0)).expect("valid binomial").sample(rng) as usize
}

/// Empirical law of τ_c = min{t : g_{W_t}(D_{t−1}/n) ≥ c}, censored at `t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauDistribution {
    /// `None` marks a censored replica.
    pub samples: Vec<Option<usize>>,
    pub fraction_hit: f64,
    /// 95% Wilson interval for `fraction_hit`.
    pub ci95: (f64, f64),
}

pub fn tau_hit(
    n: usize,
    rho: f64,
    epsilon: f64,
    c: f64,
    t_max: usize,
    replicas: u64,
    seed: &SeedStream,
) -> Result<TauDistribution> {
    check_rho(rho)?;
    if !(0.0..=1.0).contains(&c) {
        return Err(invalid(format!("threshold {c} outside [0, 1]")));
    }
    if !(0.0..=0.5).contains(&epsilon) || n == 0 || replicas == 0 {
        return Err(invalid("need n >= 1, replicas >= 1 and epsilon in [0, 1/2]"));
    }
    let samples: Vec<Option<usize>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed.child(r).rng();
            let mut d = binomial_draw(n, epsilon, &mut rng);
            for t in 1..=t_max {
                // At 0 no W is drawn and g_W = 0; at n it is 1.
                let p = if d == 0 {
                    0.0
                } else if d == n {
                    1.0
                } else {
                    g_w_unchecked(sample_w(rho, &mut rng), d as f64 / n as f64)
                };
                if p >= c {
                    return Some(t);
                }
                if d == 0 {
                    return None;
                }
                d = binomial_draw(n, p, &mut rng);
            }
            None
        })
        .collect();
    let hits = samples.iter().filter(|s| s.is_some()).count() as u64;
    Ok(TauDistribution {
        fraction_hit: hits as f64 / replicas as f64,
        ci95: wilson_interval(hits, replicas, 1.96),
        samples,
    })
}

/// Probability that the chain from D_0 ~ Binomial(n, ε) enters the band
/// before it is absorbed (at 0 or n), within `t_max` steps.
pub fn band_before_absorption(
    n: usize,
    model: WeightModel,
    epsilon: f64,
    delta: f64,
    t_max: usize,
    replicas: u64,
    seed: &SeedStream,
) -> Result<EstimateRecord> {
    if n == 0 || replicas == 0 || !(0.0..=0.5).contains(&epsilon) || !(0.0..=0.5).contains(&delta) {
        return Err(invalid("need n >= 1, replicas >= 1, epsilon and delta in [0, 1/2]"));
    }
    if let WeightModel::Correlated { rho } = model {
        check_rho(rho)?;
    }
    let (lo, hi) = band(n, delta);
    let hits: u64 = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed.child(r).rng();
            let mut d = binomial_draw(n, epsilon, &mut rng);
            for _ in 0..=t_max {
                if (lo..=hi).contains(&d) {
                    return 1;
                }
                if d == 0 || d == n {
                    return 0;
                }
                d = step_model_with(n, model, d, &mut rng);
            }
            0
        })
        .sum();
    let p = hits as f64 / replicas as f64;
    Ok(EstimateRecord::new(p, crate::stats::binomial_se(p, replicas), replicas, seed.clone()))
}
