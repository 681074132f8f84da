//! Quick oracle checks behind `boolnet selftest`.

use std::time::Instant;

use boolnet_core::bits::{apply_noise_with, sample_uniform_with, BitVector, NoiseSpec};
use boolnet_core::chain::{binomial_pmf, evolve, exact_kernel};
use boolnet_core::conv::{all_majority, closest_pair, freeze_analysis, stride1_flip_bound};
use boolnet_core::estimators::{annealed_covariance, PointMass};
use boolnet_core::revealment::QueryAlgorithm;
use boolnet_core::stats::binomial_se;
use boolnet_core::{evaluate_direct, g, g_w, ReferenceFunction, SeedStream, WedgeParams};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

type Outcome = Result<(bool, String), boolnet_core::Error>;

fn kernel_rows() -> Outcome {
    let k = exact_kernel(16)?;
    let worst = (0..=16).map(|d| (k.row(d).expect("dense").iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
    Ok((worst < 1e-12, format!("max |row sum - 1| = {worst:.1e}")))
}

fn wedge_at_origin() -> Outcome {
    let worst = [0.05, 0.2, 0.5, 0.8]
        .iter()
        .map(|&v| Ok((g_w(WedgeParams::new(0.0, 0.0), v)? - g(v)).abs()))
        .collect::<Result<Vec<f64>, boolnet_core::Error>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok((worst < 1e-9, format!("max |g_0 - g| = {worst:.1e}")))
}

fn small_chain_absorbs() -> Outcome {
    let h = evolve(&exact_kernel(8)?, &binomial_pmf(8, 0.1), 10_000)?;
    let p = h.absorb0_prob + h.absorb_n_prob;
    Ok((p >= 0.99, format!("P(absorbed) = {p:.6}")))
}

fn parity_covariance(seed: &SeedStream) -> Outcome {
    let fam = PointMass(std::sync::Arc::new(ReferenceFunction::parity(5)?));
    let est = annealed_covariance(&fam, 0.1, 40_000, seed)?;
    let exact = 0.8f64.powi(5);
    Ok((est.within(exact, 4.0), format!("{:.4} ± {:.4} vs {exact:.4}", est.value, est.stderr)))
}

fn stride_one_bound(seed: &SeedStream) -> Outcome {
    let (n, eps, reps) = (201, 0.1, 20_000u64);
    let noise = NoiseSpec::new(eps)?;
    let mut rng = seed.rng();
    let mut flips = 0u64;
    for _ in 0..reps {
        let x = sample_uniform_with(n, &mut rng);
        let y = apply_noise_with(&x, noise, &mut rng);
        flips += u64::from(closest_pair(&x)?.0 != closest_pair(&y)?.0);
    }
    let p = flips as f64 / reps as f64;
    let bound = stride1_flip_bound(eps);
    Ok((p <= bound + 4.0 * binomial_se(p, reps), format!("{p:.4} vs bound {bound:.4}")))
}

fn query_algorithm_exact() -> Outcome {
    let alg = QueryAlgorithm::majority(3)?;
    let filters = all_majority(3);
    let s = SeedStream::new(1);
    let mut bad = 0;
    for (i, x) in BitVector::enumerate(15).enumerate() {
        if alg.run(&x, &s.child(i as u64))?.output != evaluate_direct(alg.graph(), &filters, &x)? {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{bad} of 32768 inputs disagree")))
}

fn freezing_bound(seed: &SeedStream) -> Outcome {
    let mut rng = seed.rng();
    for _ in 0..500 {
        freeze_analysis(&sample_uniform_with(101, &mut rng), 1, 101)?;
    }
    Ok((true, "500 cycles froze within the run-length bound".into()))
}

pub fn run() -> Vec<Check> {
    let seed = SeedStream::new(0x5e1f).named("selftest");
    let checks: Vec<(&'static str, Box<dyn Fn() -> Outcome>)> = vec![
        ("exact kernel rows", Box::new(kernel_rows)),
        ("wedge integral at w = 0", Box::new(wedge_at_origin)),
        ("small chain absorbs", Box::new(small_chain_absorbs)),
        ("parity covariance", Box::new(|| parity_covariance(&seed.child(0)))),
        ("stride-1 flip bound", Box::new(|| stride_one_bound(&seed.child(1)))),
        ("query algorithm output", Box::new(query_algorithm_exact)),
        ("cycle freezing bound", Box::new(|| freezing_bound(&seed.child(2)))),
    ];
    checks
        .into_iter()
        .map(|(name, f)| {
            let t = Instant::now();
            let (pass, detail) = f().unwrap_or_else(|e| (false, e.to_string()));
            Check { name, pass, detail, seconds: t.elapsed().as_secs_f64() }
        })
        .collect()
}
