//! Pilot runs that fix the Monte Carlo thresholds used by the acceptance suite.
//!
//! Seeds here are disjoint from the ones the acceptance tests use.
//! Run with `cargo run --release -p boolnet-core --example pilot`.

use boolnet_core::bits::sample_uniform;
use boolnet_core::chain::band_before_absorption;
use boolnet_core::estimators::{annealed_covariance, mk_fraction, quenched_profile, NetworkFamily};
use boolnet_core::ffnn::sample_network;
use boolnet_core::{HeadFunction, ReferenceFunction, SeedStream, WeightModel};

fn main() -> boolnet_core::Result<()> {
    let seed = SeedStream::new(0x0009_1707).named("pilot");
    let head64 = HeadFunction::reference(ReferenceFunction::tie_broken_majority(64)?)?;

    for t in [1, 3, 10, 30] {
        let fam = NetworkFamily::new(64, t, WeightModel::Uncorrelated, head64.clone())?;
        let e = annealed_covariance(&fam, 0.1, 100_000, &seed.named("annealed").child(t as u64))?;
        println!("annealed n=64 eps=0.1 T={t}: {:.4} ± {:.4}", e.value, e.stderr);
    }
    for t in [1, 30] {
        let fam = NetworkFamily::new(64, t, WeightModel::Uncorrelated, head64.clone())?;
        let q = quenched_profile(&fam, 0.1, 50, 2000, 0.05, &seed.named("quenched").child(t as u64))?;
        let vals: Vec<String> = q.estimates.iter().map(|e| format!("{:.3}", e.value)).collect();
        println!("quenched n=64 T={t} delta=0.05: fraction_below = {:.2}", q.fraction_below);
        println!("  per-theta: {}", vals.join(" "));
    }

    let head14 = HeadFunction::reference(ReferenceFunction::tie_broken_majority(14)?)?;
    let mut inside = 0;
    let mut fractions = Vec::new();
    for i in 0..100u64 {
        let s = seed.named("mk").child(i);
        let net = sample_network(14, 40, WeightModel::Uncorrelated, &s.child(0))?;
        let omega = sample_uniform(14, &s.child(1))?;
        let m = mk_fraction(&net, &head14, &omega, 1, 14, &s.child(2))?;
        if m.value > 0.35 && m.value < 0.65 {
            inside += 1;
        }
        fractions.push(m.value);
    }
    fractions.sort_by(f64::total_cmp);
    println!("M_1/n n=14 T=40: {inside}/100 inside (0.35, 0.65)");
    println!("  sorted: {}", fractions.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" "));

    for rho in [0.5, 0.999] {
        for t_max in [200, 2000] {
            let e = band_before_absorption(
                1024,
                WeightModel::correlated(rho)?,
                10.0 / 1024.0,
                0.1,
                t_max,
                1000,
                &seed.named("band").child((rho * 1000.0) as u64),
            )?;
            println!("band-before-absorption n=1024 rho={rho} t_max={t_max}: {:.3} ± {:.3}", e.value, e.stderr);
        }
    }
    Ok(())
}
