//! The annealed Metropolis sampler against ground truth: draw samples from a
//! random coupled spin model with 8 independent chains and a geometric
//! temperature ramp, then compare every first and second empirical moment to
//! its exactly enumerated value. Errors should shrink like 1/√n.
//!
//! Run with: cargo run --release --example metropolis_vs_exact

use boltzfim::encoding::{Encoding, ModelParams};
use boltzfim::gibbs::{enumerate_distribution, exact_moments};
use boltzfim::index::param_len;
use boltzfim::sampler::{empirical_moments, metropolis_sample, AnnealSchedule};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() -> boltzfim::Result<()> {
    let d = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let theta: Vec<f64> = (0..param_len(d)).map(|_| rng.gen_range(-0.6..0.6)).collect();
    let params = ModelParams::new(Encoding::Ising, d, theta)?;
    let beta = 1.0;

    let exact = exact_moments(&enumerate_distribution(&params, beta)?, Encoding::Ising, 2)?;

    let schedule = AnnealSchedule {
        beta_start: 0.1,
        beta_end: beta,
        sweeps_anneal: 100,
        sweeps_burnin: 200,
        sweeps_thin: 5,
    };

    println!("d = {d} spin model, beta = {beta}, 8 chains, geometric anneal 0.1 → 1.0");
    println!("{:>8}  {:>12}  {:>12}  {:>10}", "samples", "max |Δm1|", "max |Δm2|", "expected");
    for n in [1_000usize, 10_000, 100_000] {
        let samples = metropolis_sample(&params, beta, &schedule, n, 42)?;
        let est = empirical_moments(&samples, 2)?;
        let gap = |k: usize| -> f64 {
            exact
                .order(k)
                .unwrap()
                .iter()
                .zip(est.order(k).unwrap())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max)
        };
        // a crude scale for the expected worst-case error over d(d+1)/2 moments
        let expected = 2.5 / (n as f64).sqrt();
        println!("{n:>8}  {:>12.5}  {:>12.5}  {expected:>10.5}", gap(1), gap(2));
    }

    println!("\nsame seed reproduces the same sample stream:");
    let a = metropolis_sample(&params, beta, &schedule, 5, 7)?;
    let b = metropolis_sample(&params, beta, &schedule, 5, 7)?;
    println!("  masks (seed 7):  {:?}", a.masks());
    println!("  masks (again):   {:?}", b.masks());
    assert_eq!(a.masks(), b.masks());
    Ok(())
}
