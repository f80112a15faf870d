//! Shared oracles for integration tests: finite-difference derivatives of
//! the exact negative log-likelihood, power iteration, and seeded model
//! generators. These deliberately avoid the crate's own gradient/FIM code
//! paths so agreement is evidence, not tautology.

#![allow(dead_code)]

use boltzfim::encoding::{Encoding, ModelParams};
use boltzfim::gibbs::{enumerate_distribution, EmpiricalDistribution};
use boltzfim::index::param_len;
use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Exact NLL of `data` under the Gibbs model, computed from scratch.
pub fn exact_nll(params: &ModelParams, beta: f64, data: &EmpiricalDistribution) -> f64 {
    let dist = enumerate_distribution(params, beta).expect("enumeration");
    let total = data.total() as f64;
    -data
        .counts()
        .iter()
        .map(|(&m, &c)| c as f64 * dist.log_prob(m))
        .sum::<f64>()
        / total
}

/// Central-difference gradient of the exact NLL.
pub fn fd_gradient(
    params: &ModelParams,
    beta: f64,
    data: &EmpiricalDistribution,
    h: f64,
) -> Vec<f64> {
    let theta = params.theta().to_vec();
    (0..theta.len())
        .map(|k| {
            let mut tp = theta.clone();
            tp[k] += h;
            let mut tm = theta.clone();
            tm[k] -= h;
            let fp = exact_nll(&params.with_theta(tp).unwrap(), beta, data);
            let fm = exact_nll(&params.with_theta(tm).unwrap(), beta, data);
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Hessian of the exact NLL.
pub fn fd_hessian(
    params: &ModelParams,
    beta: f64,
    data: &EmpiricalDistribution,
    h: f64,
) -> DMatrix<f64> {
    let theta = params.theta().to_vec();
    let p = theta.len();
    let f = |shift_a: usize, da: f64, shift_b: usize, db: f64| {
        let mut t = theta.clone();
        t[shift_a] += da;
        t[shift_b] += db;
        exact_nll(&params.with_theta(t).unwrap(), beta, data)
    };
    DMatrix::from_fn(p, p, |a, b| {
        (f(a, h, b, h) - f(a, h, b, -h) - f(a, -h, b, h) + f(a, -h, b, -h)) / (4.0 * h * h)
    })
}

/// Largest eigenvalue by power iteration on the shifted matrix (independent
/// of the crate's eigensolver).
pub fn power_lambda_max(m: &DMatrix<f64>, iters: usize) -> f64 {
    let p = m.nrows();
    // shift to make the dominant eigenvalue the largest in magnitude
    let shift = m.abs().column_sum().max();
    let a = m + DMatrix::identity(p, p) * shift;
    let mut v = DMatrix::from_element(p, 1, 1.0 / (p as f64).sqrt());
    for _ in 0..iters {
        v = &a * v;
        let n = v.norm();
        v /= n;
    }
    ((v.transpose() * m * &v)[(0, 0)]) / v.norm_squared()
}

/// Seeded random model with parameters uniform in [-scale, scale].
pub fn random_params(encoding: Encoding, d: usize, scale: f64, seed: u64) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta: Vec<f64> = (0..param_len(d))
        .map(|_| rng.gen_range(-scale..=scale))
        .collect();
    ModelParams::new(encoding, d, theta).expect("valid params")
}

/// Seeded random empirical distribution over `d` variables.
pub fn random_data(d: usize, draws: usize, seed: u64) -> EmpiricalDistribution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let masks = (0..draws).map(|_| rng.gen_range(0..(1u64 << d)));
    EmpiricalDistribution::from_masks(d, masks).expect("valid data")
}
