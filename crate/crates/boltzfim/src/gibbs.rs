//! Exact Gibbs distributions by exhaustive enumeration, KL divergence, exact
//! moments, and categorical sampling.
//!
//! The Gibbs distribution of a model is P(v) = exp(-β E(v)) / Z over all 2^d
//! configurations. Configurations are indexed by their canonical integer
//! (bit-convention bits, also for spin models). Enumeration is guarded at
//! d ≤ 24; beyond that these routines refuse rather than thrash.
//!
//! KL divergences here are D(p ‖ q) = Σ_k p_k (log p_k - log q_k) in nats,
//! with 0·log 0 = 0. Training reports D(p_data ‖ p_model).

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::encoding::{Encoding, ModelParams};
use crate::error::{Error, Result};
use crate::moments::{accumulate, MomentSource, MomentTable};
use crate::sampler::{SampleSet, SampleSource};

/// Largest dimension enumerated exhaustively (2^24 configurations).
pub const ENUMERATION_LIMIT: usize = 24;

/// Full Gibbs distribution of a model at inverse temperature β.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    d: usize,
    beta: f64,
    log_z: f64,
    log_p: Vec<f64>,
}

/// Enumerate P(v) = exp(-β E(v)) / Z for every configuration. The log
/// normalizer uses a max-shifted log-sum-exp and a fixed summation order, so
/// repeated calls are bit-identical.
pub fn enumerate_distribution(params: &ModelParams, beta: f64) -> Result<ExactDistribution> {
    let d = params.d();
    if d > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard {
            d,
            limit: ENUMERATION_LIMIT,
        });
    }
    if !beta.is_finite() {
        return Err(Error::NonFinite("beta"));
    }
    if beta <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let n = 1usize << d;
    let mut neg_beta_e = Vec::with_capacity(n);
    let mut max = f64::NEG_INFINITY;
    for mask in 0..n as u64 {
        let v = -beta * params.energy_of_mask(mask);
        if !v.is_finite() {
            return Err(Error::NonFinite("energy"));
        }
        if v > max {
            max = v;
        }
        neg_beta_e.push(v);
    }
    let sum: f64 = neg_beta_e.iter().map(|v| (v - max).exp()).sum();
    let log_z = max + sum.ln();
    let log_p = neg_beta_e.iter().map(|v| v - log_z).collect();
    Ok(ExactDistribution {
        d,
        beta,
        log_z,
        log_p,
    })
}

impl ExactDistribution {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn log_prob(&self, mask: u64) -> f64 {
        self.log_p[mask as usize]
    }

    pub fn prob(&self, mask: u64) -> f64 {
        self.log_p[mask as usize].exp()
    }

    pub fn len(&self) -> usize {
        self.log_p.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// D(p ‖ q) between two exact distributions on the same variable count.
pub fn kl_divergence(p: &ExactDistribution, q: &ExactDistribution) -> Result<f64> {
    if p.d != q.d {
        return Err(Error::DimensionMismatch {
            context: "KL divergence",
            expected: p.d,
            actual: q.d,
        });
    }
    let mut kl = 0.0;
    for (lp, lq) in p.log_p.iter().zip(&q.log_p) {
        kl += lp.exp() * (lp - lq);
    }
    Ok(kl)
}

/// D(p_data ‖ q) of an empirical distribution against an exact model.
pub fn kl_divergence_empirical(p: &EmpiricalDistribution, q: &ExactDistribution) -> Result<f64> {
    if p.d != q.d {
        return Err(Error::DimensionMismatch {
            context: "KL divergence",
            expected: p.d,
            actual: q.d,
        });
    }
    let total = p.total as f64;
    let mut kl = 0.0;
    for (&mask, &count) in &p.counts {
        let pk = count as f64 / total;
        kl += pk * (pk.ln() - q.log_prob(mask));
    }
    Ok(kl)
}

/// Expectation tensors of the distribution in the given encoding's alphabet,
/// complete to `max_order`.
pub fn exact_moments(
    dist: &ExactDistribution,
    encoding: Encoding,
    max_order: usize,
) -> Result<MomentTable> {
    let items: Vec<(u64, f64)> = (0..dist.log_p.len() as u64)
        .map(|mask| (mask, dist.prob(mask)))
        .collect();
    accumulate(dist.d, encoding, MomentSource::Exact, max_order, &items)
}

/// n categorical draws from the exact distribution. Deterministic in `seed`.
pub fn sample_exact(dist: &ExactDistribution, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let mut cumulative = Vec::with_capacity(dist.log_p.len());
    let mut acc = 0.0;
    for lp in &dist.log_p {
        acc += lp.exp();
        cumulative.push(acc);
    }
    let top = *cumulative.last().expect("distribution is never empty");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let masks = (0..n)
        .map(|_| {
            let u = rng.gen::<f64>() * top;
            cumulative.partition_point(|&c| c <= u).min(dist.log_p.len() - 1) as u64
        })
        .collect();
    Ok(SampleSet::from_parts(
        dist.d,
        Encoding::Qubo.convention(),
        masks,
        SampleSource::Exact,
        seed,
    ))
}

/// Dataset as configuration counts: a distribution with finite support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    d: usize,
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl EmpiricalDistribution {
    pub fn from_counts(d: usize, counts: BTreeMap<u64, u64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("d must be at least 1".into()));
        }
        if d < 64 {
            if let Some((&mask, _)) = counts.iter().next_back() {
                if mask >> d != 0 {
                    return Err(Error::DimensionMismatch {
                        context: "configuration integer vs d",
                        expected: d,
                        actual: 64 - mask.leading_zeros() as usize,
                    });
                }
            }
        }
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(Error::InvalidArgument("empty dataset".into()));
        }
        Ok(Self { d, counts, total })
    }

    pub fn from_masks(d: usize, masks: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for m in masks {
            *counts.entry(m).or_insert(0) += 1;
        }
        Self::from_counts(d, counts)
    }

    pub fn from_sample_set(samples: &SampleSet) -> Result<Self> {
        Self::from_masks(samples.d(), samples.masks().iter().copied())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    pub fn frequency(&self, mask: u64) -> f64 {
        self.counts.get(&mask).map_or(0.0, |&c| c as f64 / self.total as f64)
    }

    /// Shannon entropy -Σ p log p in nats.
    pub fn entropy(&self) -> f64 {
        let total = self.total as f64;
        -self
            .counts
            .values()
            .map(|&c| {
                let p = c as f64 / total;
                p * p.ln()
            })
            .sum::<f64>()
    }

    /// Moments of the dataset in the given encoding's alphabet.
    pub fn moments(&self, encoding: Encoding, max_order: usize) -> Result<MomentTable> {
        let items: Vec<(u64, f64)> = self
            .counts
            .iter()
            .map(|(&mask, &count)| (mask, count as f64))
            .collect();
        accumulate(self.d, encoding, MomentSource::Empirical, max_order, &items)
    }
}
