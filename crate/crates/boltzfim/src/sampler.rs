//! Metropolis sampling with simulated-annealing warm-up, and empirical
//! moments of sample sets.
//!
//! A sampling run pools independent chains (8 by default). Each chain starts
//! from a random configuration, ramps the inverse temperature geometrically
//! from `beta * beta_start` to `beta * beta_end` over `sweeps_anneal` sweeps,
//! holds `sweeps_burnin` sweeps at the target, then records one configuration
//! every `sweeps_thin` sweeps until the pooled quota is met. One sweep is d
//! proposed single-variable flips, at uniformly random sites by default
//! (sequential site order is available). Acceptance is min{1, exp(-β ΔE)}
//! with ΔE maintained incrementally from cached local fields, recomputed from
//! scratch every 1000 sweeps to stop floating-point drift.
//!
//! Chain c draws from ChaCha8 stream (seed, c); pooling is ordered by chain
//! then draw, so a run is a pure function of its arguments.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::encoding::{BinaryConfig, Convention, Encoding, ModelParams};
use crate::error::{Error, Result};
use crate::moments::{accumulate, MomentSource, MomentTable};

/// Default number of pooled chains.
pub const DEFAULT_CHAINS: usize = 8;

/// Sweeps between from-scratch local-field refreshes.
const FIELD_REFRESH_SWEEPS: usize = 1000;

/// Annealing and sampling cadence of a Metropolis run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AnnealSchedule {
    /// Ramp start, as a multiplier on the model's β.
    pub beta_start: f64,
    /// Ramp end and sampling temperature, as a multiplier on the model's β.
    pub beta_end: f64,
    pub sweeps_anneal: usize,
    pub sweeps_burnin: usize,
    pub sweeps_thin: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            beta_start: 0.1,
            beta_end: 1.0,
            sweeps_anneal: 100,
            sweeps_burnin: 100,
            sweeps_thin: 1,
        }
    }
}

impl AnnealSchedule {
    /// No annealing: sample straight at the model's β after a burn-in.
    pub fn fixed_beta(sweeps_burnin: usize, sweeps_thin: usize) -> Self {
        Self {
            beta_start: 1.0,
            beta_end: 1.0,
            sweeps_anneal: 0,
            sweeps_burnin,
            sweeps_thin,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.beta_start) || !pos(self.beta_end) {
            return Err(Error::InvalidArgument(
                "schedule beta_start and beta_end must be positive and finite".into(),
            ));
        }
        if self.sweeps_thin == 0 {
            return Err(Error::InvalidArgument("sweeps_thin must be at least 1".into()));
        }
        Ok(())
    }

    /// Effective β multiplier during anneal sweep t (geometric interpolation,
    /// endpoint inclusive).
    fn ramp(&self, t: usize) -> f64 {
        if self.sweeps_anneal <= 1 {
            return self.beta_end;
        }
        let frac = t as f64 / (self.sweeps_anneal - 1) as f64;
        self.beta_start * (self.beta_end / self.beta_start).powf(frac)
    }
}

/// Proposal site selection within a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteOrder {
    Random,
    Sequential,
}

/// Provenance of a sample set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleSource {
    Exact,
    Sa,
}

/// Drawn configurations, stored as canonical configuration integers plus the
/// alphabet they were sampled in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    d: usize,
    convention: Convention,
    masks: Vec<u64>,
    source: SampleSource,
    seed: u64,
}

impl SampleSet {
    pub(crate) fn from_parts(
        d: usize,
        convention: Convention,
        masks: Vec<u64>,
        source: SampleSource,
        seed: u64,
    ) -> Self {
        Self {
            d,
            convention,
            masks,
            source,
            seed,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.masks.len()
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn source(&self) -> SampleSource {
        self.source
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    /// Materialize sample i in the set's alphabet.
    pub fn config(&self, i: usize) -> BinaryConfig {
        BinaryConfig::from_mask(self.masks[i], self.d, self.convention)
    }

    /// Reinterpret the samples in the other alphabet (s = 2x - 1; the stored
    /// integers are alphabet-free).
    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    /// One configuration per line as a 0/1 string, variable 0 leftmost.
    pub fn write_debug_dump<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        for &mask in &self.masks {
            let line: String = (0..self.d)
                .map(|i| if (mask >> i) & 1 == 1 { '1' } else { '0' })
                .collect();
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

struct Chain<'a> {
    params: &'a ModelParams,
    /// ±1 for spins, 0/1 for bits.
    values: Vec<f64>,
    /// Local field of each site: flipping site k changes the energy by
    /// -2 v_k field_k (spin) or (1 - 2 v_k) field_k (bit).
    fields: Vec<f64>,
    spin: bool,
}

impl<'a> Chain<'a> {
    fn new(params: &'a ModelParams, rng: &mut ChaCha8Rng) -> Self {
        let d = params.d();
        let spin = params.encoding().convention() == Convention::Spin;
        let values = (0..d)
            .map(|_| {
                let bit = rng.gen_bool(0.5);
                match (spin, bit) {
                    (true, true) => 1.0,
                    (true, false) => -1.0,
                    (false, true) => 1.0,
                    (false, false) => 0.0,
                }
            })
            .collect();
        let mut chain = Self {
            params,
            values,
            fields: vec![0.0; d],
            spin,
        };
        chain.refresh_fields();
        chain
    }

    /// Recompute all local fields from scratch.
    fn refresh_fields(&mut self) {
        let d = self.params.d();
        for k in 0..d {
            let mut f = self.params.linear(k);
            for j in 0..d {
                if j != k {
                    f += self.params.pair(k, j) * self.values[j];
                }
            }
            self.fields[k] = f;
        }
    }

    fn delta_e(&self, k: usize) -> f64 {
        if self.spin {
            -2.0 * self.values[k] * self.fields[k]
        } else {
            (1.0 - 2.0 * self.values[k]) * self.fields[k]
        }
    }

    fn flip(&mut self, k: usize) {
        let d = self.params.d();
        if self.spin {
            self.values[k] = -self.values[k];
            let two_v = 2.0 * self.values[k];
            for j in 0..d {
                if j != k {
                    self.fields[j] += self.params.pair(j, k) * two_v;
                }
            }
        } else {
            let delta = 1.0 - 2.0 * self.values[k];
            self.values[k] += delta;
            for j in 0..d {
                if j != k {
                    self.fields[j] += self.params.pair(j, k) * delta;
                }
            }
        }
    }

    fn sweep(&mut self, beta_eff: f64, order: SiteOrder, rng: &mut ChaCha8Rng) {
        let d = self.params.d();
        for step in 0..d {
            let k = match order {
                SiteOrder::Random => rng.gen_range(0..d),
                SiteOrder::Sequential => step,
            };
            let de = self.delta_e(k);
            let accept = de <= 0.0 || rng.gen::<f64>() < (-beta_eff * de).exp();
            if accept {
                self.flip(k);
            }
        }
    }

    fn mask(&self) -> u64 {
        self.values
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &v)| if v > 0.5 { m | (1 << i) } else { m })
    }
}

/// Metropolis sampling with the default chain count and random site order.
pub fn metropolis_sample(
    params: &ModelParams,
    beta: f64,
    schedule: &AnnealSchedule,
    n: usize,
    seed: u64,
) -> Result<SampleSet> {
    metropolis_sample_with(params, beta, schedule, n, seed, DEFAULT_CHAINS, SiteOrder::Random)
}

/// Metropolis sampling with explicit chain count and site order.
pub fn metropolis_sample_with(
    params: &ModelParams,
    beta: f64,
    schedule: &AnnealSchedule,
    n: usize,
    seed: u64,
    chains: usize,
    site_order: SiteOrder,
) -> Result<SampleSet> {
    schedule.validate()?;
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta must be positive and finite, got {beta}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    if chains == 0 {
        return Err(Error::InvalidArgument("chain count must be positive".into()));
    }
    let mut masks = Vec::with_capacity(n);
    for c in 0..chains {
        let quota = n / chains + usize::from(c < n % chains);
        if quota == 0 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let mut chain = Chain::new(params, &mut rng);
        let beta_target = beta * schedule.beta_end;
        let mut sweeps_done = 0usize;
        let mut run_sweep = |chain: &mut Chain, beta_eff: f64, rng: &mut ChaCha8Rng| {
            chain.sweep(beta_eff, site_order, rng);
            sweeps_done += 1;
            if sweeps_done % FIELD_REFRESH_SWEEPS == 0 {
                chain.refresh_fields();
            }
        };
        for t in 0..schedule.sweeps_anneal {
            run_sweep(&mut chain, beta * schedule.ramp(t), &mut rng);
        }
        for _ in 0..schedule.sweeps_burnin {
            run_sweep(&mut chain, beta_target, &mut rng);
        }
        for _ in 0..quota {
            for _ in 0..schedule.sweeps_thin {
                run_sweep(&mut chain, beta_target, &mut rng);
            }
            masks.push(chain.mask());
        }
    }
    Ok(SampleSet::from_parts(
        params.d(),
        params.encoding().convention(),
        masks,
        SampleSource::Sa,
        seed,
    ))
}

/// Sample averages of variable products up to `max_order`, in the alphabet
/// the samples were drawn in.
pub fn empirical_moments(samples: &SampleSet, max_order: usize) -> Result<MomentTable> {
    let encoding = match samples.convention {
        Convention::Spin => Encoding::Ising,
        Convention::Bit => Encoding::Qubo,
    };
    // aggregate identical configurations first; d is small, samples are many
    let mut counts = std::collections::BTreeMap::new();
    for &m in &samples.masks {
        *counts.entry(m).or_insert(0u64) += 1;
    }
    let items: Vec<(u64, f64)> = counts.into_iter().map(|(m, c)| (m, c as f64)).collect();
    accumulate(samples.d, encoding, MomentSource::Empirical, max_order, &items)
}
