//! SGD and damped natural-gradient updates, the curvature-tracking SGD
//! learning-rate policy, and the training loop with its per-iteration
//! diagnostic trace.
//!
//! Both optimizers apply θ ← θ − η·step where the step direction comes from
//! the moment-matching gradient g = β(E_data[φ] − E_model[φ]); descending on
//! g ascends the data log-likelihood. SGD uses η = numerator / λ_max(F_θ),
//! recomputed every iteration from the current Fisher matrix so the
//! stability bound η < 2/λ_max holds by construction. NGD solves
//! (F + λI)·δ = g and steps along δ with a fixed η.
//!
//! The trace records one diagnostic row per kept iteration index t,
//! describing the model *at* θ_t before any step: exact KL(data‖model),
//! gradient norm, the full FIM spectrum with its entropy, the off-block mass
//! ratio, the Schur bound at the configured damping, and the learning rate
//! that a step from θ_t would use. Row `iterations` is always kept, so a
//! completed trace ends with the final model's diagnostics. Divergence
//! guards (non-finite θ, ‖θ‖_∞ > 1e3, KL above 10× its initial value) stop
//! the run after recording the last diagnosable row and mark the trace
//! aborted instead of erroring.

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::encoding::{Encoding, ModelParams};
use crate::error::{Error, Result};
use crate::fisher::{fim_from_moments_beta, likelihood_gradient, FimMatrix};
use crate::gibbs::{
    enumerate_distribution, exact_moments, kl_divergence_empirical, EmpiricalDistribution,
};
use crate::moments::MomentTable;
use crate::sampler::{empirical_moments, metropolis_sample_with, AnnealSchedule, SiteOrder};
use crate::spectral::{
    fim_spectrum, schur_bound_given_lhs, spectral_entropy, SchurBound, Spectrum,
};
use crate::util::stream_seed;
use crate::data::Dataset;

/// ‖θ‖_∞ beyond this is treated as divergence.
pub const THETA_OVERFLOW: f64 = 1e3;

/// KL above this multiple of its initial value is treated as divergence.
pub const KL_BLOWUP_FACTOR: f64 = 10.0;

/// Update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Ngd,
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimizer::Sgd => "sgd",
            Optimizer::Ngd => "ngd",
        })
    }
}

impl std::str::FromStr for Optimizer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(Optimizer::Sgd),
            "ngd" => Ok(Optimizer::Ngd),
            other => Err(Error::InvalidArgument(format!(
                "unknown optimizer `{other}` (expected sgd or ngd)"
            ))),
        }
    }
}

/// Where model moments (for the gradient or the FIM) come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentMode {
    /// Exhaustive enumeration of the Gibbs distribution.
    Exact,
    /// Annealed Metropolis sampling, a fresh batch every iteration.
    Sa,
}

impl fmt::Display for MomentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MomentMode::Exact => "exact",
            MomentMode::Sa => "sa",
        })
    }
}

impl std::str::FromStr for MomentMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(MomentMode::Exact),
            "sa" => Ok(MomentMode::Sa),
            other => Err(Error::InvalidArgument(format!(
                "unknown moment source `{other}` (expected exact or sa)"
            ))),
        }
    }
}

/// Metropolis sampler settings used when a moment source is SA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSettings {
    /// Samples drawn per batch.
    pub n: usize,
    /// Independent chains the batch is split across.
    pub chains: usize,
    pub schedule: AnnealSchedule,
    pub site_order: SiteOrder,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            n: 10_000,
            chains: crate::sampler::DEFAULT_CHAINS,
            schedule: AnnealSchedule::default(),
            site_order: SiteOrder::Random,
        }
    }
}

/// Full specification of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub encoding: Encoding,
    pub optimizer: Optimizer,
    /// Inverse temperature of the trained model.
    pub beta: f64,
    pub iterations: usize,
    /// Fixed NGD step size.
    pub eta_ngd: f64,
    /// SGD uses η = eta_sgd_numerator / λ_max(F_θ); must sit in (0, 2) so
    /// the stability bound η < 2/λ_max is structural.
    pub eta_sgd_numerator: f64,
    /// Damping λ added to the FIM in the NGD solve and the Schur bound.
    pub damping: f64,
    /// Source of the moments behind the gradient.
    pub moment_source: MomentMode,
    /// Source of the moments behind the FIM.
    pub fim_source: MomentMode,
    pub sampler: SamplerSettings,
    pub seed: u64,
    /// Keep every k-th trace row (the final row is always kept).
    pub trace_every: usize,
}

impl TrainConfig {
    pub fn new(encoding: Encoding, optimizer: Optimizer) -> Self {
        Self {
            encoding,
            optimizer,
            beta: 1.0,
            iterations: 500,
            eta_ngd: 0.01,
            eta_sgd_numerator: 0.01,
            damping: 0.001,
            moment_source: MomentMode::Exact,
            fim_source: MomentMode::Exact,
            sampler: SamplerSettings::default(),
            seed: 0,
            trace_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "beta must be positive and finite, got {}",
                self.beta
            )));
        }
        if self.iterations < 1 {
            return Err(Error::InvalidArgument("iterations must be at least 1".into()));
        }
        if !(self.eta_ngd.is_finite() && self.eta_ngd > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eta_ngd must be positive and finite, got {}",
                self.eta_ngd
            )));
        }
        if !(self.eta_sgd_numerator > 0.0 && self.eta_sgd_numerator < 2.0) {
            return Err(Error::InvalidArgument(format!(
                "eta_sgd_numerator must lie in (0, 2), got {}",
                self.eta_sgd_numerator
            )));
        }
        if !(self.damping.is_finite() && self.damping >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "damping must be nonnegative and finite, got {}",
                self.damping
            )));
        }
        if self.trace_every < 1 {
            return Err(Error::InvalidArgument("trace_every must be at least 1".into()));
        }
        if self.sampler.n < 1 || self.sampler.chains < 1 {
            return Err(Error::InvalidArgument(
                "sampler needs at least one sample and one chain".into(),
            ));
        }
        self.sampler.schedule.validate()
    }
}

/// One gradient-descent update: θ − η·grad.
pub fn sgd_step(theta: &[f64], grad: &[f64], eta: f64) -> Result<Vec<f64>> {
    if theta.len() != grad.len() {
        return Err(Error::DimensionMismatch {
            context: "sgd_step gradient",
            expected: theta.len(),
            actual: grad.len(),
        });
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive and finite, got {eta}"
        )));
    }
    if theta.iter().chain(grad).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sgd_step input"));
    }
    Ok(theta.iter().zip(grad).map(|(t, g)| t - eta * g).collect())
}

pub(crate) fn eta_from_lambda_max(lambda_max: f64, numerator: f64) -> Result<f64> {
    if !(numerator > 0.0 && numerator < 2.0) {
        return Err(Error::InvalidArgument(format!(
            "learning-rate numerator must lie in (0, 2), got {numerator}"
        )));
    }
    if !(lambda_max.is_finite() && lambda_max > 0.0) {
        return Err(Error::ZeroSpectrum);
    }
    Ok(numerator / lambda_max)
}

/// Curvature-tracking SGD learning rate: η = numerator / λ_max(F). With
/// numerator < 2 this always satisfies the stability bound η < 2/λ_max.
pub fn eta_sgd_policy(fim: &FimMatrix, numerator: f64) -> Result<f64> {
    let spectrum = fim_spectrum(fim)?;
    eta_from_lambda_max(spectrum.lambda_max(), numerator)
}

/// One damped natural-gradient update: θ − η·δ with (F + λI)·δ = grad.
pub fn ngd_step(
    theta: &[f64],
    grad: &[f64],
    fim: &FimMatrix,
    eta: f64,
    damping: f64,
) -> Result<Vec<f64>> {
    if theta.len() != grad.len() || theta.len() != fim.len() {
        return Err(Error::DimensionMismatch {
            context: "ngd_step gradient/FIM",
            expected: theta.len(),
            actual: if theta.len() != grad.len() {
                grad.len()
            } else {
                fim.len()
            },
        });
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive and finite, got {eta}"
        )));
    }
    if !(damping.is_finite() && damping >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "damping must be nonnegative and finite, got {damping}"
        )));
    }
    if theta.iter().chain(grad).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ngd_step input"));
    }
    let p = theta.len();
    let a = fim.matrix() + nalgebra::DMatrix::identity(p, p) * damping;
    let g = nalgebra::DVector::from_column_slice(grad);
    let delta = match a.clone().cholesky() {
        Some(ch) => ch.solve(&g),
        // a sampled FIM plus small damping can fail to factor; fall back to LU
        None => match a.clone().lu().solve(&g) {
            Some(x) => x,
            None => return Err(Error::SolveFailure { cond: cond_estimate(&a) }),
        },
    };
    let residual = (&a * &delta - &g).norm();
    if !delta.iter().all(|v| v.is_finite()) || residual > 1e-6 * (g.norm() + 1.0) {
        return Err(Error::SolveFailure { cond: cond_estimate(&a) });
    }
    Ok(theta
        .iter()
        .zip(delta.iter())
        .map(|(t, d)| t - eta * d)
        .collect())
}

fn cond_estimate(a: &nalgebra::DMatrix<f64>) -> f64 {
    let ev = crate::spectral::symmetric_eigenvalues(a);
    let max = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = ev.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Why a run stopped early.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbortReason {
    /// A step produced a non-finite parameter.
    NonFiniteTheta,
    /// ‖θ‖_∞ exceeded [`THETA_OVERFLOW`].
    ThetaOverflow,
    /// KL rose above [`KL_BLOWUP_FACTOR`] times its initial value.
    KlBlowup,
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AbortReason::NonFiniteTheta => "non_finite_theta",
            AbortReason::ThetaOverflow => "theta_overflow",
            AbortReason::KlBlowup => "kl_blowup",
        })
    }
}

/// Diagnostics of the model at one iteration, before any step.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub iter: usize,
    pub theta: Vec<f64>,
    /// Exact KL(data ‖ model) in nats.
    pub kl: f64,
    /// Euclidean norm of the moment-matching gradient.
    pub grad_norm: f64,
    /// Step size a step from this θ would use.
    pub eta: f64,
    pub spectrum: Spectrum,
    pub spectral_entropy: f64,
    /// ‖F12‖_F / ‖F‖_F, the linear↔pair coupling share of the FIM.
    pub offblock_ratio: f64,
    pub schur: SchurBound,
}

impl TraceRow {
    pub fn lambda_max(&self) -> f64 {
        self.spectrum.lambda_max()
    }

    /// Smallest eigenvalue as computed (before any clamping).
    pub fn lambda_min(&self) -> f64 {
        self.spectrum.lambda_min_raw()
    }
}

/// Complete record of a training run.
#[derive(Debug, Clone)]
pub struct TrainingTrace {
    pub config: TrainConfig,
    pub dataset_digest: String,
    pub rows: Vec<TraceRow>,
    pub aborted: Option<AbortReason>,
    pub wall: Duration,
}

impl TrainingTrace {
    pub fn final_row(&self) -> &TraceRow {
        self.rows.last().expect("a trace always has row 0")
    }

    pub fn final_kl(&self) -> f64 {
        self.final_row().kl
    }

    pub fn final_params(&self) -> Result<ModelParams> {
        ModelParams::new(
            self.config.encoding,
            dim_from_params(self.final_row().theta.len()),
            self.final_row().theta.clone(),
        )
    }
}

fn dim_from_params(p: usize) -> usize {
    // p = d(d+1)/2
    let d = (((8 * p + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    debug_assert_eq!(crate::index::param_len(d), p);
    d
}

/// Train on a dataset; the trace records the dataset's digest.
pub fn train(dataset: &Dataset, cfg: &TrainConfig) -> Result<TrainingTrace> {
    train_distribution(dataset.distribution(), dataset.digest(), cfg)
}

/// Train on a bare empirical distribution with a caller-supplied digest.
pub fn train_distribution(
    data: &EmpiricalDistribution,
    dataset_digest: String,
    cfg: &TrainConfig,
) -> Result<TrainingTrace> {
    cfg.validate()?;
    let d = data.d();
    if d < 2 {
        return Err(Error::InvalidArgument(
            "training needs d >= 2 (pair terms required)".into(),
        ));
    }
    let start = Instant::now();
    let encoding = cfg.encoding;
    let beta = cfg.beta;
    let max_order = 4.min(d);
    let in_stage = |iter: usize, stage: &'static str| {
        move |e: Error| Error::Train {
            iter,
            stage,
            source: Box::new(e),
        }
    };
    let data_moments = data
        .moments(encoding, 2)
        .map_err(in_stage(0, "data moments"))?;

    let mut params = ModelParams::zeros(encoding, d)?;
    let mut rows: Vec<TraceRow> = Vec::with_capacity(cfg.iterations / cfg.trace_every + 2);
    let mut aborted = None;
    let mut initial_kl = None;

    for t in 0..=cfg.iterations {
        let model = enumerate_distribution(&params, beta).map_err(in_stage(t, "enumeration"))?;
        let kl = kl_divergence_empirical(data, &model).map_err(in_stage(t, "kl"))?;

        let sa_batch = if cfg.moment_source == MomentMode::Sa || cfg.fim_source == MomentMode::Sa {
            let s = &cfg.sampler;
            let samples = metropolis_sample_with(
                &params,
                beta,
                &s.schedule,
                s.n,
                stream_seed(cfg.seed, t as u64),
                s.chains,
                s.site_order,
            )
            .map_err(in_stage(t, "sampling"))?;
            Some(empirical_moments(&samples, max_order).map_err(in_stage(t, "sampled moments"))?)
        } else {
            None
        };
        let exact_model_moments = if cfg.moment_source == MomentMode::Exact
            || cfg.fim_source == MomentMode::Exact
        {
            Some(exact_moments(&model, encoding, max_order).map_err(in_stage(t, "exact moments"))?)
        } else {
            None
        };
        let pick = |mode: MomentMode| -> &MomentTable {
            match mode {
                MomentMode::Exact => exact_model_moments.as_ref().expect("computed above"),
                MomentMode::Sa => sa_batch.as_ref().expect("computed above"),
            }
        };

        let grad = likelihood_gradient(&data_moments, pick(cfg.moment_source), beta)
            .map_err(in_stage(t, "gradient"))?;
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let fim = fim_from_moments_beta(pick(cfg.fim_source), beta).map_err(in_stage(t, "fim"))?;
        let spectrum = fim_spectrum(&fim).map_err(in_stage(t, "spectrum"))?;
        let entropy = spectral_entropy(&spectrum).map_err(in_stage(t, "entropy"))?;
        let schur = schur_bound_given_lhs(&fim, cfg.damping, spectrum.lambda_min_raw())
            .map_err(in_stage(t, "schur bound"))?;
        let eta = match cfg.optimizer {
            Optimizer::Sgd => eta_from_lambda_max(spectrum.lambda_max(), cfg.eta_sgd_numerator)
                .map_err(in_stage(t, "learning-rate policy"))?,
            Optimizer::Ngd => cfg.eta_ngd,
        };

        let row = TraceRow {
            iter: t,
            theta: params.theta().to_vec(),
            kl,
            grad_norm,
            eta,
            spectrum,
            spectral_entropy: entropy,
            offblock_ratio: fim.offblock_ratio(),
            schur,
        };
        let keep = t % cfg.trace_every == 0 || t == cfg.iterations;
        let kl0 = *initial_kl.get_or_insert(kl);
        let blowup = !kl.is_finite() || kl > KL_BLOWUP_FACTOR * kl0.max(1e-9);
        let mut pending = Some(row);
        if keep || blowup {
            rows.push(pending.take().expect("row not yet kept"));
        }
        if blowup {
            aborted = Some(AbortReason::KlBlowup);
            break;
        }
        if t == cfg.iterations {
            break;
        }

        let next = match cfg.optimizer {
            Optimizer::Sgd => sgd_step(params.theta(), &grad, eta),
            Optimizer::Ngd => ngd_step(params.theta(), &grad, &fim, eta, cfg.damping),
        }
        .map_err(in_stage(t, "step"))?;
        if next.iter().any(|v| !v.is_finite()) {
            aborted = Some(AbortReason::NonFiniteTheta);
        } else if next.iter().any(|v| v.abs() > THETA_OVERFLOW) {
            aborted = Some(AbortReason::ThetaOverflow);
        }
        if aborted.is_some() {
            // the guard fired between trace points: keep this iteration's
            // row so the trace ends at the last diagnosable model
            if let Some(row) = pending.take() {
                rows.push(row);
            }
            break;
        }
        params = params.with_theta(next)?;
    }

    Ok(TrainingTrace {
        config: cfg.clone(),
        dataset_digest,
        rows,
        aborted,
        wall: start.elapsed(),
    })
}
