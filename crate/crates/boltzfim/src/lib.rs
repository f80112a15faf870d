//! Training and Fisher-information analysis of fully connected pairwise
//! binary energy models under two parameter encodings.
//!
//! The same family of Gibbs distributions over `d` binary variables can be
//! written with spin variables `s ∈ {−1,+1}` ("ising") or bit variables
//! `x ∈ {0,1}` ("qubo"); the encodings are affinely equivalent, yet their
//! Fisher information matrices — and therefore plain-gradient training —
//! behave very differently. This crate provides:
//!
//! - [`encoding`]: parameter containers, energies, and exact conversion
//!   between the two encodings;
//! - [`gibbs`]: exhaustive enumeration of the Gibbs distribution (d ≤ 24),
//!   exact KL divergence, moments, and categorical sampling;
//! - [`sampler`]: an annealed multi-chain Metropolis sampler for moment
//!   estimation beyond enumeration scale;
//! - [`fisher`]: sufficient statistics, the likelihood gradient, and the
//!   Fisher information matrix built from first- through fourth-order
//!   moments;
//! - [`spectral`]: eigenvalue spectra, spectral entropy, and a
//!   block-elimination upper bound on the smallest eigenvalue;
//! - [`optim`]: gradient descent with a curvature-scaled step and damped
//!   natural-gradient descent, with full per-iteration diagnostic traces;
//! - [`data`]: bars-and-stripes grids and seeded synthetic spin-model
//!   datasets with a canonical on-disk format;
//! - [`harness`]: the seeded experiment matrix, trace/figure writers, and
//!   the acceptance checks behind `reproduce`;
//! - [`cli`]: the `boltzfim` binary (`gen-data`, `train`, `analyze`,
//!   `reproduce`).
//!
//! # Conventions
//!
//! - Parameters are stored flat: `d` linear terms, then the `d(d−1)/2` pair
//!   terms in lexicographic order `(0,1), (0,2), …, (d−2,d−1)`.
//! - Configurations are packed into `u64` masks; bit `i` holds variable `i`
//!   (for spins, bit 1 means +1).
//! - Energies enter the Gibbs weight as `exp(−β·E)`; KL divergence is
//!   `KL(data ‖ model)` in nats.
//! - Every stochastic component takes an explicit seed and is deterministic
//!   across platforms.
//!
//! # Examples
//!
//! Runnable walkthroughs live in `examples/`:
//! `encoding_roundtrip`, `exact_gibbs`, `metropolis_vs_exact`,
//! `fim_spectrum`, `train_bas`, and `train_synthetic`.

pub mod cli;
pub mod data;
pub mod encoding;
pub mod error;
pub mod fisher;
pub mod gibbs;
pub mod harness;
pub mod index;
pub mod moments;
pub mod optim;
pub mod sampler;
pub mod spectral;
mod util;

pub use error::{Error, Result};
