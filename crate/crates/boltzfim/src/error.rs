//! Error type shared across the crate.

use crate::encoding::{Convention, Encoding};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("encoding mismatch: expected {expected}, got {actual}")]
    EncodingMismatch { expected: Encoding, actual: Encoding },

    #[error("convention mismatch: expected {expected}, got {actual}")]
    ConventionMismatch {
        expected: Convention,
        actual: Convention,
    },

    #[error("enumeration guard: d = {d} exceeds the exhaustive-enumeration limit of {limit}")]
    EnumerationGuard { d: usize, limit: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("moment table holds orders up to {have} but order {needed} was requested")]
    MomentOrder { needed: usize, have: usize },

    #[error("spectrum has no positive eigenvalue")]
    ZeroSpectrum,

    #[error(
        "exact-source FIM has eigenvalue {lambda_min:.3e} below the PSD tolerance -{tol:.0e}"
    )]
    IndefiniteExactFim { lambda_min: f64, tol: f64 },

    #[error(
        "linear block is singular: solve failed at damping {damping:.3e} and again at the \
         1e-10 fallback; pass a larger damping"
    )]
    SingularBlock { damping: f64 },

    #[error("linear solve failed (condition estimate {cond:.3e}); increase damping")]
    SolveFailure { cond: f64 },

    #[error("parse error at {file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    #[error("trace schema version {found} differs from supported version {supported}")]
    SchemaVersion { found: u32, supported: u32 },

    #[error("training failed at iteration {iter} during {stage}: {source}")]
    Train {
        iter: usize,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
