//! Trace persistence. Three files per run, all written atomically:
//!
//! - `<stem>.trace.csv` — one row per recorded iteration with the scalar
//!   diagnostics, columns fixed as
//!   `iter,kl,grad_norm,eta,lambda_max,lambda_min,spectral_entropy,offblock_ratio,schur_lhs,schur_rhs`.
//! - `<stem>.eigen.csv` — the full (clamped, descending) spectrum per
//!   recorded iteration: `iter,lambda_0,...`.
//! - `<stem>.meta.json` — schema version, full config, dataset digest,
//!   abort status, wall time, and the KL direction convention.
//!
//! Floats are rendered with Rust's shortest round-trip formatting, so a
//! repeated run with the same seed produces byte-identical CSVs (wall time
//! lives only in the metadata file for exactly this reason).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{AbortReason, TrainConfig, TrainingTrace};

use super::atomic_write;

/// Version stamped into trace metadata; readers refuse anything else.
pub const TRACE_SCHEMA_VERSION: u32 = 1;

/// Fixed header of the scalar trace CSV.
pub const TRACE_HEADER: &str =
    "iter,kl,grad_norm,eta,lambda_max,lambda_min,spectral_entropy,offblock_ratio,schur_lhs,schur_rhs";

/// Paths written for one run.
#[derive(Debug, Clone)]
pub struct TraceFiles {
    pub trace: PathBuf,
    pub eigen: PathBuf,
    pub meta: PathBuf,
    pub params: PathBuf,
}

/// Scalar trace CSV as a string.
pub fn trace_csv(trace: &TrainingTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.rows.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for row in &trace.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.iter,
            row.kl,
            row.grad_norm,
            row.eta,
            row.lambda_max(),
            row.lambda_min(),
            row.spectral_entropy,
            row.offblock_ratio,
            row.schur.lhs,
            row.schur.rhs,
        ));
    }
    out
}

/// Wide eigenvalue CSV as a string.
pub fn eigen_csv(trace: &TrainingTrace) -> String {
    let p = trace
        .rows
        .first()
        .map(|r| r.spectrum.len())
        .unwrap_or_default();
    let mut out = String::from("iter");
    for k in 0..p {
        out.push_str(&format!(",lambda_{k}"));
    }
    out.push('\n');
    for row in &trace.rows {
        out.push_str(&row.iter.to_string());
        for ev in row.spectrum.eigenvalues() {
            out.push(',');
            out.push_str(&ev.to_string());
        }
        out.push('\n');
    }
    out
}

/// Sidecar metadata for a trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceMeta {
    pub schema_version: u32,
    pub config: TrainConfig,
    pub dataset_digest: String,
    pub aborted: Option<AbortReason>,
    pub rows: usize,
    pub final_iter: usize,
    pub final_kl: f64,
    pub wall_seconds: f64,
    /// KL column direction: divergence of the model from the data,
    /// D(data ‖ model).
    pub kl_direction: String,
}

impl TraceMeta {
    pub fn from_trace(trace: &TrainingTrace) -> Self {
        Self {
            schema_version: TRACE_SCHEMA_VERSION,
            config: trace.config.clone(),
            dataset_digest: trace.dataset_digest.clone(),
            aborted: trace.aborted,
            rows: trace.rows.len(),
            final_iter: trace.final_row().iter,
            final_kl: trace.final_kl(),
            wall_seconds: trace.wall.as_secs_f64(),
            kl_direction: "data_to_model".into(),
        }
    }
}

/// Write the trace, eigenvalue, metadata, and final-model files for a run
/// under `dir` with the given file stem.
pub fn write_trace(trace: &TrainingTrace, dir: &Path, stem: &str) -> Result<TraceFiles> {
    let base = dir.join(stem);
    let files = TraceFiles {
        trace: with_suffix(&base, ".trace.csv"),
        eigen: with_suffix(&base, ".eigen.csv"),
        meta: with_suffix(&base, ".meta.json"),
        params: with_suffix(&base, ".params"),
    };
    atomic_write(&files.trace, trace_csv(trace).as_bytes())?;
    atomic_write(&files.eigen, eigen_csv(trace).as_bytes())?;
    let meta = serde_json::to_string_pretty(&TraceMeta::from_trace(trace))
        .map_err(|e| Error::InvalidArgument(format!("metadata serialization: {e}")))?;
    atomic_write(&files.meta, meta.as_bytes())?;
    trace.final_params()?.save(&files.params)?;
    Ok(files)
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// One parsed row of a scalar trace CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRowLite {
    pub iter: usize,
    pub kl: f64,
    pub grad_norm: f64,
    pub eta: f64,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub spectral_entropy: f64,
    pub offblock_ratio: f64,
    pub schur_lhs: f64,
    pub schur_rhs: f64,
}

/// Read a scalar trace CSV, refusing unknown headers.
pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRowLite>> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path)?;
    let parse = |line: usize, msg: String| Error::Parse {
        file: file.clone(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == TRACE_HEADER => {}
        Some((_, header)) => {
            return Err(parse(1, format!("unrecognized trace header `{header}`")))
        }
        None => return Err(parse(1, "empty trace file".into())),
    }
    let mut rows = Vec::new();
    let mut prev_iter: Option<usize> = None;
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(parse(idx + 1, format!("expected 10 fields, got {}", fields.len())));
        }
        let iter: usize = fields[0]
            .parse()
            .map_err(|e| parse(idx + 1, format!("bad iter: {e}")))?;
        if let Some(prev) = prev_iter {
            if iter <= prev {
                return Err(parse(idx + 1, "iteration indices must increase".into()));
            }
        }
        prev_iter = Some(iter);
        let mut nums = [0.0f64; 9];
        for (k, field) in fields[1..].iter().enumerate() {
            nums[k] = field
                .parse()
                .map_err(|e| parse(idx + 1, format!("bad float `{field}`: {e}")))?;
        }
        rows.push(TraceRowLite {
            iter,
            kl: nums[0],
            grad_norm: nums[1],
            eta: nums[2],
            lambda_max: nums[3],
            lambda_min: nums[4],
            spectral_entropy: nums[5],
            offblock_ratio: nums[6],
            schur_lhs: nums[7],
            schur_rhs: nums[8],
        });
    }
    if rows.is_empty() {
        return Err(parse(1, "trace has no rows".into()));
    }
    Ok(rows)
}

/// Read a trace metadata file, refusing mismatched schema versions.
pub fn read_trace_meta(path: &Path) -> Result<TraceMeta> {
    let text = std::fs::read_to_string(path)?;
    let meta: TraceMeta = serde_json::from_str(&text).map_err(|e| Error::Parse {
        file: path.display().to_string(),
        line: 0,
        msg: e.to_string(),
    })?;
    if meta.schema_version != TRACE_SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: meta.schema_version,
            supported: TRACE_SCHEMA_VERSION,
        });
    }
    Ok(meta)
}

/// Read a wide eigenvalue CSV: (iteration, eigenvalues descending).
pub fn read_eigen_csv(path: &Path) -> Result<Vec<(usize, Vec<f64>)>> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path)?;
    let parse = |line: usize, msg: String| Error::Parse {
        file: file.clone(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse(1, "empty eigen file".into()))?;
    if !header.starts_with("iter,lambda_0") {
        return Err(parse(1, format!("unrecognized eigen header `{header}`")));
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let iter: usize = fields
            .next()
            .unwrap()
            .parse()
            .map_err(|e| parse(idx + 1, format!("bad iter: {e}")))?;
        let evs: std::result::Result<Vec<f64>, _> = fields.map(|f| f.parse::<f64>()).collect();
        let evs = evs.map_err(|e| parse(idx + 1, format!("bad eigenvalue: {e}")))?;
        if evs.len() != width - 1 {
            return Err(parse(idx + 1, "ragged eigen row".into()));
        }
        rows.push((iter, evs));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DatasetKind, DatasetSpec};
    use crate::encoding::Encoding;
    use crate::optim::{train, Optimizer};

    fn short_trace() -> TrainingTrace {
        let dataset = DatasetSpec {
            kind: DatasetKind::Bas { n: 2 },
            count: 80,
            seed: 2,
        }
        .generate()
        .unwrap();
        let mut cfg = TrainConfig::new(Encoding::Qubo, Optimizer::Ngd);
        cfg.iterations = 5;
        train(&dataset, &cfg).unwrap()
    }

    #[test]
    fn csv_round_trip_preserves_every_value() {
        let dir = tempfile::tempdir().unwrap();
        let trace = short_trace();
        let files = write_trace(&trace, dir.path(), "run0").unwrap();
        let rows = read_trace_csv(&files.trace).unwrap();
        assert_eq!(rows.len(), trace.rows.len());
        for (lite, full) in rows.iter().zip(&trace.rows) {
            assert_eq!(lite.iter, full.iter);
            assert_eq!(lite.kl, full.kl);
            assert_eq!(lite.grad_norm, full.grad_norm);
            assert_eq!(lite.eta, full.eta);
            assert_eq!(lite.lambda_max, full.lambda_max());
            assert_eq!(lite.lambda_min, full.lambda_min());
            assert_eq!(lite.spectral_entropy, full.spectral_entropy);
            assert_eq!(lite.offblock_ratio, full.offblock_ratio);
            assert_eq!(lite.schur_lhs, full.schur.lhs);
            assert_eq!(lite.schur_rhs, full.schur.rhs);
        }
        let eigen = read_eigen_csv(&files.eigen).unwrap();
        assert_eq!(eigen.len(), trace.rows.len());
        for ((it, evs), full) in eigen.iter().zip(&trace.rows) {
            assert_eq!(*it, full.iter);
            assert_eq!(evs.as_slice(), full.spectrum.eigenvalues());
        }
    }

    #[test]
    fn metadata_round_trip_and_schema_guard() {
        let dir = tempfile::tempdir().unwrap();
        let trace = short_trace();
        let files = write_trace(&trace, dir.path(), "run0").unwrap();
        let meta = read_trace_meta(&files.meta).unwrap();
        assert_eq!(meta.schema_version, TRACE_SCHEMA_VERSION);
        assert_eq!(meta.config, trace.config);
        assert_eq!(meta.dataset_digest, trace.dataset_digest);
        assert_eq!(meta.final_kl, trace.final_kl());
        assert_eq!(meta.rows, trace.rows.len());
        assert!(meta.aborted.is_none());
        assert_eq!(meta.kl_direction, "data_to_model");

        let text = std::fs::read_to_string(&files.meta)
            .unwrap()
            .replace("\"schema_version\": 1", "\"schema_version\": 99");
        std::fs::write(&files.meta, text).unwrap();
        assert!(matches!(
            read_trace_meta(&files.meta),
            Err(Error::SchemaVersion { found: 99, .. })
        ));
    }

    #[test]
    fn final_params_file_reloads() {
        let dir = tempfile::tempdir().unwrap();
        let trace = short_trace();
        let files = write_trace(&trace, dir.path(), "run0").unwrap();
        let params = crate::encoding::ModelParams::load(&files.params).unwrap();
        assert_eq!(params.encoding(), Encoding::Qubo);
        assert_eq!(params.theta(), trace.final_row().theta.as_slice());
    }

    #[test]
    fn repeated_writes_are_byte_identical() {
        let a = trace_csv(&short_trace());
        let b = trace_csv(&short_trace());
        assert_eq!(a, b);
        let ea = eigen_csv(&short_trace());
        let eb = eigen_csv(&short_trace());
        assert_eq!(ea, eb);
    }

    #[test]
    fn malformed_trace_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, text: &str| {
            let p = dir.path().join(name);
            std::fs::write(&p, text).unwrap();
            p
        };
        let bad_header = write("h.trace.csv", "iter,kl\n0,1\n");
        assert!(read_trace_csv(&bad_header).is_err());
        let empty = write("e.trace.csv", "");
        assert!(read_trace_csv(&empty).is_err());
        let ragged = write(
            "r.trace.csv",
            &format!("{TRACE_HEADER}\n0,1,2,3\n"),
        );
        assert!(read_trace_csv(&ragged).is_err());
        let unordered = write(
            "u.trace.csv",
            &format!("{TRACE_HEADER}\n1,0,0,0.01,1,1,1,0,1,1\n1,0,0,0.01,1,1,1,0,1,1\n"),
        );
        assert!(read_trace_csv(&unordered).is_err());
    }
}
