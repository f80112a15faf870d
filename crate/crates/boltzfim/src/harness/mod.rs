//! Experiment orchestration: run plans over datasets × configurations,
//! atomic file output, trace persistence, plotting, and the reproduction
//! report.

pub mod report;
pub mod svg;
pub mod trace_io;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::data::DatasetSpec;
use crate::error::{Error, Result};
use crate::optim::{train, TrainConfig, TrainingTrace};

/// Environment variable that supplies the output root when `--out` is not
/// given on the command line.
pub const OUT_ENV_VAR: &str = "BOLTZFIM_OUT";

/// Default output root.
pub const DEFAULT_OUT_DIR: &str = "runs";

/// Resolve the output root: explicit flag, then the environment override,
/// then the default.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV_VAR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Write `bytes` to `path` atomically: write a sibling temp file, then
/// rename over the target. Parent directories are created as needed.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = parent {
        std::fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// One named training run: a dataset spec plus a configuration.
#[derive(Debug, Clone)]
pub struct RunSpec {
    /// Unique identifier; doubles as the output file stem.
    pub name: String,
    pub dataset: DatasetSpec,
    pub config: TrainConfig,
}

/// A finished run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub spec: RunSpec,
    pub trace: TrainingTrace,
}

/// A batch of runs executed on a worker pool.
#[derive(Debug, Clone, Default)]
pub struct ExperimentPlan {
    pub runs: Vec<RunSpec>,
}

impl ExperimentPlan {
    pub fn push(&mut self, name: String, dataset: DatasetSpec, config: TrainConfig) {
        self.runs.push(RunSpec {
            name,
            dataset,
            config,
        });
    }

    fn check_unique_names(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for run in &self.runs {
            if !seen.insert(run.name.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate run name `{}`",
                    run.name
                )));
            }
        }
        Ok(())
    }

    /// Execute every run on a pool of `jobs` workers (0 = one per CPU).
    /// Runs share nothing; results come back in plan order.
    pub fn execute(&self, jobs: usize) -> Result<Vec<RunResult>> {
        self.check_unique_names()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
        pool.install(|| {
            self.runs
                .par_iter()
                .map(|spec| {
                    let dataset = spec.dataset.generate()?;
                    let trace = train(&dataset, &spec.config)?;
                    Ok(RunResult {
                        spec: spec.clone(),
                        trace,
                    })
                })
                .collect()
        })
    }
}
