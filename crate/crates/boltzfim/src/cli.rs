//! Command-line interface: `gen-data`, `train`, `analyze`, `reproduce`.
//!
//! Exit codes: 0 success (including training runs stopped by the divergence
//! guard — the trace records the abort), 2 invalid flags or configuration,
//! 3 I/O or file-format failure, 4 dimension mismatch between inputs.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::{Dataset, DatasetKind, DatasetSpec};
use crate::encoding::{Encoding, ModelParams};
use crate::error::{Error, Result};
use crate::gibbs::{enumerate_distribution, exact_moments, kl_divergence_empirical};
use crate::harness::report::reproduce;
use crate::harness::trace_io::write_trace;
use crate::harness::{atomic_write, resolve_out_dir};
use crate::optim::{train, MomentMode, Optimizer, TrainConfig};
use crate::spectral::{fim_spectrum, schur_bound, spectral_entropy};

#[derive(Parser, Debug)]
#[command(
    name = "boltzfim",
    version,
    about = "Train pairwise binary energy models and analyze their Fisher information spectra"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output root directory (overrides the BOLTZFIM_OUT environment
    /// variable; default ./runs)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for multi-run commands (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Seed for data generation or training
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a dataset file (plus metadata sidecar) from a seeded spec
    GenData(GenDataArgs),
    /// Train one model on a dataset file and write its trace
    Train(TrainArgs),
    /// Compute the Fisher spectrum and related diagnostics of a saved model
    Analyze(AnalyzeArgs),
    /// Run the full seeded experiment matrix, figures, and acceptance report
    Reproduce,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    /// Bars-and-stripes grid patterns (requires --n)
    Bas,
    /// Synthetic spin-model samples (requires --d and --jc)
    Ising,
}

#[derive(Args, Debug)]
struct GenDataArgs {
    /// Dataset family
    #[arg(long, value_enum)]
    kind: KindArg,

    /// Grid side for --kind bas (dimension becomes n*n)
    #[arg(long)]
    n: Option<usize>,

    /// Number of variables for --kind ising
    #[arg(long)]
    d: Option<usize>,

    /// Coupling scale for --kind ising
    #[arg(long)]
    jc: Option<f64>,

    /// Number of samples to draw
    #[arg(long)]
    count: usize,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Dataset file written by gen-data
    #[arg(long)]
    data: PathBuf,

    /// Parameter encoding
    #[arg(long)]
    encoding: Encoding,

    /// Optimizer
    #[arg(long)]
    opt: Optimizer,

    /// Inverse temperature
    #[arg(long, default_value_t = 1.0)]
    beta: f64,

    /// Number of parameter updates
    #[arg(long, default_value_t = 500)]
    iterations: usize,

    /// Learning rate: the NGD step size, or the SGD numerator in
    /// eta = numerator / lambda_max
    #[arg(long)]
    eta: Option<f64>,

    /// Damping added to the Fisher matrix in NGD and the Schur bound
    #[arg(long, default_value_t = 0.001)]
    damping: f64,

    /// Gradient moment source
    #[arg(long, default_value = "exact")]
    moments: MomentMode,

    /// Fisher-matrix moment source
    #[arg(long, default_value = "exact")]
    fim: MomentMode,

    /// Samples per iteration when a source is "sa"
    #[arg(long, default_value_t = 10_000)]
    samples: usize,

    /// Metropolis chains when a source is "sa"
    #[arg(long, default_value_t = 8)]
    chains: usize,

    /// Record every k-th iteration (the final row is always kept)
    #[arg(long, default_value_t = 1)]
    trace_every: usize,

    /// Output file stem (default: derived from the dataset and flags)
    #[arg(long)]
    stem: Option<String>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Model parameter file (written by train or gen-data)
    #[arg(long)]
    params: PathBuf,

    /// Inverse temperature
    #[arg(long, default_value_t = 1.0)]
    beta: f64,

    /// Damping for the block-elimination eigenvalue bound
    #[arg(long, default_value_t = 0.001)]
    damping: f64,

    /// Optional dataset file; adds exact KL and gradient-norm diagnostics
    #[arg(long)]
    data: Option<PathBuf>,

    /// Optional path for an eigenvalue CSV (index,lambda)
    #[arg(long)]
    eigen: Option<PathBuf>,
}

/// Parse real process arguments and run; clap itself exits with code 2 and
/// usage text on malformed flags.
pub fn run() -> i32 {
    let cli = Cli::parse();
    dispatch(cli)
}

/// In-process entry point for tests: returns the exit code instead of
/// exiting.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => dispatch(cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> i32 {
    let out = resolve_out_dir(cli.out);
    let result = match cli.command {
        Command::GenData(args) => gen_data(&args, cli.seed, &out),
        Command::Train(args) => run_train(&args, cli.seed, &out),
        Command::Analyze(args) => analyze(&args),
        Command::Reproduce => run_reproduce(&out, cli.jobs),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 3,
        Error::Parse { .. } | Error::SchemaVersion { .. } => 3,
        Error::DimensionMismatch { .. } | Error::EncodingMismatch { .. } => 4,
        Error::InvalidArgument(_) | Error::EnumerationGuard { .. } | Error::MomentOrder { .. } => 2,
        Error::Train { source, .. } => exit_code(source),
        _ => 1,
    }
}

fn gen_data(args: &GenDataArgs, seed: u64, out: &Path) -> Result<()> {
    let kind = match args.kind {
        KindArg::Bas => {
            if args.d.is_some() || args.jc.is_some() {
                return Err(Error::InvalidArgument(
                    "--d and --jc apply only to --kind ising".into(),
                ));
            }
            let n = args.n.ok_or_else(|| {
                Error::InvalidArgument("--n is required with --kind bas".into())
            })?;
            DatasetKind::Bas { n }
        }
        KindArg::Ising => {
            if args.n.is_some() {
                return Err(Error::InvalidArgument(
                    "--n applies only to --kind bas".into(),
                ));
            }
            let d = args.d.ok_or_else(|| {
                Error::InvalidArgument("--d is required with --kind ising".into())
            })?;
            let jc = args.jc.ok_or_else(|| {
                Error::InvalidArgument("--jc is required with --kind ising".into())
            })?;
            DatasetKind::IsingSynth { d, jc }
        }
    };
    let spec = DatasetSpec {
        kind,
        count: args.count,
        seed,
    };
    let dataset = spec.generate()?;
    let files = dataset.write(out)?;
    println!("wrote {}", files.data.display());
    println!("digest {}", dataset.digest());
    Ok(())
}

fn run_train(args: &TrainArgs, seed: u64, out: &Path) -> Result<()> {
    let dataset = Dataset::read(&args.data)?;
    let mut cfg = TrainConfig::new(args.encoding, args.opt);
    cfg.beta = args.beta;
    cfg.iterations = args.iterations;
    cfg.damping = args.damping;
    cfg.moment_source = args.moments;
    cfg.fim_source = args.fim;
    cfg.sampler.n = args.samples;
    cfg.sampler.chains = args.chains;
    cfg.trace_every = args.trace_every;
    cfg.seed = seed;
    if let Some(eta) = args.eta {
        match args.opt {
            Optimizer::Ngd => cfg.eta_ngd = eta,
            Optimizer::Sgd => cfg.eta_sgd_numerator = eta,
        }
    }
    let stem = args.stem.clone().unwrap_or_else(|| {
        let base = args
            .data
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into());
        let mut stem = format!("{base}_{}_{}", cfg.encoding, cfg.optimizer);
        if cfg.moment_source == MomentMode::Sa || cfg.fim_source == MomentMode::Sa {
            stem.push_str("_sa");
        }
        stem
    });

    let trace = train(&dataset, &cfg)?;
    let files = write_trace(&trace, out, &stem)?;
    let last = trace.final_row();
    println!(
        "trained {} iterations: final KL {:.6}, lambda_max {:.4e}, lambda_min {:.4e}",
        last.iter,
        last.kl,
        last.lambda_max(),
        last.lambda_min()
    );
    if let Some(reason) = trace.aborted {
        println!("aborted early: {reason} (trace keeps the last diagnosable row)");
    }
    println!("wrote {}", files.trace.display());
    Ok(())
}

fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let params = ModelParams::load(&args.params)?;
    if args.beta <= 0.0 || !args.beta.is_finite() {
        return Err(Error::InvalidArgument("--beta must be positive".into()));
    }
    let dist = enumerate_distribution(&params, args.beta)?;
    let moments = exact_moments(&dist, params.encoding(), 4.min(params.d()))?;
    let table = crate::fisher::fim_from_moments_beta(&moments, args.beta)?;
    let spectrum = fim_spectrum(&table)?;
    let entropy = spectral_entropy(&spectrum)?;
    let schur = schur_bound(&table, args.damping)?;
    println!("model: {} encoding, d = {}", params.encoding(), params.d());
    println!("beta: {}", args.beta);
    println!("lambda_max: {:.6e}", spectrum.lambda_max());
    println!("lambda_min: {:.6e}", spectrum.lambda_min_raw());
    println!("clamped negatives: {}", spectrum.clamped_negatives());
    println!("spectral entropy: {:.6} nats", entropy);
    println!("offblock ratio: {:.6}", table.offblock_ratio());
    println!(
        "schur bound: lambda_min {:.6e} <= {:.6e} ({})",
        schur.lhs,
        schur.rhs,
        if schur.holds { "holds" } else { "violated" }
    );
    if let Some(data_path) = &args.data {
        let dataset = Dataset::read(data_path)?;
        if dataset.d() != params.d() {
            return Err(Error::DimensionMismatch {
                context: "dataset vs model dimension",
                expected: params.d(),
                actual: dataset.d(),
            });
        }
        let kl = kl_divergence_empirical(dataset.distribution(), &dist)?;
        let data_moments = dataset.distribution().moments(params.encoding(), 2)?;
        let model_moments = exact_moments(&dist, params.encoding(), 2)?;
        let grad =
            crate::fisher::likelihood_gradient(&data_moments, &model_moments, args.beta)?;
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        println!("exact KL(data || model): {:.6}", kl);
        println!("gradient norm: {:.6e}", grad_norm);
    }
    if let Some(eigen_path) = &args.eigen {
        let mut csv = String::from("index,lambda\n");
        for (k, ev) in spectrum.eigenvalues().iter().enumerate() {
            csv.push_str(&format!("{k},{ev}\n"));
        }
        atomic_write(eigen_path, csv.as_bytes())?;
        println!("wrote {}", eigen_path.display());
    }
    Ok(())
}

fn run_reproduce(out: &Path, jobs: usize) -> Result<()> {
    let report = reproduce(out, jobs)?;
    print!("{}", report.text);
    println!(
        "{}/{} checks passed; full report at {}",
        report.passed(),
        report.criteria.len(),
        out.join("report.txt").display()
    );
    Ok(())
}
