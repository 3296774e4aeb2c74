//! `cbr`: train, benchmark, and evaluate pairwise rankers on sparse
//! `index:value` datasets.
//!
//! Exit codes: 0 on success, 2 for invalid configuration or data, 3 for a
//! numeric failure during training or scoring.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use cbr_core::data::load_dataset;
use cbr_core::error::{Error, Result};
use cbr_core::harness::{
    dataset_name_of, run_experiment, train_single, AlgorithmId, ConfigPatch, DEFAULT_BUFFER,
    DEFAULT_ETA, DEFAULT_SEED,
};
use cbr_core::metrics::{accuracy_at_optroc, auc, ScoredSet};
use cbr_core::report::{emit_report, ReportFormat, ReportRow};
use cbr_core::rng::{derive_seed, SeedTag};
use cbr_core::snapshot::Snapshot;

#[derive(Parser)]
#[command(
    name = "cbr",
    version,
    about = "Online confidence-weighted bipartite ranking over imbalanced streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model on a dataset and report its training-set metrics
    Train(TrainArgs),
    /// Run the seeded cross-validation benchmark protocol
    Bench(BenchArgs),
    /// Score a saved model snapshot against a dataset
    Eval(EvalArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset in sparse index:value format
    #[arg(long)]
    data: PathBuf,

    /// One of: cbr-rs, cbr-fifo, cbr-diag-fifo, uniexp, pa-pair
    #[arg(long)]
    algo: AlgorithmId,

    /// Pair buffer capacity per class
    #[arg(long, default_value_t = DEFAULT_BUFFER)]
    buffer: usize,

    /// Confidence level for the probit margin, in (0.5, 1)
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,

    /// Penalty (learning rate for uniexp)
    #[arg(long, default_value_t = 1.0)]
    c: f64,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Report format for the metrics line
    #[arg(long, default_value = "csv")]
    format: ReportFormat,

    /// Write the trained model snapshot here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON config file mirroring the experiment fields; flags override it
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    data: Option<PathBuf>,

    /// Algorithm to benchmark; repeat the flag to compare several
    #[arg(long = "algo")]
    algos: Vec<String>,

    #[arg(long)]
    buffer: Option<usize>,

    #[arg(long)]
    eta: Option<f64>,

    /// Fixed penalty; skips grid search
    #[arg(long, conflicts_with = "c_grid")]
    c: Option<f64>,

    /// Penalty grid as lo:hi powers-of-two exponents, e.g. -10:10
    #[arg(long, allow_hyphen_values = true)]
    c_grid: Option<String>,

    #[arg(long)]
    folds: Option<usize>,

    #[arg(long)]
    tuning_folds: Option<usize>,

    #[arg(long)]
    runs: Option<usize>,

    /// Subsample each dataset to at most this many instances per run
    #[arg(long)]
    cap: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long, default_value = "csv")]
    format: ReportFormat,

    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Model snapshot written by train
    #[arg(long)]
    snapshot: PathBuf,

    #[arg(long)]
    data: PathBuf,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[arg(long, default_value = "csv")]
    format: ReportFormat,

    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Eval(args) => cmd_eval(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Numeric(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

/// Load a dataset file, mapping multiclass labels with a seed derived from
/// the master seed. Instances keep their file order and raw feature values;
/// only `bench` permutes, subsamples, and rescales.
fn load_file(path: &PathBuf, seed: u64) -> Result<(cbr_core::data::Dataset, String)> {
    let text = fs::read_to_string(path)?;
    let data = load_dataset(&text, derive_seed(seed, SeedTag::Binarize, 0))?;
    Ok((data, dataset_name_of(path)))
}

fn metrics_row(
    scored: &ScoredSet,
    dataset: String,
    algorithm: String,
    train_ms: f64,
    c: Vec<f64>,
    seed: u64,
) -> Result<ReportRow> {
    let (acc, _) = accuracy_at_optroc(scored)?;
    Ok(ReportRow {
        dataset,
        algorithm,
        mean_auc: auc(scored)?,
        std_auc: 0.0,
        mean_acc: acc,
        std_acc: 0.0,
        mean_train_ms: train_ms,
        runs: 1,
        seed,
        chosen_c: c,
        run_seeds: vec![derive_seed(seed, SeedTag::FinalTrain, 0)],
    })
}

fn write_report(rows: &[ReportRow], format: ReportFormat, out: Option<&PathBuf>) -> Result<()> {
    let rendered = emit_report(rows, format);
    match out {
        Some(path) => fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let (data, name) = load_file(&args.data, args.seed)?;
    let started = Instant::now();
    let model = train_single(args.algo, &data, args.buffer, args.eta, args.c, args.seed)?;
    let train_ms = started.elapsed().as_secs_f64() * 1e3;
    let scored = model.score_dataset(&data)?;
    let row = metrics_row(
        &scored,
        name,
        args.algo.name().to_string(),
        train_ms,
        vec![args.c],
        args.seed,
    )?;
    if let Some(path) = &args.out {
        model.snapshot().save(path)?;
    }
    write_report(&[row], args.format, None)
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let from_file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str::<ConfigPatch>(&text)
                .map_err(|e| Error::InvalidInput(format!("config file: {e}")))?
        }
        None => ConfigPatch::default(),
    };
    let from_flags = ConfigPatch {
        data: args.data,
        algorithms: if args.algos.is_empty() {
            None
        } else {
            Some(args.algos)
        },
        buffer: args.buffer,
        eta: args.eta,
        c: args.c,
        c_grid: args.c_grid,
        folds: args.folds,
        tuning_folds: args.tuning_folds,
        runs: args.runs,
        cap: args.cap,
        seed: args.seed,
        full_dim_limit: None,
    };
    let patch = from_file.merged(from_flags);
    let algorithms = patch.parse_algorithms()?;
    let mut rows = Vec::with_capacity(algorithms.len());
    for algorithm in algorithms {
        rows.push(run_experiment(&patch.resolve(algorithm)?)?);
    }
    write_report(&rows, args.format, args.out.as_ref())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let snapshot = Snapshot::load(&args.snapshot)?;
    let (data, name) = load_file(&args.data, args.seed)?;
    if data.dim() > snapshot.dim() {
        return Err(Error::Shape(format!(
            "snapshot covers {} features but the dataset has {}",
            snapshot.dim(),
            data.dim()
        )));
    }
    let scored = cbr_core::harness::score_dataset_with(snapshot.weights(), &data)?;
    let row = metrics_row(
        &scored,
        name,
        format!("snapshot-{}", snapshot.variant_name()),
        0.0,
        vec![],
        args.seed,
    )?;
    write_report(&[row], args.format, args.out.as_ref())
}
