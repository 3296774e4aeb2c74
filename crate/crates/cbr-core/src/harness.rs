//! The experiment engine: seeded runs over a dataset, fold splitting,
//! penalty tuning by cross-validated AUC, timed final training, and report
//! row assembly.
//!
//! Every random decision flows from the master seed through named derive
//! tags, so a report is reproducible from (config, seed) alone. Runs and
//! grid points are embarrassingly parallel; with the `parallel` feature
//! they fan out over a rayon pool, and results are merged in index order so
//! the output is identical either way.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::baseline::{train_pa_pair, train_uniexp, LinearRanker};
use crate::buffer::BufferPolicy;
use crate::data::{load_dataset, Dataset, Label};
use crate::error::{Error, Result};
use crate::linalg::dot_sparse;
use crate::metrics::{accuracy_at_optroc, auc, ScoredSet};
use crate::prep::{apply_scaling, permute, scale_features, split_folds, subsample};
use crate::ranker::{train_diag, train_full, DiagGaussianRanker, GaussianRanker, StreamConfig};
use crate::report::{mean, sample_std, ReportRow};
use crate::rng::{derive_seed, SeedTag, SplitMix64};
use crate::snapshot::Snapshot;
use crate::stats::ProbitParams;

pub const DEFAULT_BUFFER: usize = 50;
pub const DEFAULT_ETA: f64 = 0.7;
pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_TUNING_FOLDS: usize = 2;
pub const DEFAULT_RUNS: usize = 10;
pub const DEFAULT_CAP: usize = 8000;
pub const HIGH_DIM_DEFAULT_RUNS: usize = 5;
pub const HIGH_DIM_DEFAULT_CAP: usize = 2000;
pub const DEFAULT_FULL_DIM_LIMIT: usize = 1000;
pub const DEFAULT_SEED: u64 = 42;
pub const TUNE_SPLIT_ATTEMPTS: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmId {
    /// Full covariance, reservoir-sampled buffers.
    CbrRs,
    /// Full covariance, first-in-first-out buffers.
    CbrFifo,
    /// Diagonal confidence, first-in-first-out buffers.
    CbrDiagFifo,
    /// Pointwise exponential-loss baseline (no buffers; the grid value is
    /// its learning rate).
    UniExp,
    /// Passive-aggressive pairwise baseline, reservoir-sampled buffers.
    PaPair,
}

pub const ALGORITHM_IDS: [AlgorithmId; 5] = [
    AlgorithmId::CbrRs,
    AlgorithmId::CbrFifo,
    AlgorithmId::CbrDiagFifo,
    AlgorithmId::UniExp,
    AlgorithmId::PaPair,
];

impl AlgorithmId {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::CbrRs => "cbr-rs",
            AlgorithmId::CbrFifo => "cbr-fifo",
            AlgorithmId::CbrDiagFifo => "cbr-diag-fifo",
            AlgorithmId::UniExp => "uniexp",
            AlgorithmId::PaPair => "pa-pair",
        }
    }

    /// True for the variants that materialize a dense d×d covariance.
    pub fn is_full_covariance(self) -> bool {
        matches!(self, AlgorithmId::CbrRs | AlgorithmId::CbrFifo)
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ALGORITHM_IDS
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown algorithm {s:?}, expected one of cbr-rs, cbr-fifo, cbr-diag-fifo, uniexp, pa-pair"
                ))
            })
    }
}

/// Fully resolved experiment parameters. Build one through
/// [`ConfigPatch::resolve`] to get the protocol defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: Option<PathBuf>,
    pub algorithm: AlgorithmId,
    pub buffer: usize,
    pub eta: f64,
    pub c_grid: Vec<f64>,
    pub folds: usize,
    pub tuning_folds: usize,
    pub runs: usize,
    pub cap: usize,
    pub seed: u64,
    pub full_dim_limit: usize,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<ProbitParams> {
        if self.buffer == 0 {
            return Err(Error::InvalidInput("buffer capacity must be positive".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidInput(
                "need at least 2 folds to hold out a test fold".into(),
            ));
        }
        if self.tuning_folds < 2 {
            return Err(Error::InvalidInput("need at least 2 tuning folds".into()));
        }
        if self.runs == 0 {
            return Err(Error::InvalidInput("need at least one run".into()));
        }
        if self.cap == 0 {
            return Err(Error::InvalidInput("sample cap must be positive".into()));
        }
        if self.c_grid.is_empty() {
            return Err(Error::InvalidInput("penalty grid is empty".into()));
        }
        for &c in &self.c_grid {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "penalty grid values must be positive and finite, got {c}"
                )));
            }
        }
        for pair in self.c_grid.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidInput(
                    "penalty grid must be strictly ascending".into(),
                ));
            }
        }
        ProbitParams::new(self.eta)
    }
}

pub fn default_c_grid() -> Vec<f64> {
    (-10..=10).map(|e| f64::powi(2.0, e)).collect()
}

/// Parse a `lo:hi` exponent range into the ascending grid {2^lo, …, 2^hi}.
pub fn parse_c_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || {
        Error::InvalidInput(format!(
            "penalty grid must look like lo:hi with integer exponents, got {s:?}"
        ))
    };
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: i32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i32 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(Error::InvalidInput(format!(
            "penalty grid range is empty: {lo} > {hi}"
        )));
    }
    if lo < -1000 || hi > 1000 {
        return Err(Error::InvalidInput(format!(
            "penalty grid exponents out of range: {lo}:{hi}"
        )));
    }
    Ok((lo..=hi).map(|e| f64::powi(2.0, e)).collect())
}

/// Partial configuration as read from a JSON file or assembled from CLI
/// flags; unset fields fall back to protocol defaults in [`resolve`].
///
/// [`resolve`]: ConfigPatch::resolve
#[derive(Debug, Clone, Default, PartialEq, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigPatch {
    pub data: Option<PathBuf>,
    pub algorithms: Option<Vec<String>>,
    pub buffer: Option<usize>,
    pub eta: Option<f64>,
    pub c: Option<f64>,
    pub c_grid: Option<String>,
    pub folds: Option<usize>,
    pub tuning_folds: Option<usize>,
    pub runs: Option<usize>,
    pub cap: Option<usize>,
    pub seed: Option<u64>,
    pub full_dim_limit: Option<usize>,
}

impl ConfigPatch {
    /// Overlay `over` on `self`, field by field. Used to apply CLI flags on
    /// top of a config file.
    pub fn merged(self, over: ConfigPatch) -> ConfigPatch {
        ConfigPatch {
            data: over.data.or(self.data),
            algorithms: over.algorithms.or(self.algorithms),
            buffer: over.buffer.or(self.buffer),
            eta: over.eta.or(self.eta),
            c: over.c.or(self.c),
            c_grid: over.c_grid.or(self.c_grid),
            folds: over.folds.or(self.folds),
            tuning_folds: over.tuning_folds.or(self.tuning_folds),
            runs: over.runs.or(self.runs),
            cap: over.cap.or(self.cap),
            seed: over.seed.or(self.seed),
            full_dim_limit: over.full_dim_limit.or(self.full_dim_limit),
        }
    }

    pub fn parse_algorithms(&self) -> Result<Vec<AlgorithmId>> {
        match &self.algorithms {
            None => Err(Error::InvalidInput(
                "no algorithm selected; pass --algo or set \"algorithms\" in the config".into(),
            )),
            Some(names) if names.is_empty() => {
                Err(Error::InvalidInput("algorithm list is empty".into()))
            }
            Some(names) => names.iter().map(|n| n.parse()).collect(),
        }
    }

    /// Resolve against the protocol defaults for one algorithm. The
    /// high-dimensional (diagonal) track defaults to fewer runs and a
    /// smaller sample cap; a single `c` beats `c_grid` when both are set.
    pub fn resolve(&self, algorithm: AlgorithmId) -> Result<ExperimentConfig> {
        let c_grid = match (self.c, &self.c_grid) {
            (Some(c), _) => {
                if !(c.is_finite() && c > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "penalty must be positive and finite, got {c}"
                    )));
                }
                vec![c]
            }
            (None, Some(spec)) => parse_c_grid(spec)?,
            (None, None) => default_c_grid(),
        };
        let high_dim = algorithm == AlgorithmId::CbrDiagFifo;
        let config = ExperimentConfig {
            data: self.data.clone(),
            algorithm,
            buffer: self.buffer.unwrap_or(DEFAULT_BUFFER),
            eta: self.eta.unwrap_or(DEFAULT_ETA),
            c_grid,
            folds: self.folds.unwrap_or(DEFAULT_FOLDS),
            tuning_folds: self.tuning_folds.unwrap_or(DEFAULT_TUNING_FOLDS),
            runs: self.runs.unwrap_or(if high_dim {
                HIGH_DIM_DEFAULT_RUNS
            } else {
                DEFAULT_RUNS
            }),
            cap: self.cap.unwrap_or(if high_dim {
                HIGH_DIM_DEFAULT_CAP
            } else {
                DEFAULT_CAP
            }),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            full_dim_limit: self.full_dim_limit.unwrap_or(DEFAULT_FULL_DIM_LIMIT),
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Parallel,
}

impl Parallelism {
    /// Parallel when compiled with the `parallel` feature, else sequential.
    pub fn available() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Parallel
        } else {
            Parallelism::Sequential
        }
    }
}

fn map_indexed<T, F>(par: Parallelism, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Send + Sync,
{
    match par {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        Parallelism::Parallel => (0..n).map(f).collect(),
        Parallelism::Sequential => (0..n).map(f).collect(),
    }
}

/// A trained model of any algorithm, reduced to what evaluation needs.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Full(GaussianRanker),
    Diag(DiagGaussianRanker),
    Linear(LinearRanker),
}

impl Model {
    pub fn score(&self, x: &crate::data::SparseVec) -> Result<f64> {
        match self {
            Model::Full(m) => m.score(x),
            Model::Diag(m) => m.score(x),
            Model::Linear(m) => m.score(x),
        }
    }

    pub fn score_dataset(&self, data: &Dataset) -> Result<ScoredSet> {
        let mut pos = Vec::with_capacity(data.n_pos());
        let mut neg = Vec::with_capacity(data.n_neg());
        for inst in data.instances() {
            let s = self.score(&inst.x)?;
            match inst.y {
                Label::Pos => pos.push(s),
                Label::Neg => neg.push(s),
            }
        }
        ScoredSet::new(pos, neg)
    }

    pub fn snapshot(&self) -> Snapshot {
        match self {
            Model::Full(m) => Snapshot::of_full(m),
            Model::Diag(m) => Snapshot::of_diag(m),
            Model::Linear(m) => Snapshot::of_linear(m),
        }
    }
}

/// Score a dataset with a bare weight vector (how snapshots are evaluated).
pub fn score_dataset_with(weights: &[f64], data: &Dataset) -> Result<ScoredSet> {
    let mut pos = Vec::with_capacity(data.n_pos());
    let mut neg = Vec::with_capacity(data.n_neg());
    for inst in data.instances() {
        let s = dot_sparse(weights, &inst.x)?;
        match inst.y {
            Label::Pos => pos.push(s),
            Label::Neg => neg.push(s),
        }
    }
    ScoredSet::new(pos, neg)
}

fn train_model(
    algorithm: AlgorithmId,
    train: &Dataset,
    buffer: usize,
    probit: ProbitParams,
    c: f64,
    rng: &mut SplitMix64,
) -> Result<Model> {
    let stream = train.instances();
    let dim = train.dim();
    let cfg = |policy| StreamConfig {
        policy,
        cap_pos: buffer,
        cap_neg: buffer,
    };
    Ok(match algorithm {
        AlgorithmId::CbrRs => {
            let (m, _) = train_full(stream, dim, &cfg(BufferPolicy::Reservoir), probit, c, rng)?;
            Model::Full(m)
        }
        AlgorithmId::CbrFifo => {
            let (m, _) = train_full(stream, dim, &cfg(BufferPolicy::Fifo), probit, c, rng)?;
            Model::Full(m)
        }
        AlgorithmId::CbrDiagFifo => {
            let (m, _) = train_diag(stream, dim, &cfg(BufferPolicy::Fifo), probit, c, rng)?;
            Model::Diag(m)
        }
        AlgorithmId::PaPair => {
            let (m, _) = train_pa_pair(stream, dim, &cfg(BufferPolicy::Reservoir), c, rng)?;
            Model::Linear(m.into_linear())
        }
        AlgorithmId::UniExp => {
            let (m, _) = train_uniexp(stream, dim, c)?;
            Model::Linear(m)
        }
    })
}

/// Train one model outside the benchmark protocol: instances in the given
/// order, a single penalty (or rate), buffers seeded from the master seed.
pub fn train_single(
    algorithm: AlgorithmId,
    data: &Dataset,
    buffer: usize,
    eta: f64,
    c: f64,
    seed: u64,
) -> Result<Model> {
    if buffer == 0 {
        return Err(Error::InvalidInput("buffer capacity must be positive".into()));
    }
    check_dim_limit(algorithm, data.dim(), DEFAULT_FULL_DIM_LIMIT)?;
    let probit = ProbitParams::new(eta)?;
    let mut rng = SplitMix64::new(derive_seed(seed, SeedTag::FinalTrain, 0));
    train_model(algorithm, data, buffer, probit, c, &mut rng)
}

fn check_dim_limit(algorithm: AlgorithmId, dim: usize, limit: usize) -> Result<()> {
    if algorithm.is_full_covariance() && dim > limit {
        return Err(Error::InvalidInput(format!(
            "{algorithm} keeps a dense {dim}×{dim} covariance and the dimension limit is {limit}; use cbr-diag-fifo for high-dimensional data"
        )));
    }
    Ok(())
}

/// Pick the grid value with the best mean validation AUC over the tuning
/// folds, ties going to the smaller value. Fold splitting retries with
/// fresh derived seeds until every tuning fold contains both classes.
pub fn tune_penalty(
    train: &Dataset,
    config: &ExperimentConfig,
    seed: u64,
    par: Parallelism,
) -> Result<f64> {
    let grid = &config.c_grid;
    if grid.len() == 1 {
        return Ok(grid[0]);
    }
    let probit = ProbitParams::new(config.eta)?;
    let k = config.tuning_folds;

    let mut plan = None;
    for attempt in 0..TUNE_SPLIT_ATTEMPTS {
        let candidate = split_folds(train, k, derive_seed(seed, SeedTag::TuneSplit, attempt))?;
        let balanced = (0..k).all(|f| {
            train
                .subset(&candidate.fold_members(f))
                .has_both_classes()
        });
        if balanced {
            plan = Some(candidate);
            break;
        }
    }
    let plan = plan.ok_or_else(|| {
        Error::Tuning(format!(
            "could not form {k} tuning folds with both classes after {TUNE_SPLIT_ATTEMPTS} attempts"
        ))
    })?;

    let mut folds = Vec::with_capacity(k);
    for f in 0..k {
        let held = train.subset(&plan.fold_members(f));
        let rest = train.subset(&plan.complement(f));
        folds.push((rest, held));
    }

    let scores = map_indexed(par, grid.len(), |gi| {
        let mut total = 0.0;
        for (f, (rest, held)) in folds.iter().enumerate() {
            let mut rng = SplitMix64::new(derive_seed(
                seed,
                SeedTag::TuneTrain,
                (gi * k + f) as u64,
            ));
            let model = train_model(config.algorithm, rest, config.buffer, probit, grid[gi], &mut rng)?;
            total += auc(&model.score_dataset(held)?)?;
        }
        Ok(total / k as f64)
    })?;

    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(grid[best])
}

struct RunOutcome {
    seed: u64,
    chosen_c: f64,
    auc: f64,
    acc: f64,
    train_ms: f64,
}

fn run_once(
    config: &ExperimentConfig,
    data: &Dataset,
    probit: ProbitParams,
    r: usize,
    par: Parallelism,
) -> Result<RunOutcome> {
    let seed_r = derive_seed(config.seed, SeedTag::Run, r as u64);

    let shuffled = permute(data, derive_seed(seed_r, SeedTag::Permute, 0));
    let capped = subsample(&shuffled, config.cap, derive_seed(seed_r, SeedTag::Subsample, 0))?;

    let plan = split_folds(&capped, config.folds, derive_seed(seed_r, SeedTag::Folds, 0))?;
    let test_fold = r % config.folds;
    let train_raw = capped.subset(&plan.complement(test_fold));
    let test_raw = capped.subset(&plan.fold_members(test_fold));

    let (train, record) = scale_features(&train_raw)?;
    let test = apply_scaling(&test_raw, &record);

    let chosen_c = tune_penalty(&train, config, seed_r, par)?;

    let mut rng = SplitMix64::new(derive_seed(seed_r, SeedTag::FinalTrain, 0));
    let started = Instant::now();
    let model = train_model(config.algorithm, &train, config.buffer, probit, chosen_c, &mut rng)?;
    let train_ms = started.elapsed().as_secs_f64() * 1e3;

    let scored = model.score_dataset(&test)?;
    let auc_value = auc(&scored)?;
    let (acc, _) = accuracy_at_optroc(&scored)?;

    Ok(RunOutcome {
        seed: seed_r,
        chosen_c,
        auc: auc_value,
        acc,
        train_ms,
    })
}

/// The full protocol against an already-loaded dataset.
pub fn run_experiment_with(
    config: &ExperimentConfig,
    data: &Dataset,
    dataset_name: &str,
    par: Parallelism,
) -> Result<ReportRow> {
    let probit = config.validate()?;
    if !data.has_both_classes() {
        return Err(Error::InvalidInput(format!(
            "dataset {dataset_name} has a single class ({} positive, {} negative); ranking needs both",
            data.n_pos(),
            data.n_neg()
        )));
    }
    check_dim_limit(config.algorithm, data.dim(), config.full_dim_limit)?;

    let outcomes = map_indexed(par, config.runs, |r| run_once(config, data, probit, r, par))?;

    let aucs: Vec<f64> = outcomes.iter().map(|o| o.auc).collect();
    let accs: Vec<f64> = outcomes.iter().map(|o| o.acc).collect();
    let times: Vec<f64> = outcomes.iter().map(|o| o.train_ms).collect();
    Ok(ReportRow {
        dataset: dataset_name.to_string(),
        algorithm: config.algorithm.name().to_string(),
        mean_auc: mean(&aucs),
        std_auc: sample_std(&aucs),
        mean_acc: mean(&accs),
        std_acc: sample_std(&accs),
        mean_train_ms: mean(&times),
        runs: config.runs as u32,
        seed: config.seed,
        chosen_c: outcomes.iter().map(|o| o.chosen_c).collect(),
        run_seeds: outcomes.iter().map(|o| o.seed).collect(),
    })
}

pub fn run_experiment_on(
    config: &ExperimentConfig,
    data: &Dataset,
    dataset_name: &str,
) -> Result<ReportRow> {
    run_experiment_with(config, data, dataset_name, Parallelism::available())
}

pub fn dataset_name_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Load the dataset named by the config (binarizing multiclass labels with
/// a seed derived from the master seed) and run the protocol on it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ReportRow> {
    let path = config
        .data
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("no dataset path configured".into()))?;
    let text = std::fs::read_to_string(path)?;
    let data = load_dataset(&text, derive_seed(config.seed, SeedTag::Binarize, 0))?;
    run_experiment_on(config, &data, &dataset_name_of(path))
}
