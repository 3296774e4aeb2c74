//! Online bipartite ranking on imbalanced streams.
//!
//! The library trains linear scorers that order positive instances above
//! negative ones (maximizing AUC) in a single pass, pairing each arriving
//! instance against a fixed-capacity buffer of the opposite class. The main
//! rankers are confidence-weighted: a Gaussian over weight vectors whose
//! covariance adapts the step size per direction, with a closed-form update
//! per pair. A diagonal variant scales to high dimension, and two
//! first-order baselines (pointwise exponential loss, passive-aggressive on
//! pairs) share the same streaming machinery for fair comparison.
//!
//! Around the rankers sits everything a benchmark needs: a sparse dataset
//! parser with feature scaling and seeded multiclass binarization, reservoir
//! and FIFO pair buffers, exact rank-statistic AUC and ROC metrics, a
//! deterministic seeded experiment harness with cross-validated penalty
//! tuning, and bit-stable model snapshots.

pub mod baseline;
pub mod buffer;
pub mod data;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod prep;
pub mod ranker;
pub mod report;
pub mod rng;
pub mod snapshot;
pub mod stats;
pub mod synth;

pub use baseline::{train_pa_pair, train_uniexp, LinearRanker, PaPairRanker};
pub use buffer::{BufferPolicy, PairBuffer};
pub use data::{load_dataset, parse_libsvm, Dataset, Instance, Label, SparseVec};
pub use error::{Error, Result};
pub use harness::{
    run_experiment, run_experiment_on, run_experiment_with, tune_penalty, AlgorithmId,
    ConfigPatch, ExperimentConfig, Model, Parallelism,
};
pub use metrics::{accuracy_at_optroc, auc, roc_curve, RocPoint, ScoredSet};
pub use ranker::{
    train_diag, train_full, train_stream, DiagGaussianRanker, GaussianRanker, PairwiseRanker,
    StreamConfig, TrainStats, UpdateDiagnostics,
};
pub use report::{emit_report, ReportFormat, ReportRow};
pub use rng::{derive_seed, SeedTag, SplitMix64};
pub use snapshot::Snapshot;
pub use stats::{normal_cdf, normal_quantile, ProbitParams};
