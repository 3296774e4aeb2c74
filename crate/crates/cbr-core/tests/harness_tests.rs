use cbr_core::data::{Dataset, Instance, Label, SparseVec};
use cbr_core::error::Error;
use cbr_core::harness::{
    default_c_grid, parse_c_grid, run_experiment_with, train_single, tune_penalty, AlgorithmId,
    ConfigPatch, ExperimentConfig, Model, Parallelism, DEFAULT_BUFFER, DEFAULT_CAP, DEFAULT_ETA,
    DEFAULT_FOLDS, DEFAULT_RUNS, DEFAULT_SEED, DEFAULT_TUNING_FOLDS, HIGH_DIM_DEFAULT_CAP,
    HIGH_DIM_DEFAULT_RUNS,
};
use cbr_core::metrics::auc;
use cbr_core::report::{emit_report, mean, sample_std, ReportFormat, ReportRow, CSV_HEADER};
use cbr_core::rng::{derive_seed, SeedTag};
use cbr_core::synth::{gaussian_pair_stream, SynthSpec};

fn inst(label: Label, pairs: &[(u32, f64)]) -> Instance {
    Instance {
        x: SparseVec::from_pairs(pairs.to_vec()).unwrap(),
        y: label,
    }
}

fn separable_dataset(n_each: usize) -> Dataset {
    let mut instances = Vec::new();
    for i in 0..n_each {
        instances.push(inst(Label::Pos, &[(0, 1.0), (1, 0.01 * i as f64)]));
        instances.push(inst(Label::Neg, &[(0, -1.0), (1, 0.01 * i as f64)]));
    }
    Dataset::from_instances(instances)
}

fn synth(n: usize, dim: usize, seed: u64) -> Dataset {
    gaussian_pair_stream(&SynthSpec {
        n,
        dim,
        pos_fraction: 0.25,
        separation: 5.0,
        seed,
    })
    .unwrap()
}

fn small_config(algorithm: AlgorithmId) -> ExperimentConfig {
    ExperimentConfig {
        data: None,
        algorithm,
        buffer: 20,
        eta: 0.7,
        c_grid: vec![0.25, 1.0, 4.0],
        folds: 5,
        tuning_folds: 2,
        runs: 3,
        cap: 10_000,
        seed: 42,
        full_dim_limit: 1000,
    }
}

fn zero_timing(mut row: ReportRow) -> ReportRow {
    row.mean_train_ms = 0.0;
    row
}

#[test]
fn defaults_follow_the_protocol() {
    let cfg = ConfigPatch::default().resolve(AlgorithmId::CbrFifo).unwrap();
    assert_eq!(cfg.buffer, DEFAULT_BUFFER);
    assert_eq!(cfg.buffer, 50);
    assert_eq!(cfg.eta, DEFAULT_ETA);
    assert_eq!(cfg.eta, 0.7);
    assert_eq!(cfg.folds, DEFAULT_FOLDS);
    assert_eq!(cfg.folds, 5);
    assert_eq!(cfg.tuning_folds, DEFAULT_TUNING_FOLDS);
    assert_eq!(cfg.tuning_folds, 2);
    assert_eq!(cfg.runs, DEFAULT_RUNS);
    assert_eq!(cfg.runs, 10);
    assert_eq!(cfg.cap, DEFAULT_CAP);
    assert_eq!(cfg.cap, 8000);
    assert_eq!(cfg.seed, DEFAULT_SEED);
    assert_eq!(cfg.c_grid, default_c_grid());

    let high = ConfigPatch::default().resolve(AlgorithmId::CbrDiagFifo).unwrap();
    assert_eq!(high.runs, HIGH_DIM_DEFAULT_RUNS);
    assert_eq!(high.runs, 5);
    assert_eq!(high.cap, HIGH_DIM_DEFAULT_CAP);
    assert_eq!(high.cap, 2000);
}

#[test]
fn default_grid_is_powers_of_two() {
    let grid = default_c_grid();
    assert_eq!(grid.len(), 21);
    assert_eq!(grid[0], 2f64.powi(-10));
    assert_eq!(grid[20], 1024.0);
    assert!(grid.contains(&1.0));
    assert!(grid.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn c_grid_parsing() {
    assert_eq!(parse_c_grid("0:0").unwrap(), vec![1.0]);
    let grid = parse_c_grid("-4:4").unwrap();
    assert_eq!(grid.len(), 9);
    assert_eq!(grid[0], 0.0625);
    assert_eq!(grid[8], 16.0);
    assert!(parse_c_grid("3:1").is_err());
    assert!(parse_c_grid("a:b").is_err());
    assert!(parse_c_grid("5").is_err());
    assert!(parse_c_grid("-2000:0").is_err());
}

#[test]
fn algorithm_ids_round_trip() {
    let pairs = [
        (AlgorithmId::CbrRs, "cbr-rs"),
        (AlgorithmId::CbrFifo, "cbr-fifo"),
        (AlgorithmId::CbrDiagFifo, "cbr-diag-fifo"),
        (AlgorithmId::UniExp, "uniexp"),
        (AlgorithmId::PaPair, "pa-pair"),
    ];
    for (id, name) in pairs {
        assert_eq!(id.name(), name);
        assert_eq!(name.parse::<AlgorithmId>().unwrap(), id);
        assert_eq!(id.to_string(), name);
    }
    assert!("cbr".parse::<AlgorithmId>().is_err());
    assert!(AlgorithmId::CbrRs.is_full_covariance());
    assert!(AlgorithmId::CbrFifo.is_full_covariance());
    assert!(!AlgorithmId::CbrDiagFifo.is_full_covariance());
}

#[test]
fn config_validation_rejects_protocol_violations() {
    let base = small_config(AlgorithmId::CbrFifo);
    let data = synth(60, 4, 1);

    let check = |mutate: fn(&mut ExperimentConfig)| {
        let mut cfg = base.clone();
        mutate(&mut cfg);
        run_experiment_with(&cfg, &data, "synth", Parallelism::Sequential).is_err()
    };
    assert!(check(|c| c.buffer = 0));
    assert!(check(|c| c.folds = 1));
    assert!(check(|c| c.tuning_folds = 1));
    assert!(check(|c| c.runs = 0));
    assert!(check(|c| c.cap = 0));
    assert!(check(|c| c.c_grid = vec![]));
    assert!(check(|c| c.c_grid = vec![1.0, 0.5]));
    assert!(check(|c| c.c_grid = vec![1.0, 1.0]));
    assert!(check(|c| c.c_grid = vec![-1.0, 1.0]));
    assert!(check(|c| c.eta = 0.5));
    assert!(check(|c| c.eta = 1.0));
}

#[test]
fn config_patch_deserializes_and_merges() {
    let file: ConfigPatch =
        serde_json::from_str(r#"{"runs": 3, "seed": 1, "algorithms": ["cbr-fifo", "uniexp"]}"#)
            .unwrap();
    assert_eq!(
        file.parse_algorithms().unwrap(),
        vec![AlgorithmId::CbrFifo, AlgorithmId::UniExp]
    );

    let flags = ConfigPatch {
        runs: Some(5),
        ..ConfigPatch::default()
    };
    let merged = file.merged(flags);
    assert_eq!(merged.runs, Some(5), "flags override the file");
    assert_eq!(merged.seed, Some(1), "unset flags fall through");

    assert!(serde_json::from_str::<ConfigPatch>(r#"{"bogus": 1}"#).is_err());
    assert!(ConfigPatch::default().parse_algorithms().is_err());
    let empty = ConfigPatch {
        algorithms: Some(vec![]),
        ..ConfigPatch::default()
    };
    assert!(empty.parse_algorithms().is_err());
}

#[test]
fn single_c_beats_grid_spec() {
    let patch = ConfigPatch {
        c: Some(2.0),
        c_grid: Some("-4:4".into()),
        ..ConfigPatch::default()
    };
    let cfg = patch.resolve(AlgorithmId::PaPair).unwrap();
    assert_eq!(cfg.c_grid, vec![2.0]);
}

#[test]
fn tuning_single_element_grid_short_circuits() {
    let mut cfg = small_config(AlgorithmId::CbrFifo);
    cfg.c_grid = vec![0.5];
    let data = separable_dataset(4);
    assert_eq!(
        tune_penalty(&data, &cfg, 99, Parallelism::Sequential).unwrap(),
        0.5
    );
}

#[test]
fn tuning_ties_break_toward_smaller_penalty() {
    // perfectly separable: every grid value reaches validation AUC 1.0
    let data = separable_dataset(12);
    let cfg = small_config(AlgorithmId::CbrFifo);
    let chosen = tune_penalty(&data, &cfg, 7, Parallelism::Sequential).unwrap();
    assert_eq!(chosen, 0.25, "equal scores must pick the smallest C");
}

#[test]
fn tuning_is_deterministic_and_parallel_agnostic() {
    let data = synth(80, 5, 3);
    let cfg = small_config(AlgorithmId::CbrDiagFifo);
    let a = tune_penalty(&data, &cfg, 5, Parallelism::Sequential).unwrap();
    let b = tune_penalty(&data, &cfg, 5, Parallelism::Sequential).unwrap();
    let c = tune_penalty(&data, &cfg, 5, Parallelism::Parallel).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert!(cfg.c_grid.contains(&a));
}

#[test]
fn tuning_fails_cleanly_when_folds_cannot_hold_both_classes() {
    let mut instances = vec![inst(Label::Neg, &[(0, -1.0)])];
    for i in 0..12 {
        instances.push(inst(Label::Pos, &[(0, 1.0), (1, i as f64)]));
    }
    let data = Dataset::from_instances(instances);
    let cfg = small_config(AlgorithmId::CbrFifo);
    match tune_penalty(&data, &cfg, 1, Parallelism::Sequential) {
        Err(Error::Tuning(_)) => {}
        other => panic!("expected tuning error, got {other:?}"),
    }
}

#[test]
fn experiment_is_deterministic_modulo_timing() {
    let data = synth(150, 5, 9);
    let cfg = small_config(AlgorithmId::CbrFifo);
    let a = run_experiment_with(&cfg, &data, "synth", Parallelism::Sequential).unwrap();
    let b = run_experiment_with(&cfg, &data, "synth", Parallelism::Sequential).unwrap();
    assert_eq!(zero_timing(a), zero_timing(b));
}

#[test]
fn sequential_and_parallel_runs_agree() {
    let data = synth(150, 5, 21);
    for algorithm in [
        AlgorithmId::CbrRs,
        AlgorithmId::CbrFifo,
        AlgorithmId::CbrDiagFifo,
        AlgorithmId::UniExp,
        AlgorithmId::PaPair,
    ] {
        let cfg = small_config(algorithm);
        let seq = run_experiment_with(&cfg, &data, "synth", Parallelism::Sequential).unwrap();
        let par = run_experiment_with(&cfg, &data, "synth", Parallelism::Parallel).unwrap();
        assert_eq!(zero_timing(seq), zero_timing(par), "{algorithm} diverged");
    }
}

#[test]
fn report_row_carries_full_provenance() {
    let data = synth(150, 5, 13);
    let cfg = small_config(AlgorithmId::CbrFifo);
    let row = run_experiment_with(&cfg, &data, "synth", Parallelism::Sequential).unwrap();
    assert_eq!(row.runs, 3);
    assert_eq!(row.seed, 42);
    assert_eq!(row.chosen_c.len(), 3);
    assert!(row.chosen_c.iter().all(|c| cfg.c_grid.contains(c)));
    let expected: Vec<u64> = (0..3).map(|r| derive_seed(42, SeedTag::Run, r)).collect();
    assert_eq!(row.run_seeds, expected);
    assert!(row.mean_train_ms >= 0.0);
    assert!((0.0..=1.0).contains(&row.mean_auc));
    assert!((0.0..=1.0).contains(&row.mean_acc));
}

#[test]
fn master_seed_changes_outcomes_but_not_shape() {
    let data = synth(150, 5, 17);
    let mut cfg = small_config(AlgorithmId::CbrDiagFifo);
    let a = run_experiment_with(&cfg, &data, "synth", Parallelism::Sequential).unwrap();
    cfg.seed = 43;
    let b = run_experiment_with(&cfg, &data, "synth", Parallelism::Sequential).unwrap();
    assert_ne!(a.run_seeds, b.run_seeds);
    assert_eq!(a.runs, b.runs);
    assert_eq!(a.chosen_c.len(), b.chosen_c.len());
    assert_eq!(a.algorithm, b.algorithm);
}

#[test]
fn single_class_data_is_refused() {
    let data = Dataset::from_instances(vec![
        inst(Label::Pos, &[(0, 1.0)]),
        inst(Label::Pos, &[(0, 2.0)]),
    ]);
    let cfg = small_config(AlgorithmId::CbrFifo);
    match run_experiment_with(&cfg, &data, "onesided", Parallelism::Sequential) {
        Err(Error::InvalidInput(msg)) => {
            assert!(msg.contains("single class"), "diagnostic: {msg}")
        }
        other => panic!("expected refusal, got {other:?}"),
    }
}

#[test]
fn full_covariance_refused_beyond_dim_limit() {
    let data = synth(60, 12, 23);
    let mut cfg = small_config(AlgorithmId::CbrFifo);
    cfg.full_dim_limit = 10;
    match run_experiment_with(&cfg, &data, "wide", Parallelism::Sequential) {
        Err(Error::InvalidInput(msg)) => {
            assert!(msg.contains("cbr-diag-fifo"), "should point to the diagonal variant: {msg}")
        }
        other => panic!("expected refusal, got {other:?}"),
    }
    cfg.algorithm = AlgorithmId::CbrDiagFifo;
    assert!(run_experiment_with(&cfg, &data, "wide", Parallelism::Sequential).is_ok());
}

#[test]
fn separable_experiment_reaches_high_auc() {
    let data = synth(400, 8, 0x5EED);
    let mut cfg = small_config(AlgorithmId::CbrFifo);
    cfg.buffer = 50;
    let row = run_experiment_with(&cfg, &data, "synth", Parallelism::Sequential).unwrap();
    assert!(row.mean_auc >= 0.99, "mean AUC {}", row.mean_auc);
    assert!(row.mean_acc >= 0.9, "mean OPTROC accuracy {}", row.mean_acc);
}

#[test]
fn train_single_produces_scorable_model() {
    let data = separable_dataset(30);
    let model = train_single(AlgorithmId::CbrDiagFifo, &data, 10, 0.7, 1.0, 7).unwrap();
    let scored = model.score_dataset(&data).unwrap();
    assert_eq!(auc(&scored).unwrap(), 1.0);

    match train_single(AlgorithmId::UniExp, &data, 10, 0.7, 0.1, 7).unwrap() {
        Model::Linear(r) => assert!(r.weights()[0] > 0.0),
        other => panic!("uniexp should produce a linear model, got {other:?}"),
    }
}

#[test]
fn csv_report_is_byte_stable() {
    let row = ReportRow {
        dataset: "synth".into(),
        algorithm: "cbr-fifo".into(),
        mean_auc: 0.5,
        std_auc: 0.25,
        mean_acc: 0.75,
        std_acc: 0.125,
        mean_train_ms: 12.5,
        runs: 3,
        seed: 42,
        chosen_c: vec![1.0, 1.0, 0.5],
        run_seeds: vec![1, 2, 3],
    };
    let csv = emit_report(&[row], ReportFormat::Csv);
    assert_eq!(
        csv,
        "dataset,algorithm,mean_auc,std_auc,mean_acc,std_acc,mean_train_ms,runs,seed\n\
         synth,cbr-fifo,0.5000,0.2500,0.7500,0.1250,12.5000,3,42\n"
    );

    assert_eq!(emit_report(&[], ReportFormat::Csv), format!("{CSV_HEADER}\n"));
    assert_eq!(emit_report(&[], ReportFormat::Json), "[]\n");
}

#[test]
fn json_report_round_trips_at_full_precision() {
    let rows = vec![ReportRow {
        dataset: "synth".into(),
        algorithm: "pa-pair".into(),
        mean_auc: 1.0 / 3.0,
        std_auc: 0.1,
        mean_acc: 2.0 / 3.0,
        std_acc: 0.2,
        mean_train_ms: 0.123456789,
        runs: 5,
        seed: 9,
        chosen_c: vec![0.5; 5],
        run_seeds: vec![11, 12, 13, 14, 15],
    }];
    let json = emit_report(&rows, ReportFormat::Json);
    let parsed: Vec<ReportRow> = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed, rows);
    assert_eq!(parsed[0].mean_auc, 1.0 / 3.0, "no precision lost");
}

#[test]
fn report_format_parses() {
    assert_eq!("csv".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
    assert_eq!("json".parse::<ReportFormat>().unwrap(), ReportFormat::Json);
    assert!("yaml".parse::<ReportFormat>().is_err());
}

#[test]
fn mean_and_sample_std_definitions() {
    assert_eq!(mean(&[1.0, 2.0, 3.0, 4.0]), 2.5);
    assert_eq!(sample_std(&[2.0, 4.0]), 2f64.sqrt());
    assert_eq!(sample_std(&[5.0]), 0.0);
    assert_eq!(sample_std(&[]), 0.0);
}
