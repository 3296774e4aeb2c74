//! Benchmark report rows and their two output encodings.
//!
//! CSV is the compact cross-tool format: fixed nine-column header, floats
//! at four decimals. JSON is the faithful format: full-precision floats
//! plus per-run detail (chosen penalties, derived run seeds) that the CSV
//! omits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub algorithm: String,
    pub mean_auc: f64,
    pub std_auc: f64,
    pub mean_acc: f64,
    pub std_acc: f64,
    pub mean_train_ms: f64,
    pub runs: u32,
    pub seed: u64,
    pub chosen_c: Vec<f64>,
    pub run_seeds: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidInput(format!(
                "unknown report format {other:?}, expected csv or json"
            ))),
        }
    }
}

pub const CSV_HEADER: &str =
    "dataset,algorithm,mean_auc,std_auc,mean_acc,std_acc,mean_train_ms,runs,seed";

pub fn emit_report(rows: &[ReportRow], format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for row in rows {
                out.push_str(&format!(
                    "{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{},{}\n",
                    row.dataset,
                    row.algorithm,
                    row.mean_auc,
                    row.std_auc,
                    row.mean_acc,
                    row.std_acc,
                    row.mean_train_ms,
                    row.runs,
                    row.seed
                ));
            }
            out
        }
        ReportFormat::Json => {
            let mut out =
                serde_json::to_string_pretty(rows).expect("report rows serialize infallibly");
            out.push('\n');
            out
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator); zero for fewer than two
/// observations.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    var.sqrt()
}
