//! Dataset preparation for the experiment protocol: per-feature min-max
//! scaling to [−1, 1], seeded permutation, capped subsampling, and seeded
//! k-fold assignment. Everything here is a pure function of its inputs and
//! the given seed.

use crate::data::{Dataset, Instance, SparseVec};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Per-feature (min, max) over the values actually present in the fitting
/// data. Features never seen stay `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRecord {
    ranges: Vec<Option<(f64, f64)>>,
}

impl ScalingRecord {
    pub fn ranges(&self) -> &[Option<(f64, f64)>] {
        &self.ranges
    }

    fn scale_value(&self, idx: u32, v: f64) -> f64 {
        match self.ranges.get(idx as usize).copied().flatten() {
            Some((lo, hi)) if hi > lo => -1.0 + 2.0 * (v - lo) / (hi - lo),
            // Constant in the fitting data, or never seen there: no usable
            // scale, so the feature carries no information.
            Some(_) | None => 0.0,
        }
    }
}

fn fit_record(data: &Dataset) -> ScalingRecord {
    let mut ranges: Vec<Option<(f64, f64)>> = vec![None; data.dim()];
    for inst in data.instances() {
        for &(i, v) in inst.x.entries() {
            let slot = &mut ranges[i as usize];
            *slot = Some(match *slot {
                None => (v, v),
                Some((lo, hi)) => (lo.min(v), hi.max(v)),
            });
        }
    }
    ScalingRecord { ranges }
}

/// Apply an existing record; values are mapped without clamping, so data
/// outside the fitted range can land outside [−1, 1]. Absent features stay
/// absent.
pub fn apply_scaling(data: &Dataset, record: &ScalingRecord) -> Dataset {
    let instances = data
        .instances()
        .iter()
        .map(|inst| {
            let pairs = inst
                .x
                .entries()
                .iter()
                .map(|&(i, v)| (i, record.scale_value(i, v)))
                .collect();
            Instance {
                x: SparseVec::from_pairs(pairs).expect("indices unchanged by scaling"),
                y: inst.y,
            }
        })
        .collect();
    Dataset::from_instances(instances).with_dim(data.dim())
}

/// Fit per-feature min-max on `data` and scale it to [−1, 1]. The record is
/// returned so held-out data can be scaled with the same statistics.
pub fn scale_features(data: &Dataset) -> Result<(Dataset, ScalingRecord)> {
    if data.is_empty() {
        return Err(Error::InvalidInput("cannot scale an empty dataset".into()));
    }
    let record = fit_record(data);
    Ok((apply_scaling(data, &record), record))
}

/// Seeded fold assignment: uniform shuffle, then round-robin, so fold sizes
/// differ by at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    seed: u64,
    fold_count: usize,
    assignment: Vec<u32>,
}

impl SplitPlan {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fold_count(&self) -> usize {
        self.fold_count
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    /// Instance indices in the given fold, in dataset order.
    pub fn fold_members(&self, fold: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &f)| f as usize == fold)
            .map(|(i, _)| i)
            .collect()
    }

    /// Instance indices outside the given fold, in dataset order.
    pub fn complement(&self, fold: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &f)| f as usize != fold)
            .map(|(i, _)| i)
            .collect()
    }
}

pub fn split_folds(data: &Dataset, k: usize, seed: u64) -> Result<SplitPlan> {
    if k == 0 {
        return Err(Error::InvalidInput("fold count must be positive".into()));
    }
    if k > data.len() {
        return Err(Error::InvalidInput(format!(
            "cannot split {} instances into {k} folds",
            data.len()
        )));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    SplitMix64::new(seed).shuffle(&mut order);
    let mut assignment = vec![0u32; data.len()];
    for (pos, &inst) in order.iter().enumerate() {
        assignment[inst] = (pos % k) as u32;
    }
    Ok(SplitPlan {
        seed,
        fold_count: k,
        assignment,
    })
}

/// Seeded Fisher-Yates permutation of instance order.
pub fn permute(data: &Dataset, seed: u64) -> Dataset {
    let mut instances: Vec<Instance> = data.instances().to_vec();
    SplitMix64::new(seed).shuffle(&mut instances);
    Dataset::from_instances(instances).with_dim(data.dim())
}

/// Identity below the cap; otherwise a seeded uniform sample without
/// replacement of exactly `cap` instances, keeping their original relative
/// order.
pub fn subsample(data: &Dataset, cap: usize, seed: u64) -> Result<Dataset> {
    if cap == 0 {
        return Err(Error::InvalidInput("sample cap must be positive".into()));
    }
    if data.len() <= cap {
        return Ok(data.clone());
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    SplitMix64::new(seed).shuffle(&mut order);
    let mut picked: Vec<usize> = order[..cap].to_vec();
    picked.sort_unstable();
    Ok(data.subset(&picked))
}
