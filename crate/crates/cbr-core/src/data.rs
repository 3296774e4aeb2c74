//! Sparse instances, datasets, and the LibSVM text format.
//!
//! Feature indices are 1-based in the text format and 0-based in memory;
//! the parser and serializer are the only two places that convert. Absent
//! features are semantically zero for dot products but are never
//! materialized, so high-dimensional sparse sets stay cheap.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Sorted sparse vector; indices strictly increasing, values finite.
/// Explicit zeros are kept (they are "present" for scaling purposes).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVec {
    entries: Vec<(u32, f64)>,
}

impl SparseVec {
    pub fn empty() -> Self {
        SparseVec { entries: Vec::new() }
    }

    /// Build from (index, value) pairs in any order; rejects duplicates and
    /// non-finite values.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Result<Self> {
        pairs.sort_unstable_by_key(|&(i, _)| i);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidInput(format!(
                    "duplicate feature index {}",
                    w[0].0
                )));
            }
        }
        for &(i, v) in &pairs {
            if !v.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite value at feature index {i}"
                )));
            }
        }
        Ok(SparseVec { entries: pairs })
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> Option<u32> {
        self.entries.last().map(|&(i, _)| i)
    }

    /// Sum of squared values.
    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }

    /// Sparse difference a − b; entries that cancel exactly are dropped, so
    /// the result's support is minimal.
    pub fn diff(a: &SparseVec, b: &SparseVec) -> SparseVec {
        let mut out = Vec::with_capacity(a.nnz() + b.nnz());
        let (mut i, mut j) = (0, 0);
        while i < a.entries.len() || j < b.entries.len() {
            match (a.entries.get(i), b.entries.get(j)) {
                (Some(&(ia, va)), Some(&(ib, vb))) => {
                    if ia < ib {
                        out.push((ia, va));
                        i += 1;
                    } else if ib < ia {
                        out.push((ib, -vb));
                        j += 1;
                    } else {
                        let v = va - vb;
                        if v != 0.0 {
                            out.push((ia, v));
                        }
                        i += 1;
                        j += 1;
                    }
                }
                (Some(&(ia, va)), None) => {
                    out.push((ia, va));
                    i += 1;
                }
                (None, Some(&(ib, vb))) => {
                    out.push((ib, -vb));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        SparseVec { entries: out }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Pos,
    Neg,
}

impl Label {
    pub fn y(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }

    pub fn opposite(self) -> Label {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub x: SparseVec,
    pub y: Label,
}

/// An ordered collection of labeled instances. `dim` is the maximum feature
/// index seen (1-based count, i.e. valid coordinates are 0..dim).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    instances: Vec<Instance>,
    dim: usize,
    n_pos: usize,
    n_neg: usize,
}

impl Dataset {
    pub fn from_instances(instances: Vec<Instance>) -> Self {
        let mut dim = 0;
        let mut n_pos = 0;
        let mut n_neg = 0;
        for inst in &instances {
            if let Some(top) = inst.x.max_index() {
                dim = dim.max(top as usize + 1);
            }
            match inst.y {
                Label::Pos => n_pos += 1,
                Label::Neg => n_neg += 1,
            }
        }
        Dataset {
            instances,
            dim,
            n_pos,
            n_neg,
        }
    }

    /// Same instances with a caller-imposed dimension (used when a split
    /// must keep the parent's feature space).
    pub fn with_dim(mut self, dim: usize) -> Self {
        debug_assert!(dim >= self.dim);
        self.dim = dim;
        self
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_pos(&self) -> usize {
        self.n_pos
    }

    pub fn n_neg(&self) -> usize {
        self.n_neg
    }

    pub fn has_both_classes(&self) -> bool {
        self.n_pos >= 1 && self.n_neg >= 1
    }

    /// Subset by instance indices, preserving the given order and the
    /// parent's dimension.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let picked = indices
            .iter()
            .map(|&i| self.instances[i].clone())
            .collect();
        Dataset::from_instances(picked).with_dim(self.dim)
    }
}

struct RawLine {
    label: i64,
    x: SparseVec,
}

fn parse_line(line: &str, lineno: usize) -> Result<RawLine> {
    let mut tokens = line.split_whitespace();
    let label_tok = tokens.next().ok_or_else(|| Error::Parse {
        line: lineno,
        msg: "empty line reached the tokenizer".into(),
    })?;
    let label_val: f64 = label_tok.parse().map_err(|_| Error::Parse {
        line: lineno,
        msg: format!("label `{label_tok}` is not numeric"),
    })?;
    if !label_val.is_finite() || label_val.fract() != 0.0 {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("label `{label_tok}` is not an integer"),
        });
    }
    let label = label_val as i64;

    let mut pairs = Vec::new();
    for tok in tokens {
        let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| Error::Parse {
            line: lineno,
            msg: format!("feature `{tok}` is missing a colon"),
        })?;
        let idx: i64 = idx_s.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("feature index `{idx_s}` is not an integer"),
        })?;
        if idx < 1 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("feature index must be ≥ 1, got {idx}"),
            });
        }
        if idx > u32::MAX as i64 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("feature index {idx} out of supported range"),
            });
        }
        let val: f64 = val_s.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("feature value `{val_s}` is not numeric"),
        })?;
        if !val.is_finite() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("feature value `{val_s}` is not finite"),
            });
        }
        pairs.push((idx as u32 - 1, val));
    }
    let x = SparseVec::from_pairs(pairs).map_err(|e| Error::Parse {
        line: lineno,
        msg: e.to_string(),
    })?;
    Ok(RawLine { label, x })
}

fn parse_raw(text: &str) -> Result<Vec<RawLine>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_line(line, i + 1)?);
    }
    Ok(out)
}

fn map_binary_labels(raws: Vec<RawLine>) -> Result<Dataset> {
    let distinct: BTreeSet<i64> = raws.iter().map(|r| r.label).collect();
    let to_label: fn(i64) -> Label = if distinct.iter().all(|&l| l == 1 || l == -1) {
        |l| if l == 1 { Label::Pos } else { Label::Neg }
    } else if distinct.iter().all(|&l| l == 0 || l == 1) {
        |l| if l == 1 { Label::Pos } else { Label::Neg }
    } else {
        return Err(Error::InvalidInput(format!(
            "labels {distinct:?} are not binary; multiclass input needs a seeded binarization (see load_dataset)"
        )));
    };
    let instances = raws
        .into_iter()
        .map(|r| Instance {
            y: to_label(r.label),
            x: r.x,
        })
        .collect();
    Ok(Dataset::from_instances(instances))
}

/// Parse LibSVM text with binary labels ({+1, −1} or {0, 1}).
pub fn parse_libsvm(text: &str) -> Result<Dataset> {
    map_binary_labels(parse_raw(text)?)
}

/// Seeded binary label map for a multiclass label set: a uniform random
/// nonempty proper subset of the classes maps to positive, the rest to
/// negative. Deterministic given the seed.
pub fn binarize_multiclass(
    raw_labels: &[i64],
    seed: u64,
) -> Result<std::collections::BTreeMap<i64, Label>> {
    let classes: BTreeSet<i64> = raw_labels.iter().copied().collect();
    if classes.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "binarization needs at least 2 distinct classes, got {}",
            classes.len()
        )));
    }
    let mut rng = SplitMix64::new(seed);
    loop {
        let mut map = std::collections::BTreeMap::new();
        let mut pos = 0usize;
        let mut neg = 0usize;
        for &c in &classes {
            let side = if rng.below(2) == 1 { Label::Pos } else { Label::Neg };
            match side {
                Label::Pos => pos += 1,
                Label::Neg => neg += 1,
            }
            map.insert(c, side);
        }
        if pos >= 1 && neg >= 1 {
            return Ok(map);
        }
    }
}

/// Parse LibSVM text of any integer-labeled kind: binary label sets map
/// directly, multiclass sets are binarized with the given seed.
pub fn load_dataset(text: &str, binarize_seed: u64) -> Result<Dataset> {
    let raws = parse_raw(text)?;
    let distinct: BTreeSet<i64> = raws.iter().map(|r| r.label).collect();
    let binary = distinct.iter().all(|&l| l == 1 || l == -1)
        || distinct.iter().all(|&l| l == 0 || l == 1);
    if binary {
        return map_binary_labels(raws);
    }
    let labels: Vec<i64> = raws.iter().map(|r| r.label).collect();
    let map = binarize_multiclass(&labels, binarize_seed)?;
    let instances = raws
        .into_iter()
        .map(|r| Instance {
            y: map[&r.label],
            x: r.x,
        })
        .collect();
    Ok(Dataset::from_instances(instances))
}

/// Serialize back to LibSVM text (1-based indices, shortest round-trip
/// float formatting, LF endings).
pub fn serialize_libsvm(data: &Dataset) -> String {
    let mut out = String::new();
    for inst in data.instances() {
        let label = match inst.y {
            Label::Pos => "+1",
            Label::Neg => "-1",
        };
        out.push_str(label);
        for &(i, v) in inst.x.entries() {
            let _ = write!(out, " {}:{}", i + 1, v);
        }
        out.push('\n');
    }
    out
}
