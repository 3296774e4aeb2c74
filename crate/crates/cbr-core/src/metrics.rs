//! Ranking metrics: AUC by rank statistics (ties get half credit), the ROC
//! curve, and classification accuracy at the curve's best operating point.

use crate::error::{Error, Result};

/// Scores split by true class. Construction rejects non-finite scores so the
/// metrics never have to order NaNs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSet {
    pos: Vec<f64>,
    neg: Vec<f64>,
}

impl ScoredSet {
    pub fn new(pos: Vec<f64>, neg: Vec<f64>) -> Result<Self> {
        if pos.iter().chain(neg.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite score".into()));
        }
        Ok(ScoredSet { pos, neg })
    }

    pub fn pos(&self) -> &[f64] {
        &self.pos
    }

    pub fn neg(&self) -> &[f64] {
        &self.neg
    }

    fn check_nonempty(&self) -> Result<()> {
        if self.pos.is_empty() || self.neg.is_empty() {
            return Err(Error::Metric(
                "AUC needs at least one score from each class".into(),
            ));
        }
        Ok(())
    }
}

/// Probability that a random positive outscores a random negative, ties
/// counted half. Computed from midranks in O((n+m) log(n+m)); equals the
/// pairwise double loop exactly.
pub fn auc(s: &ScoredSet) -> Result<f64> {
    s.check_nonempty()?;
    let n = s.pos.len();
    let m = s.neg.len();
    let mut all: Vec<(f64, bool)> = Vec::with_capacity(n + m);
    all.extend(s.pos.iter().map(|&v| (v, true)));
    all.extend(s.neg.iter().map(|&v| (v, false)));
    all.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite by construction"));

    let mut rank_pos_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        // 1-based ranks i+1 ..= j+1 share the midrank.
        let midrank = (i + 1 + j + 1) as f64 / 2.0;
        for item in &all[i..=j] {
            if item.1 {
                rank_pos_sum += midrank;
            }
        }
        i = j + 1;
    }
    let u = rank_pos_sum - (n as f64) * (n as f64 + 1.0) / 2.0;
    Ok(u / (n as f64 * m as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    /// Predict positive for scores strictly above this value.
    pub threshold: f64,
    pub true_positive_rate: f64,
    pub false_positive_rate: f64,
    pub accuracy: f64,
}

/// ROC points in descending threshold order: a +∞ sentinel (nothing
/// predicted positive), then one point per distinct score with the
/// threshold midway to the next distinct score, ending at −∞ (everything
/// positive). With a single distinct score the curve is just the two
/// corners.
pub fn roc_curve(s: &ScoredSet) -> Result<Vec<RocPoint>> {
    s.check_nonempty()?;
    let p = s.pos.len() as f64;
    let n = s.neg.len() as f64;
    let total = p + n;

    let mut all: Vec<(f64, bool)> = Vec::with_capacity(s.pos.len() + s.neg.len());
    all.extend(s.pos.iter().map(|&v| (v, true)));
    all.extend(s.neg.iter().map(|&v| (v, false)));
    all.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).expect("finite by construction"));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        true_positive_rate: 0.0,
        false_positive_rate: 0.0,
        accuracy: n / total,
    }];

    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        for item in &all[i..=j] {
            if item.1 {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
        }
        let threshold = if j + 1 < all.len() {
            (all[i].0 + all[j + 1].0) / 2.0
        } else {
            f64::NEG_INFINITY
        };
        points.push(RocPoint {
            threshold,
            true_positive_rate: tp / p,
            false_positive_rate: fp / n,
            accuracy: (tp + (n - fp)) / total,
        });
        i = j + 1;
    }
    Ok(points)
}

/// Maximum accuracy over the ROC curve and the threshold attaining it; ties
/// resolve to the largest threshold (the most conservative classifier).
pub fn accuracy_at_optroc(s: &ScoredSet) -> Result<(f64, f64)> {
    let points = roc_curve(s)?;
    let mut best = &points[0];
    for pt in &points[1..] {
        if pt.accuracy > best.accuracy {
            best = pt;
        }
    }
    Ok((best.accuracy, best.threshold))
}
