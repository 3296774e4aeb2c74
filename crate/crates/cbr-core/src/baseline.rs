//! First-order baselines: a pointwise ranker driven by class-weighted
//! exponential loss, and a passive-aggressive ranker on buffered pair
//! differences. Both keep a bare weight vector and no confidence state.

use crate::data::{Instance, Label, SparseVec};
use crate::error::{Error, Result};
use crate::linalg::dot_sparse;
use crate::ranker::{train_stream, PairwiseRanker, StreamConfig, TrainStats};
use crate::rng::SplitMix64;

/// Margin magnitudes past this point make e^{−margin} either negligible or
/// explosive; the gradient step clamps there.
const EXP_MARGIN_CLAMP: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRanker {
    w: Vec<f64>,
}

impl LinearRanker {
    pub fn new(d: usize) -> Self {
        LinearRanker { w: vec![0.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn score(&self, x: &SparseVec) -> Result<f64> {
        dot_sparse(&self.w, x)
    }

    /// One stochastic step on weighted exponential loss: with margin
    /// m = y(w·x) clamped to ±30, w gains rate · w_y · y · e^{−m} · x over
    /// the support of x.
    pub fn uniexp_step(
        &mut self,
        x: &SparseVec,
        y: Label,
        rate: f64,
        class_weight: f64,
    ) -> Result<()> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::Domain(format!(
                "learning rate must be positive and finite, got {rate}"
            )));
        }
        if !(class_weight.is_finite() && class_weight > 0.0) {
            return Err(Error::Domain(format!(
                "class weight must be positive and finite, got {class_weight}"
            )));
        }
        let margin = (y.y() * dot_sparse(&self.w, x)?).clamp(-EXP_MARGIN_CLAMP, EXP_MARGIN_CLAMP);
        let scale = rate * class_weight * y.y() * (-margin).exp();
        for &(i, xi) in x.entries() {
            let i = i as usize;
            if i >= self.w.len() {
                return Err(Error::Shape(format!(
                    "instance touches coordinate {i}, model dimension is {}",
                    self.w.len()
                )));
            }
            self.w[i] += scale * xi;
        }
        Ok(())
    }

    /// One passive-aggressive step on a pair difference: hinge loss
    /// max(0, 1 − y(w·z)), step τ = min(C, loss/‖z‖²), w gains τ·y·z.
    pub fn pa_pair_step(&mut self, z: &SparseVec, y: Label, c: f64) -> Result<()> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain(format!(
                "aggressiveness cap must be positive and finite, got {c}"
            )));
        }
        let loss = (1.0 - y.y() * dot_sparse(&self.w, z)?).max(0.0);
        let norm_sq = z.norm_sq();
        if loss <= 0.0 || norm_sq <= 0.0 {
            return Ok(());
        }
        let tau = c.min(loss / norm_sq);
        let ty = tau * y.y();
        for &(i, zi) in z.entries() {
            self.w[i as usize] += ty * zi;
        }
        Ok(())
    }
}

/// Passive-aggressive pairwise ranker, trainable by the shared streaming
/// driver so its buffer behavior matches the confidence-weighted rankers
/// exactly under the same seed.
#[derive(Debug, Clone, PartialEq)]
pub struct PaPairRanker {
    ranker: LinearRanker,
    penalty: f64,
}

impl PaPairRanker {
    pub fn new(d: usize, penalty: f64) -> Result<Self> {
        if !(penalty.is_finite() && penalty > 0.0) {
            return Err(Error::Domain(format!(
                "penalty must be positive and finite, got {penalty}"
            )));
        }
        Ok(PaPairRanker {
            ranker: LinearRanker::new(d),
            penalty,
        })
    }

    pub fn weights(&self) -> &[f64] {
        self.ranker.weights()
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn score(&self, x: &SparseVec) -> Result<f64> {
        self.ranker.score(x)
    }

    /// Strip the training parameters, keeping the learned weights.
    pub fn into_linear(self) -> LinearRanker {
        self.ranker
    }
}

impl PairwiseRanker for PaPairRanker {
    fn dim(&self) -> usize {
        self.ranker.dim()
    }

    fn score_sparse(&self, x: &SparseVec) -> Result<f64> {
        self.ranker.score(x)
    }

    fn update_pair(&mut self, z: SparseVec, y: Label) -> Result<()> {
        self.ranker.pa_pair_step(&z, y, self.penalty)
    }
}

/// Train a fresh passive-aggressive pairwise ranker over the stream.
pub fn train_pa_pair(
    stream: &[Instance],
    dim: usize,
    cfg: &StreamConfig,
    penalty: f64,
    rng: &mut SplitMix64,
) -> Result<(PaPairRanker, TrainStats)> {
    let mut ranker = PaPairRanker::new(dim, penalty)?;
    let stats = train_stream(&mut ranker, stream, cfg, rng)?;
    Ok((ranker, stats))
}

/// Train a fresh pointwise exponential-loss ranker. No pair buffers: each
/// instance triggers one step, weighted by the running inverse class
/// frequency T/(2·n_y) with the incoming instance counted first.
pub fn train_uniexp(
    stream: &[Instance],
    dim: usize,
    rate: f64,
) -> Result<(LinearRanker, TrainStats)> {
    if stream.is_empty() {
        return Err(Error::InvalidInput("training stream is empty".into()));
    }
    let mut ranker = LinearRanker::new(dim);
    let mut n_pos = 0u64;
    let mut n_neg = 0u64;
    for inst in stream {
        match inst.y {
            Label::Pos => n_pos += 1,
            Label::Neg => n_neg += 1,
        }
        let total = n_pos + n_neg;
        let class_count = match inst.y {
            Label::Pos => n_pos,
            Label::Neg => n_neg,
        };
        let class_weight = total as f64 / (2.0 * class_count as f64);
        ranker.uniexp_step(&inst.x, inst.y, rate, class_weight)?;
    }
    Ok((
        ranker,
        TrainStats {
            instances: stream.len(),
            pair_updates: 0,
            single_class: n_pos == 0 || n_neg == 0,
        },
    ))
}
