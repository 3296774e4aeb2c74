//! Confidence-weighted pairwise rankers.
//!
//! The model is a Gaussian over weight vectors, N(μ, Σ); μ ranks, Σ tracks
//! per-direction confidence. Each update consumes one pair difference
//! z = x_t − x (new instance minus a buffered opposite-class instance) and
//! solves, in closed form, the problem of staying KL-close to the previous
//! Gaussian while satisfying a probit margin on the pair:
//!
//!   minimize  KL(N(μ,Σ) ‖ N(μ_t,Σ_t)) + C · max(0, φ√(zᵀΣz) − y μ·z)
//!
//! The full-covariance variant updates a dense Σ; the diagonal variant keeps
//! a per-coordinate confidence accumulator g and touches only the pair's
//! support, which is what makes it viable at high dimension.

use crate::buffer::{BufferPolicy, PairBuffer};
use crate::data::{Instance, Label, SparseVec};
use crate::error::{Error, Result};
use crate::linalg::{dot_sparse, SymMatrix};
use crate::rng::SplitMix64;
use crate::stats::ProbitParams;

/// Everything one closed-form step computed, returned on every step (even
/// no-ops, where alpha = 0, beta = 0 and u degenerates to v).
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateDiagnostics {
    /// Pair difference the step consumed.
    pub z: SparseVec,
    /// Signed margin y·(μ·z) before the update.
    pub m: f64,
    /// Confidence of the pair direction (zᵀΣz, or its diagonal analogue).
    pub v: f64,
    /// Step size in [0, C].
    pub alpha: f64,
    /// Confidence shrink coefficient.
    pub beta: f64,
    /// Post-update pair confidence (the auxiliary u).
    pub u: f64,
    /// Probit hinge loss before the update.
    pub loss: f64,
}

/// Closed-form step coefficients for margin m, pair confidence v > 0, and
/// penalty cap c. Exposed separately so the activation and clamp behavior
/// can be exercised directly.
pub fn scw_coefficients(m: f64, v: f64, probit: &ProbitParams, c: f64) -> (f64, f64, f64) {
    let phi = probit.phi();
    // In real arithmetic the closed form below is positive exactly when
    // this margin test fires, but on the boundary it is a fully cancelling
    // difference and rounding can leave a stray 1-ulp step at zero loss.
    // The negated comparison also keeps a NaN margin inactive.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(phi * v.sqrt() > m) {
        return (0.0, 0.0, v);
    }
    let inner = (-m * probit.psi() + (m * m * phi.powi(4) / 4.0 + v * phi * phi * probit.zeta()).sqrt())
        / (v * probit.zeta());
    let alpha = inner.max(0.0).min(c);
    if alpha <= 0.0 {
        return (0.0, 0.0, v);
    }
    let sqrt_u = 0.5 * (-alpha * v * phi + (alpha * alpha * v * v * phi * phi + 4.0 * v).sqrt());
    let u = sqrt_u * sqrt_u;
    let beta = alpha * phi / (sqrt_u + v * alpha * phi);
    (alpha, beta, u)
}

fn probit_hinge(phi: f64, v: f64, m: f64) -> f64 {
    (phi * v.sqrt() - m).max(0.0)
}

fn check_step_inputs(z: &SparseVec, penalty: f64) -> Result<()> {
    debug_assert!(penalty > 0.0);
    let _ = penalty;
    for &(i, val) in z.entries() {
        if !val.is_finite() {
            return Err(Error::Numeric(format!(
                "pair difference has non-finite value at coordinate {i}"
            )));
        }
    }
    Ok(())
}

fn degenerate_diagnostics(z: SparseVec, m: f64, v: f64) -> UpdateDiagnostics {
    UpdateDiagnostics {
        z,
        m,
        v,
        alpha: 0.0,
        beta: 0.0,
        u: v,
        loss: 0.0,
    }
}

/// Full-covariance ranker: μ plus a dense symmetric PSD Σ, initialized to
/// the identity. Memory is d², so this variant is for moderate dimensions;
/// use [`DiagGaussianRanker`] beyond that.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianRanker {
    mu: Vec<f64>,
    sigma: SymMatrix,
    probit: ProbitParams,
    penalty: f64,
}

fn check_penalty(penalty: f64) -> Result<()> {
    if !(penalty.is_finite() && penalty > 0.0) {
        return Err(Error::Domain(format!(
            "penalty must be positive and finite, got {penalty}"
        )));
    }
    Ok(())
}

impl GaussianRanker {
    pub fn new(d: usize, probit: ProbitParams, penalty: f64) -> Result<Self> {
        check_penalty(penalty)?;
        Ok(GaussianRanker {
            mu: vec![0.0; d],
            sigma: SymMatrix::identity(d),
            probit,
            penalty,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &SymMatrix {
        &self.sigma
    }

    pub fn probit(&self) -> &ProbitParams {
        &self.probit
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn score(&self, x: &SparseVec) -> Result<f64> {
        dot_sparse(&self.mu, x)
    }

    /// Probit hinge ℓ = max(0, φ√(zᵀΣz) − y μ·z) at the current state.
    pub fn pair_loss(&self, z: &SparseVec, y: Label) -> Result<f64> {
        let v = self.sigma.quad_form(z)?;
        let m = y.y() * dot_sparse(&self.mu, z)?;
        Ok(probit_hinge(self.probit.phi(), v, m))
    }

    /// One closed-form update on a pair difference. When the step size comes
    /// out zero (margin already met, or a degenerate pair) the state is left
    /// untouched, bit for bit.
    pub fn scw_step(&mut self, z: SparseVec, y: Label) -> Result<UpdateDiagnostics> {
        check_step_inputs(&z, self.penalty)?;
        if z.is_empty() {
            return Ok(degenerate_diagnostics(z, 0.0, 0.0));
        }
        let v = self.sigma.quad_form(&z)?;
        let m = y.y() * dot_sparse(&self.mu, &z)?;
        if v <= 0.0 {
            return Ok(degenerate_diagnostics(z, m, v));
        }
        let loss = probit_hinge(self.probit.phi(), v, m);
        let (alpha, beta, u) = scw_coefficients(m, v, &self.probit, self.penalty);
        if alpha > 0.0 {
            if !(alpha.is_finite() && beta.is_finite()) {
                return Err(Error::Numeric(format!(
                    "step coefficients diverged (alpha {alpha}, beta {beta})"
                )));
            }
            let sz = self.sigma.matvec_sparse(&z)?;
            let ay = alpha * y.y();
            for (mi, &wi) in self.mu.iter_mut().zip(&sz) {
                *mi += ay * wi;
            }
            self.sigma.rank1_downdate(&sz, beta)?;
        }
        Ok(UpdateDiagnostics {
            z,
            m,
            v,
            alpha,
            beta,
            u,
            loss,
        })
    }

    /// Update once per buffered opposite-class instance, in storage order,
    /// threading the evolving state through.
    pub fn update_against(&mut self, x_t: &Instance, opposite: &PairBuffer) -> Result<()> {
        update_against(self, x_t, opposite)
    }
}

/// Diagonal-confidence ranker: μ plus a positive per-coordinate accumulator
/// g (g_i ≥ 1, nondecreasing). Updates touch only the pair's support.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagGaussianRanker {
    mu: Vec<f64>,
    g: Vec<f64>,
    probit: ProbitParams,
    penalty: f64,
}

impl DiagGaussianRanker {
    pub fn new(d: usize, probit: ProbitParams, penalty: f64) -> Result<Self> {
        check_penalty(penalty)?;
        Ok(DiagGaussianRanker {
            mu: vec![0.0; d],
            g: vec![1.0; d],
            probit,
            penalty,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn probit(&self) -> &ProbitParams {
        &self.probit
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn score(&self, x: &SparseVec) -> Result<f64> {
        dot_sparse(&self.mu, x)
    }

    /// Pair confidence for the diagonal model: Σ_i z_i² / (g_i + C).
    fn pair_confidence(&self, z: &SparseVec) -> Result<f64> {
        if let Some(top) = z.max_index() {
            if top as usize >= self.g.len() {
                return Err(Error::Shape(format!(
                    "pair difference touches coordinate {top}, model dimension is {}",
                    self.g.len()
                )));
            }
        }
        Ok(z.entries()
            .iter()
            .map(|&(i, zi)| zi * zi / (self.g[i as usize] + self.penalty))
            .sum())
    }

    pub fn pair_loss(&self, z: &SparseVec, y: Label) -> Result<f64> {
        let v = self.pair_confidence(z)?;
        let m = y.y() * dot_sparse(&self.mu, z)?;
        Ok(probit_hinge(self.probit.phi(), v, m))
    }

    pub fn scw_diag_step(&mut self, z: SparseVec, y: Label) -> Result<UpdateDiagnostics> {
        self.scw_diag_step_traced(z, y, |_| {})
    }

    /// Same as [`scw_diag_step`](Self::scw_diag_step), reporting every
    /// written coordinate to `touched`. The production path passes a no-op
    /// closure that compiles away; tests pass a recorder to pin the
    /// sparsity contract.
    pub fn scw_diag_step_traced(
        &mut self,
        z: SparseVec,
        y: Label,
        mut touched: impl FnMut(usize),
    ) -> Result<UpdateDiagnostics> {
        check_step_inputs(&z, self.penalty)?;
        if z.is_empty() {
            return Ok(degenerate_diagnostics(z, 0.0, 0.0));
        }
        let v = self.pair_confidence(&z)?;
        let m = y.y() * dot_sparse(&self.mu, &z)?;
        if v <= 0.0 {
            return Ok(degenerate_diagnostics(z, m, v));
        }
        let loss = probit_hinge(self.probit.phi(), v, m);
        let (alpha, beta, u) = scw_coefficients(m, v, &self.probit, self.penalty);
        if alpha > 0.0 {
            if !(alpha.is_finite() && beta.is_finite()) {
                return Err(Error::Numeric(format!(
                    "step coefficients diverged (alpha {alpha}, beta {beta})"
                )));
            }
            let ay = alpha * y.y();
            for &(i, zi) in z.entries() {
                let i = i as usize;
                // μ uses the pre-update g; both writes land on the same
                // coordinate, so the order below keeps that true.
                self.mu[i] += ay * zi / self.g[i];
                self.g[i] += beta * zi * zi;
                touched(i);
            }
        }
        Ok(UpdateDiagnostics {
            z,
            m,
            v,
            alpha,
            beta,
            u,
            loss,
        })
    }

    pub fn update_against(&mut self, x_t: &Instance, opposite: &PairBuffer) -> Result<()> {
        update_against(self, x_t, opposite)
    }
}

/// Anything trainable on buffered pair differences. Implemented by both
/// confidence-weighted rankers and the first-order pairwise baseline, so
/// they all share one streaming driver (and therefore identical buffer
/// behavior under identical seeds).
pub trait PairwiseRanker {
    fn dim(&self) -> usize;
    fn score_sparse(&self, x: &SparseVec) -> Result<f64>;
    fn update_pair(&mut self, z: SparseVec, y: Label) -> Result<()>;
}

impl PairwiseRanker for GaussianRanker {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn score_sparse(&self, x: &SparseVec) -> Result<f64> {
        self.score(x)
    }

    fn update_pair(&mut self, z: SparseVec, y: Label) -> Result<()> {
        self.scw_step(z, y).map(|_| ())
    }
}

impl PairwiseRanker for DiagGaussianRanker {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn score_sparse(&self, x: &SparseVec) -> Result<f64> {
        self.score(x)
    }

    fn update_pair(&mut self, z: SparseVec, y: Label) -> Result<()> {
        self.scw_diag_step(z, y).map(|_| ())
    }
}

fn update_against<R: PairwiseRanker + ?Sized>(
    ranker: &mut R,
    x_t: &Instance,
    opposite: &PairBuffer,
) -> Result<()> {
    for item in opposite.items() {
        if item.y != x_t.y.opposite() {
            return Err(Error::InvalidInput(
                "opposite-class buffer contains an instance of the ranked class".into(),
            ));
        }
    }
    for item in opposite.items() {
        let z = SparseVec::diff(&x_t.x, &item.x);
        if z.is_empty() {
            continue;
        }
        ranker.update_pair(z, x_t.y)?;
    }
    Ok(())
}

/// Capacities and policy for the two class buffers of one training pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamConfig {
    pub policy: BufferPolicy,
    pub cap_pos: usize,
    pub cap_neg: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainStats {
    pub instances: usize,
    pub pair_updates: usize,
    /// True when the stream never produced an opposite-class pair because
    /// only one label occurred; the ranker came back untrained.
    pub single_class: bool,
}

/// One online pass: per instance, the matching class counter and buffer are
/// updated first, then the ranker is updated against the opposite buffer's
/// current contents.
pub fn train_stream<R: PairwiseRanker + ?Sized>(
    ranker: &mut R,
    stream: &[Instance],
    cfg: &StreamConfig,
    rng: &mut SplitMix64,
) -> Result<TrainStats> {
    if stream.is_empty() {
        return Err(Error::InvalidInput("training stream is empty".into()));
    }
    let mut buf_pos = PairBuffer::new(cfg.cap_pos, cfg.policy)?;
    let mut buf_neg = PairBuffer::new(cfg.cap_neg, cfg.policy)?;
    let mut pair_updates = 0usize;

    for inst in stream {
        let (own, opposite) = match inst.y {
            Label::Pos => (&mut buf_pos, &buf_neg),
            Label::Neg => (&mut buf_neg, &buf_pos),
        };
        own.update(inst.clone(), rng);
        for item in opposite.items() {
            let z = SparseVec::diff(&inst.x, &item.x);
            if z.is_empty() {
                continue;
            }
            ranker.update_pair(z, inst.y)?;
            pair_updates += 1;
        }
    }
    Ok(TrainStats {
        instances: stream.len(),
        pair_updates,
        single_class: buf_pos.seen() == 0 || buf_neg.seen() == 0,
    })
}

/// Train a fresh full-covariance ranker over the stream.
pub fn train_full(
    stream: &[Instance],
    dim: usize,
    cfg: &StreamConfig,
    probit: ProbitParams,
    penalty: f64,
    rng: &mut SplitMix64,
) -> Result<(GaussianRanker, TrainStats)> {
    let mut ranker = GaussianRanker::new(dim, probit, penalty)?;
    let stats = train_stream(&mut ranker, stream, cfg, rng)?;
    Ok((ranker, stats))
}

/// Train a fresh diagonal ranker over the stream.
pub fn train_diag(
    stream: &[Instance],
    dim: usize,
    cfg: &StreamConfig,
    probit: ProbitParams,
    penalty: f64,
    rng: &mut SplitMix64,
) -> Result<(DiagGaussianRanker, TrainStats)> {
    let mut ranker = DiagGaussianRanker::new(dim, probit, penalty)?;
    let stats = train_stream(&mut ranker, stream, cfg, rng)?;
    Ok((ranker, stats))
}
