//! Synthetic two-class Gaussian streams for tests and benchmarks.

use crate::data::{Dataset, Instance, Label, SparseVec};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// A stream of `n` dense instances in `dim` dimensions. Class means sit at
/// ±(separation/2) along the unit diagonal direction, with unit isotropic
/// noise, so `separation` is the between-means distance in noise units.
/// Labels are drawn independently with the given positive fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub dim: usize,
    pub pos_fraction: f64,
    pub separation: f64,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.dim == 0 {
            return Err(Error::InvalidInput(
                "synthetic stream needs n > 0 and dim > 0".into(),
            ));
        }
        if !(self.pos_fraction > 0.0 && self.pos_fraction < 1.0) {
            return Err(Error::InvalidInput(format!(
                "positive fraction must lie strictly inside (0, 1), got {}",
                self.pos_fraction
            )));
        }
        if !(self.separation.is_finite() && self.separation >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "separation must be finite and nonnegative, got {}",
                self.separation
            )));
        }
        Ok(())
    }
}

pub fn gaussian_pair_stream(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let offset = spec.separation / (2.0 * (spec.dim as f64).sqrt());
    let mut instances = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let y = if rng.next_f64() < spec.pos_fraction {
            Label::Pos
        } else {
            Label::Neg
        };
        let center = y.y() * offset;
        let pairs: Vec<(u32, f64)> = (0..spec.dim as u32)
            .map(|i| (i, center + rng.next_gaussian()))
            .collect();
        instances.push(Instance {
            x: SparseVec::from_pairs(pairs)?,
            y,
        });
    }
    Ok(Dataset::from_instances(instances).with_dim(spec.dim))
}
