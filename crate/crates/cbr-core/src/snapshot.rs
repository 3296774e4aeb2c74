//! Trained-model snapshots with a bit-exact binary encoding, so a model
//! scored today and a model reloaded next year produce identical output.
//!
//! Layout: magic `CBRS`, version (u16 LE), variant tag (u8), reserved zero
//! byte, dimension (u64 LE), then the variant's f64 arrays in LE byte order.

use std::fs;
use std::path::Path;

use crate::baseline::LinearRanker;
use crate::error::{Error, Result};
use crate::ranker::{DiagGaussianRanker, GaussianRanker};

const MAGIC: &[u8; 4] = b"CBRS";
const VERSION: u16 = 1;

const TAG_FULL: u8 = 0;
const TAG_DIAG: u8 = 1;
const TAG_LINEAR: u8 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    /// Full-covariance state: μ and row-major Σ (d² values).
    Full { mu: Vec<f64>, sigma: Vec<f64> },
    /// Diagonal state: μ and the confidence accumulator g.
    Diag { mu: Vec<f64>, g: Vec<f64> },
    /// Bare weight vector.
    Linear { w: Vec<f64> },
}

impl Snapshot {
    pub fn of_full(ranker: &GaussianRanker) -> Self {
        Snapshot::Full {
            mu: ranker.mu().to_vec(),
            sigma: ranker.sigma().as_slice().to_vec(),
        }
    }

    pub fn of_diag(ranker: &DiagGaussianRanker) -> Self {
        Snapshot::Diag {
            mu: ranker.mu().to_vec(),
            g: ranker.g().to_vec(),
        }
    }

    pub fn of_linear(ranker: &LinearRanker) -> Self {
        Snapshot::Linear {
            w: ranker.weights().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Snapshot::Full { mu, .. } => mu.len(),
            Snapshot::Diag { mu, .. } => mu.len(),
            Snapshot::Linear { w } => w.len(),
        }
    }

    /// The ranking direction: scoring is always weights · x.
    pub fn weights(&self) -> &[f64] {
        match self {
            Snapshot::Full { mu, .. } => mu,
            Snapshot::Diag { mu, .. } => mu,
            Snapshot::Linear { w } => w,
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Snapshot::Full { .. } => "full",
            Snapshot::Diag { .. } => "diag",
            Snapshot::Linear { .. } => "linear",
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let d = self.dim();
        let (tag, arrays): (u8, Vec<&[f64]>) = match self {
            Snapshot::Full { mu, sigma } => (TAG_FULL, vec![mu, sigma]),
            Snapshot::Diag { mu, g } => (TAG_DIAG, vec![mu, g]),
            Snapshot::Linear { w } => (TAG_LINEAR, vec![w]),
        };
        let payload: usize = arrays.iter().map(|a| a.len() * 8).sum();
        let mut out = Vec::with_capacity(16 + payload);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(tag);
        out.push(0);
        out.extend_from_slice(&(d as u64).to_le_bytes());
        for array in arrays {
            for &value in array {
                out.extend_from_slice(&value.to_bits().to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Snapshot(msg.to_string());
        if bytes.len() < 16 {
            return Err(bad("snapshot truncated before header end"));
        }
        if &bytes[0..4] != MAGIC {
            return Err(bad("bad magic, not a model snapshot"));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(Error::Snapshot(format!(
                "unsupported snapshot version {version}, expected {VERSION}"
            )));
        }
        let tag = bytes[6];
        if bytes[7] != 0 {
            return Err(bad("reserved header byte is nonzero"));
        }
        let d_raw = u64::from_le_bytes(bytes[8..16].try_into().expect("sized slice"));
        let d = usize::try_from(d_raw).map_err(|_| bad("dimension does not fit this platform"))?;
        let body = &bytes[16..];
        let lens: &[usize] = match tag {
            TAG_FULL => &[d, d.checked_mul(d).ok_or_else(|| bad("dimension overflow"))?],
            TAG_DIAG => &[d, d],
            TAG_LINEAR => &[d],
            other => {
                return Err(Error::Snapshot(format!("unknown variant tag {other}")));
            }
        };
        let expected: usize = lens.iter().map(|n| n * 8).sum();
        if body.len() != expected {
            return Err(Error::Snapshot(format!(
                "snapshot body is {} bytes, expected {expected}",
                body.len()
            )));
        }
        let mut cursor = body;
        let mut read_array = |n: usize| -> Vec<f64> {
            let (head, tail) = cursor.split_at(n * 8);
            cursor = tail;
            head.chunks_exact(8)
                .map(|c| f64::from_bits(u64::from_le_bytes(c.try_into().expect("sized chunk"))))
                .collect()
        };
        Ok(match tag {
            TAG_FULL => {
                let mu = read_array(d);
                let sigma = read_array(d * d);
                Snapshot::Full { mu, sigma }
            }
            TAG_DIAG => {
                let mu = read_array(d);
                let g = read_array(d);
                Snapshot::Diag { mu, g }
            }
            _ => Snapshot::Linear { w: read_array(d) },
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        Self::from_bytes(&bytes)
    }
}
