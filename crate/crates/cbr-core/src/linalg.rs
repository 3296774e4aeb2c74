//! Dense symmetric matrix support for the full-covariance ranker: the
//! quadratic form zᵀΣz and the rank-1 confidence downdate Σ − β(Σz)(Σz)ᵀ.
//! Storage is row-major; mutation computes the upper triangle and mirrors
//! it, so symmetry is exact by construction.

use crate::data::SparseVec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    d: usize,
    a: Vec<f64>,
}

impl SymMatrix {
    pub fn identity(d: usize) -> Self {
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            a[i * d + i] = 1.0;
        }
        SymMatrix { d, a }
    }

    /// Build from explicit rows; rejects non-square or asymmetric input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        let mut a = vec![0.0; d * d];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Shape(format!(
                    "row {i} has length {}, expected {d}",
                    row.len()
                )));
            }
            a[i * d..(i + 1) * d].copy_from_slice(row);
        }
        for i in 0..d {
            for j in (i + 1)..d {
                if a[i * d + j] != a[j * d + i] {
                    return Err(Error::Shape(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(SymMatrix { d, a })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.d + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    pub fn from_raw(d: usize, a: Vec<f64>) -> Result<Self> {
        if a.len() != d * d {
            return Err(Error::Shape(format!(
                "raw buffer has {} entries, expected {}",
                a.len(),
                d * d
            )));
        }
        Ok(SymMatrix { d, a })
    }

    fn check_index(&self, z: &SparseVec) -> Result<()> {
        if let Some(top) = z.max_index() {
            if top as usize >= self.d {
                return Err(Error::Shape(format!(
                    "vector touches coordinate {top}, matrix dimension is {}",
                    self.d
                )));
            }
        }
        Ok(())
    }

    /// zᵀΣz over z's support; O(nnz²).
    pub fn quad_form(&self, z: &SparseVec) -> Result<f64> {
        self.check_index(z)?;
        let mut acc = 0.0;
        for &(i, zi) in z.entries() {
            let row = &self.a[i as usize * self.d..(i as usize + 1) * self.d];
            let mut rowdot = 0.0;
            for &(j, zj) in z.entries() {
                rowdot += row[j as usize] * zj;
            }
            acc += zi * rowdot;
        }
        Ok(acc)
    }

    /// Dense Σz for sparse z; O(d · nnz).
    pub fn matvec_sparse(&self, z: &SparseVec) -> Result<Vec<f64>> {
        self.check_index(z)?;
        let mut out = vec![0.0; self.d];
        for &(j, zj) in z.entries() {
            let col = j as usize;
            for (i, oi) in out.iter_mut().enumerate() {
                *oi += self.a[i * self.d + col] * zj;
            }
        }
        Ok(out)
    }

    /// Σ ← Σ − β·w·wᵀ with w = Σz precomputed by the caller. Upper triangle
    /// computed, lower mirrored.
    pub fn rank1_downdate(&mut self, w: &[f64], beta: f64) -> Result<()> {
        if w.len() != self.d {
            return Err(Error::Shape(format!(
                "downdate vector has length {}, matrix dimension is {}",
                w.len(),
                self.d
            )));
        }
        for i in 0..self.d {
            for j in i..self.d {
                let v = self.a[i * self.d + j] - beta * w[i] * w[j];
                self.a[i * self.d + j] = v;
                self.a[j * self.d + i] = v;
            }
        }
        Ok(())
    }
}

/// μ·x over x's support.
pub fn dot_sparse(dense: &[f64], x: &SparseVec) -> Result<f64> {
    if let Some(top) = x.max_index() {
        if top as usize >= dense.len() {
            return Err(Error::Shape(format!(
                "vector touches coordinate {top}, model dimension is {}",
                dense.len()
            )));
        }
    }
    let mut acc = 0.0;
    for &(i, v) in x.entries() {
        acc += dense[i as usize] * v;
    }
    Ok(acc)
}
