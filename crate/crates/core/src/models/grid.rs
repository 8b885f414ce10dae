use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::{from_usize, Real};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid dimension must be 1, 2 or 3, got {0}")]
    BadDim(usize),
    #[error("need at least 4 points per axis, got {0}")]
    TooCoarse(usize),
}

/// Uniform grid `k_j = -π + 2πj/N` on `[-π, π)` per axis. Flat indices are
/// row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BzGrid {
    pub dim: usize,
    pub n: Vec<usize>,
}

impl BzGrid {
    pub fn new(dim: usize, n_per_axis: usize) -> Result<Self, GridError> {
        Self::with_shape(vec![n_per_axis; dim])
    }

    pub fn with_shape(n: Vec<usize>) -> Result<Self, GridError> {
        if !(1..=3).contains(&n.len()) {
            return Err(GridError::BadDim(n.len()));
        }
        if let Some(&m) = n.iter().find(|&&m| m < 4) {
            return Err(GridError::TooCoarse(m));
        }
        Ok(BzGrid { dim: n.len(), n })
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Momentum of grid index `j` on `axis`.
    pub fn k<T: Real>(&self, axis: usize, j: usize) -> T {
        let n = self.n[axis];
        -T::PI() + T::TAU() * from_usize::<T>(j) / from_usize::<T>(n)
    }

    /// Spacing on `axis`.
    pub fn dk<T: Real>(&self, axis: usize) -> T {
        T::TAU() / from_usize::<T>(self.n[axis])
    }

    /// Multi-index of a flat index.
    pub fn unflatten(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for a in (0..self.dim).rev() {
            out[a] = idx % self.n[a];
            idx /= self.n[a];
        }
        out
    }

    pub fn flatten(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for a in 0..self.dim {
            idx = idx * self.n[a] + multi[a];
        }
        idx
    }

    /// Flat index with periodic wrap-around on every axis.
    pub fn flatten_wrapped(&self, multi: &[isize]) -> usize {
        let mut idx = 0;
        for a in 0..self.dim {
            let n = self.n[a] as isize;
            idx = idx * self.n[a] + multi[a].rem_euclid(n) as usize;
        }
        idx
    }

    /// Momentum vector of a flat index.
    pub fn point<T: Real>(&self, idx: usize) -> [T; 3] {
        let m = self.unflatten(idx);
        let mut k = [T::zero(); 3];
        for a in 0..self.dim {
            k[a] = self.k(a, m[a]);
        }
        k
    }
}
