//! Band- and spin-inversion surfaces of a texture map and the topological
//! invariants read off the texture on the band-inversion surface.
//!
//! A zero set of the quench-axis average is a BIS when the remaining
//! components stay finite on it and an SIS when they vanish with it. Zero
//! sets are oriented so that the region where the quench-axis average is
//! positive (the side where the post-quench `h_0` is negative) lies to the
//! left of a loop, or behind a surface normal.

mod contour;
mod invariant;
pub mod oracle;

pub use contour::find_zero_sets;
pub use invariant::{chern_2d, chern_on_bis_sphere, invariant_for_map, winding_1d, InvariantKind, InvariantResult};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lz::{probability_from_cos, Axis};
use crate::real::{lit, Real};
use crate::scan::SpinTextureMap;

pub const DEFAULT_TOL_SIS: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopoError {
    #[error("tol_sis must lie in (0, 0.2], got {0}")]
    BadTolerance(f64),
    #[error("map has {0} unsolved points")]
    IncompleteMap(usize),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("texture magnitude {min:.3e} on the BIS is below tol_sis = {tol}")]
    IllConditioned { min: f64, tol: f64 },
    #[error("zero set {0} is not closed")]
    OpenSet(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroKind {
    Bis,
    Sis,
    Ambiguous,
}

/// A connected zero set of the quench-axis average.
///
/// 2D sets are ordered loops; 3D sets carry a triangulation over `points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub kind: ZeroKind,
    /// Momenta wrapped to `[-π, π)`.
    pub points: Vec<Vec<f64>>,
    /// Sign of the slope of the quench-axis average along the grid edge
    /// (increasing index) on which each point was found.
    pub crossing_sign: Vec<i8>,
    /// Largest `|⟨γ_i⟩|`, `i ≠` quench axis, at each point.
    pub residual_inplane: Vec<f64>,
    /// Interpolated averages at each point.
    pub texture: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub triangles: Vec<[usize; 3]>,
    pub closed: bool,
    pub min_grid_index: usize,
}

impl ZeroSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub(crate) fn classify(residual: &[f64], tol: f64) -> ZeroKind {
    let above = residual.iter().filter(|&&r| r > tol).count();
    if above == residual.len() {
        ZeroKind::Bis
    } else if above == 0 {
        ZeroKind::Sis
    } else {
        ZeroKind::Ambiguous
    }
}

/// Components of the map that span the plane (or space) transverse to the
/// quench axis, in right-handed order.
pub(crate) fn transverse<T: Real>(map: &SpinTextureMap<T>) -> Vec<usize> {
    if map.n_components == 4 {
        vec![1, 2, 3]
    } else {
        let p = Axis::from_index(map.quench_component).unwrap_or_default().permutation();
        vec![p[0], p[1]]
    }
}

/// `cos θ*` at which the Coulomb-protocol transition probability equals 1/2,
/// found by bisection. All averaged components vanish where the post-quench
/// field satisfies `cos θ(k) = cos θ*`. `P` runs monotonically from 1 at
/// `cos θ = -1` to 0 at `cos θ = 1`, so a root exists for every `g >= 0`;
/// `None` is returned only for invalid `g`.
pub fn sis_locus_predict<T: Real>(g: T) -> Option<T> {
    if !(g >= T::zero() && g.is_finite()) {
        return None;
    }
    let half = lit::<T>(0.5);
    let (mut lo, mut hi) = (-T::one(), T::one());
    for _ in 0..200 {
        let mid = (lo + hi) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        if probability_from_cos(g, mid) > half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) * half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lz::half_probability_cos;

    #[test]
    fn sis_root_matches_closed_form() {
        for &g in &[0.0f64, 0.01, 0.2, 1.0, 5.0, 10.0, 80.0] {
            let c = sis_locus_predict(g).unwrap();
            assert!((c - half_probability_cos(g)).abs() < 1e-12, "g={g}");
        }
        assert!((sis_locus_predict(5.0f64).unwrap() + 0.9779).abs() < 1e-4);
        assert!(sis_locus_predict(-1.0f64).is_none());
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&[0.5, 0.3], 0.02), ZeroKind::Bis);
        assert_eq!(classify(&[1e-4, 0.0], 0.02), ZeroKind::Sis);
        assert_eq!(classify(&[1e-4, 0.3], 0.02), ZeroKind::Ambiguous);
    }
}
