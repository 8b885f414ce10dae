//! Momentum-space band models, the γ-matrix algebra and Brillouin-zone grids.
//!
//! Energies are in units of the hopping `t0`. Two-band fields are returned as
//! `(h_x, h_y, h_z)` on the Pauli matrices; the four-band field as
//! `(h_0, h_1, h_2, h_3)` on `γ_0..γ_3`. Every field function takes the
//! instantaneous protocol term (`g/t` or `βt`) as an additive `quench`
//! argument on the quench component; pass zero for the post-quench field.

mod gamma;
mod grid;

pub use gamma::{GammaBasis, Matrix};
pub use grid::{BzGrid, GridError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lz::Axis;
use crate::real::{lit, to_f64, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid model parameter: {0}")]
    InvalidParams(String),
    #[error("post-quench gap closes: {0}")]
    GapClosing(String),
    #[error("no tabulated phase for this configuration: {0}")]
    NoLookup(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Two-band chain `h_x = t_so sin k`, `h_z = m_z - t0 cos k`.
    Aiii1d,
    /// Two-band square-lattice Chern insulator.
    Qah2d,
    /// Four-band cubic-lattice chiral insulator.
    Chiral3d,
}

impl ModelKind {
    pub fn dim(self) -> usize {
        match self {
            ModelKind::Aiii1d => 1,
            ModelKind::Qah2d => 2,
            ModelKind::Chiral3d => 3,
        }
    }

    pub fn bands(self) -> usize {
        match self {
            ModelKind::Chiral3d => 4,
            _ => 2,
        }
    }
}

/// Model constants. The 1D and 3D models read `t_so`; the 2D model reads
/// `t_so_x` and `t_so_y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct ModelParams<T> {
    pub t0: T,
    pub t_so: T,
    pub t_so_x: T,
    pub t_so_y: T,
    pub m_x: T,
    pub m_y: T,
    pub m_z: T,
}

impl<T: Real> Default for ModelParams<T> {
    fn default() -> Self {
        let so = lit::<T>(0.2);
        ModelParams { t0: T::one(), t_so: so, t_so_x: so, t_so_y: so, m_x: T::zero(), m_y: T::zero(), m_z: T::zero() }
    }
}

/// `h_x = t_so sin k`, `h_z = quench + m_z - t0 cos k`, returned as `(h_x, h_z)`.
pub fn field_1d<T: Real>(k: T, p: &ModelParams<T>, quench: T) -> [T; 2] {
    [p.t_so * k.sin(), quench + p.m_z - p.t0 * k.cos()]
}

/// `(h_x, h_y, h_z)` of the 2D model with `quench` added on `axis`.
pub fn field_2d<T: Real>(k: [T; 2], p: &ModelParams<T>, quench: T, axis: Axis) -> [T; 3] {
    let (sx, cx) = k[0].sin_cos();
    let (sy, cy) = k[1].sin_cos();
    let mut h = [p.m_x + p.t_so_x * sx, p.m_y + p.t_so_y * sy, p.m_z - p.t0 * cx - p.t0 * cy];
    h[axis.index()] = h[axis.index()] + quench;
    h
}

/// `(h_0, h_1, h_2, h_3)` of the 3D model, `quench` added on `h_0`.
pub fn field_3d<T: Real>(k: [T; 3], p: &ModelParams<T>, quench: T) -> [T; 4] {
    let (s0, c0) = k[0].sin_cos();
    let (s1, c1) = k[1].sin_cos();
    let (s2, c2) = k[2].sin_cos();
    [quench + p.m_z - p.t0 * (c0 + c1 + c2), p.t_so * s0, p.t_so * s1, p.t_so * s2]
}

/// A band model together with the component that carries the protocol term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct BandField<T> {
    pub kind: ModelKind,
    pub params: ModelParams<T>,
    /// Quench axis of two-band models. Four-band models always quench `h_0`.
    #[serde(default)]
    pub quench_axis: Axis,
}

impl<T: Real> BandField<T> {
    pub fn new(kind: ModelKind, params: ModelParams<T>, quench_axis: Axis) -> Result<Self, ModelError> {
        let f = BandField { kind, params, quench_axis };
        f.validate()?;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn bands(&self) -> usize {
        self.kind.bands()
    }

    /// Number of field components (3 for two-band, 4 for four-band).
    pub fn n_components(&self) -> usize {
        if self.bands() == 4 {
            4
        } else {
            3
        }
    }

    /// Index of the quenched component within [`BandField::field`].
    pub fn quench_component(&self) -> usize {
        if self.bands() == 4 {
            0
        } else {
            self.quench_axis.index()
        }
    }

    /// Field at momentum `k` (length [`BandField::dim`]) with the protocol
    /// term `quench`. Unused trailing components are zero.
    pub fn field(&self, k: &[T], quench: T) -> [T; 4] {
        let z = T::zero();
        match self.kind {
            ModelKind::Aiii1d => {
                let [hx, hz] = field_1d(k[0], &self.params, z);
                let mut h = [hx, z, hz, z];
                let c = self.quench_component();
                h[c] = h[c] + quench;
                h
            }
            ModelKind::Qah2d => {
                let h = field_2d([k[0], k[1]], &self.params, quench, self.quench_axis);
                [h[0], h[1], h[2], z]
            }
            ModelKind::Chiral3d => field_3d([k[0], k[1], k[2]], &self.params, quench),
        }
    }

    pub fn post_quench(&self, k: &[T]) -> [T; 4] {
        self.field(k, T::zero())
    }

    /// Checks parameter ranges (not gap closing).
    pub fn validate(&self) -> Result<(), ModelError> {
        let p = &self.params;
        let all = [p.t0, p.t_so, p.t_so_x, p.t_so_y, p.m_x, p.m_y, p.m_z];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(ModelError::InvalidParams("parameters must be finite".into()));
        }
        if p.t0 <= T::zero() {
            return Err(ModelError::InvalidParams(format!("t0 must be > 0, got {}", p.t0)));
        }
        if p.t_so < T::zero() || p.t_so_x < T::zero() || p.t_so_y < T::zero() {
            return Err(ModelError::InvalidParams("spin-orbit amplitudes must be >= 0".into()));
        }
        if self.bands() == 4 && self.quench_axis != Axis::Z {
            return Err(ModelError::InvalidParams(
                "the four-band model is quenched on h_0 only (quench_axis = z)".into(),
            ));
        }
        if self.kind == ModelKind::Aiii1d && self.quench_axis == Axis::Y {
            return Err(ModelError::InvalidParams("the 1D model has no y component to quench".into()));
        }
        Ok(())
    }

    /// Rejects parameters for which the post-quench gap closes somewhere in
    /// the Brillouin zone.
    pub fn check_gap(&self) -> Result<(), ModelError> {
        let p = &self.params;
        let t0 = to_f64(p.t0);
        let mz = to_f64(p.m_z);
        let rel = 1e-9 * t0;
        let near = |x: f64| x.abs() <= rel;
        match self.kind {
            ModelKind::Aiii1d => {
                let cands: Vec<f64> = if to_f64(p.t_so) > 0.0 { vec![1.0, -1.0] } else { vec![] };
                if to_f64(p.t_so) == 0.0 && mz.abs() <= t0 + rel {
                    return Err(ModelError::GapClosing(format!("t_so = 0 and |m_z| = {} <= t0", mz.abs())));
                }
                if cands.iter().any(|&c| near(mz - t0 * c)) {
                    return Err(ModelError::GapClosing(format!("|m_z| = t0 = {t0}")));
                }
                Ok(())
            }
            ModelKind::Qah2d => {
                let cx = cos_candidates(to_f64(p.m_x), to_f64(p.t_so_x));
                let cy = cos_candidates(to_f64(p.m_y), to_f64(p.t_so_y));
                // h_z = m_z - t0 (cos kx + cos ky) must avoid zero on the candidate set
                let target = mz / t0;
                let hit = match (&cx, &cy) {
                    (CosSet::Empty, _) | (_, CosSet::Empty) => false,
                    (CosSet::Points(a), CosSet::Points(b)) => {
                        a.iter().any(|&x| b.iter().any(|&y| near(t0 * (target - x - y))))
                    }
                    (CosSet::Points(a), CosSet::Any) | (CosSet::Any, CosSet::Points(a)) => {
                        a.iter().any(|&x| (target - x).abs() <= 1.0 + 1e-9)
                    }
                    (CosSet::Any, CosSet::Any) => target.abs() <= 2.0 + 1e-9,
                };
                if hit {
                    Err(ModelError::GapClosing(format!(
                        "h(k) = 0 is reachable for m = ({}, {}, {})",
                        p.m_x, p.m_y, p.m_z
                    )))
                } else {
                    Ok(())
                }
            }
            ModelKind::Chiral3d => {
                let so = to_f64(p.t_so);
                if so == 0.0 {
                    if mz.abs() <= 3.0 * t0 + rel {
                        return Err(ModelError::GapClosing(format!("t_so = 0 and |m_z| = {} <= 3 t0", mz.abs())));
                    }
                    return Ok(());
                }
                for s in [-3.0, -1.0, 1.0, 3.0] {
                    if near(mz - s * t0) {
                        return Err(ModelError::GapClosing(format!("m_z = {} t0", s)));
                    }
                }
                Ok(())
            }
        }
    }
}

enum CosSet {
    Empty,
    Points(Vec<f64>),
    Any,
}

/// Values of `cos k` at which `m + so sin k = 0`.
fn cos_candidates(m: f64, so: f64) -> CosSet {
    if so == 0.0 {
        return if m == 0.0 { CosSet::Any } else { CosSet::Empty };
    }
    let s = -m / so;
    if s.abs() > 1.0 {
        return CosSet::Empty;
    }
    let c = (1.0 - s * s).max(0.0).sqrt();
    CosSet::Points(vec![c, -c])
}

/// Invariant of the post-quench phase as tabulated for each model:
///
/// * 1D: `|m_z| < t0` gives winding 1, otherwise 0.
/// * 2D: `0 < m_z < 2t0` gives Chern −1, `−2t0 < m_z < 0` gives +1, otherwise 0.
/// * 3D: `t0 < |m_z| < 3t0` gives −1, `|m_z| < t0` gives 2, otherwise 0.
///
/// The 2D table assumes `m_x = m_y = 0`.
pub fn expected_invariant<T: Real>(field: &BandField<T>) -> Result<i32, ModelError> {
    field.validate()?;
    field.check_gap()?;
    let p = &field.params;
    let r = to_f64(p.m_z) / to_f64(p.t0);
    Ok(match field.kind {
        ModelKind::Aiii1d => i32::from(r.abs() < 1.0),
        ModelKind::Qah2d => {
            if to_f64(p.m_x) != 0.0 || to_f64(p.m_y) != 0.0 {
                return Err(ModelError::NoLookup("2D phase table requires m_x = m_y = 0".into()));
            }
            if r > 0.0 && r < 2.0 {
                -1
            } else if r < 0.0 && r > -2.0 {
                1
            } else {
                0
            }
        }
        ModelKind::Chiral3d => {
            let a = r.abs();
            if a > 3.0 {
                0
            } else if a > 1.0 {
                -1
            } else {
                2
            }
        }
    })
}
