use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{transverse, TopoError, ZeroKind, ZeroSet};
use crate::real::Real;
use crate::scan::SpinTextureMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantKind {
    Winding1d,
    Chern2d,
    ChernOnBisSphere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantResult {
    pub value: i32,
    pub kind: InvariantKind,
    /// Sum before rounding.
    pub raw: f64,
    /// One entry per BIS component (per BIS point in 1D).
    pub contributions: Vec<f64>,
    /// Smallest transverse texture magnitude met on the BIS.
    pub min_texture: f64,
    /// Largest distance of a component's angle (or solid-angle) sum from the
    /// nearest multiple of `2π` (or `4π`), in units of that period.
    pub closure_defect: f64,
}

fn check_bis(sets: &[ZeroSet]) -> Result<(), TopoError> {
    match sets.iter().position(|s| s.kind != ZeroKind::Bis) {
        Some(i) => Err(TopoError::NotApplicable(format!("zero set {i} is classified {:?}, not BIS", sets[i].kind))),
        None => Ok(()),
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Winding number of a 1D chain quenched along `z`:
/// `ν = ½ Σ_j sgn(-⟨σ_x⟩(k_j)) · sgn(∂_k(-⟨σ_z⟩)(k_j))` over the BIS points,
/// i.e. both factors taken on the reversed texture, which points along the
/// post-quench field.
pub fn winding_1d<T: Real>(
    map: &SpinTextureMap<T>,
    bis: &[ZeroSet],
    tol_sis: f64,
) -> Result<InvariantResult, TopoError> {
    if map.grid.dim != 1 || map.n_components != 3 || map.quench_component != 2 {
        return Err(TopoError::NotApplicable("winding_1d needs a 1D two-band map quenched along z".into()));
    }
    check_bis(bis)?;
    let mut contributions = Vec::new();
    let mut min_texture = f64::INFINITY;
    for s in bis {
        for (tex, &cs) in s.texture.iter().zip(&s.crossing_sign) {
            let sx = tex[0];
            min_texture = min_texture.min(sx.abs());
            contributions.push(0.5 * sgn(-sx) * -(cs as f64));
        }
    }
    if min_texture < tol_sis {
        return Err(TopoError::IllConditioned { min: min_texture, tol: tol_sis });
    }
    let raw: f64 = contributions.iter().sum();
    Ok(InvariantResult {
        value: raw.round() as i32,
        kind: InvariantKind::Winding1d,
        raw,
        contributions,
        min_texture: if min_texture.is_finite() { min_texture } else { 0.0 },
        closure_defect: (raw - raw.round()).abs(),
    })
}

/// Chern number from the winding of the transverse texture `-⟨σ_⊥⟩` along
/// each BIS loop: `C = -Σ_loops (Δangle / 2π)` with loops traversed so that
/// the positive side of the quench-axis average is on the left.
pub fn chern_2d<T: Real>(
    map: &SpinTextureMap<T>,
    loops: &[ZeroSet],
    tol_sis: f64,
) -> Result<InvariantResult, TopoError> {
    if map.grid.dim != 2 || map.n_components != 3 || map.slice.is_some() {
        return Err(TopoError::NotApplicable("chern_2d needs a full 2D two-band map".into()));
    }
    check_bis(loops)?;
    let tr = transverse(map);
    let mut contributions = Vec::new();
    let mut min_texture = f64::INFINITY;
    let mut defect = 0.0f64;
    for (i, l) in loops.iter().enumerate() {
        if !l.closed {
            return Err(TopoError::OpenSet(i));
        }
        let ang: Vec<f64> = l
            .texture
            .iter()
            .map(|t| {
                let (a, b) = (-t[tr[0]], -t[tr[1]]);
                min_texture = min_texture.min(a.hypot(b));
                b.atan2(a)
            })
            .collect();
        let n = ang.len();
        let total: f64 = (0..n).map(|j| wrap_angle(ang[(j + 1) % n] - ang[j])).sum();
        let c = -total / TAU;
        defect = defect.max((c - c.round()).abs());
        contributions.push(c);
    }
    if min_texture < tol_sis {
        return Err(TopoError::IllConditioned { min: min_texture, tol: tol_sis });
    }
    let raw: f64 = contributions.iter().sum();
    Ok(InvariantResult {
        value: raw.round() as i32,
        kind: InvariantKind::Chern2d,
        raw,
        contributions,
        min_texture: if min_texture.is_finite() { min_texture } else { 0.0 },
        closure_defect: defect,
    })
}

/// Signed solid angle of the spherical triangle spanned by unit vectors.
fn solid_angle(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let bxc = [b[1] * c[2] - b[2] * c[1], b[2] * c[0] - b[0] * c[2], b[0] * c[1] - b[1] * c[0]];
    let dot = |x: &[f64; 3], y: &[f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    let num = dot(a, &bxc);
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * num.atan2(den)
}

/// Invariant of the 3D four-band model from the degree of the unit texture
/// `-⟨γ_{1,2,3}⟩/|·|` over each closed BIS surface (normals pointing toward
/// negative quench-axis average): `C = -Σ Ω / 4π`.
pub fn chern_on_bis_sphere<T: Real>(
    map: &SpinTextureMap<T>,
    surfaces: &[ZeroSet],
    tol_sis: f64,
) -> Result<InvariantResult, TopoError> {
    if map.grid.dim != 3 || map.n_components != 4 {
        return Err(TopoError::NotApplicable("chern_on_bis_sphere needs a 3D four-band map".into()));
    }
    check_bis(surfaces)?;
    let mut contributions = Vec::new();
    let mut min_texture = f64::INFINITY;
    let mut defect = 0.0f64;
    for (i, s) in surfaces.iter().enumerate() {
        if !s.closed {
            return Err(TopoError::OpenSet(i));
        }
        let unit: Vec<[f64; 3]> = s
            .texture
            .iter()
            .map(|t| {
                let v = [-t[1], -t[2], -t[3]];
                let m = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                min_texture = min_texture.min(m);
                [v[0] / m, v[1] / m, v[2] / m]
            })
            .collect();
        let omega: f64 = s.triangles.iter().map(|t| solid_angle(&unit[t[0]], &unit[t[1]], &unit[t[2]])).sum();
        let c = -omega / (2.0 * TAU);
        defect = defect.max((c - c.round()).abs());
        contributions.push(c);
    }
    if min_texture < tol_sis {
        return Err(TopoError::IllConditioned { min: min_texture, tol: tol_sis });
    }
    let raw: f64 = contributions.iter().sum();
    Ok(InvariantResult {
        value: raw.round() as i32,
        kind: InvariantKind::ChernOnBisSphere,
        raw,
        contributions,
        min_texture: if min_texture.is_finite() { min_texture } else { 0.0 },
        closure_defect: defect,
    })
}

/// Picks the invariant appropriate to the map's dimension and evaluates it on
/// the BIS sets among `sets`.
pub fn invariant_for_map<T: Real>(
    map: &SpinTextureMap<T>,
    sets: &[ZeroSet],
    tol_sis: f64,
) -> Result<InvariantResult, TopoError> {
    let bis: Vec<ZeroSet> = sets.iter().filter(|s| s.kind == ZeroKind::Bis).cloned().collect();
    match (map.grid.dim, map.slice.is_some()) {
        (1, _) => winding_1d(map, &bis, tol_sis),
        (2, false) => chern_2d(map, &bis, tol_sis),
        (3, _) => chern_on_bis_sphere(map, &bis, tol_sis),
        _ => Err(TopoError::NotApplicable("no invariant is defined on a cross-section".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octant_solid_angle() {
        let o = solid_angle(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]);
        assert!((o - PI / 2.0).abs() < 1e-14);
        let o = solid_angle(&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]);
        assert!((o + PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn angle_wrap() {
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_angle(-0.1) + 0.1).abs() < 1e-15);
    }
}
