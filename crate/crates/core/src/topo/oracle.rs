//! Invariants computed directly from the post-quench Bloch Hamiltonian,
//! independently of any dynamics.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::models::{BandField, ModelKind};
use crate::real::{to_f64, Real};

/// Winding of `(h_x, h_z)` around the origin over `k ∈ [-π, π)`, accumulated
/// from `n` wrapped angle increments of `atan2(h_z, h_x)`.
pub fn winding_oracle_1d<T: Real>(field: &BandField<T>, n: usize) -> f64 {
    let angle = |j: usize| {
        let k = -PI + TAU * j as f64 / n as f64;
        let h = field.post_quench(&[T::from_f64(k).unwrap_or_else(T::zero)]);
        to_f64(h[2]).atan2(to_f64(h[0]))
    };
    let mut total = 0.0;
    let mut prev = angle(0);
    for j in 1..=n {
        let a = angle(j % n);
        let mut d = (a - prev).rem_euclid(TAU);
        if d > PI {
            d -= TAU;
        }
        total += d;
        prev = a;
    }
    total / TAU
}

/// Lower-band eigenvector of `h·σ`, using whichever of the two standard
/// gauges is better conditioned at this `h`.
fn lower_band(h: [f64; 3]) -> [Complex64; 2] {
    let e = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    let (u, v) = if h[2] <= 0.0 {
        (Complex64::new(e - h[2], 0.0), -Complex64::new(h[0], h[1]))
    } else {
        (Complex64::new(h[0], -h[1]), Complex64::new(-(e + h[2]), 0.0))
    };
    let m = (u.norm_sqr() + v.norm_sqr()).sqrt();
    [u / m, v / m]
}

fn link(a: &[Complex64; 2], b: &[Complex64; 2]) -> Complex64 {
    let z = a[0].conj() * b[0] + a[1].conj() * b[1];
    z / z.norm()
}

/// Chern number from plaquette Berry fluxes on an `n × n` grid, before
/// rounding. The flux is taken on the upper post-quench band, whose Chern
/// number equals the degree of the map `k ↦ h(k)/|h(k)|`.
pub fn fhs_chern<T: Real>(field: &BandField<T>, n: usize) -> f64 {
    debug_assert_eq!(field.kind, ModelKind::Qah2d);
    let k = |j: usize| T::from_f64(-PI + TAU * (j % n) as f64 / n as f64).unwrap_or_else(T::zero);
    let states: Vec<[Complex64; 2]> = (0..n * n)
        .map(|idx| {
            let h = field.post_quench(&[k(idx / n), k(idx % n)]);
            lower_band([-to_f64(h[0]), -to_f64(h[1]), -to_f64(h[2])])
        })
        .collect();
    let at = |i: usize, j: usize| &states[(i % n) * n + (j % n)];
    let mut flux = 0.0;
    for i in 0..n {
        for j in 0..n {
            let u1 = link(at(i, j), at(i + 1, j));
            let u2 = link(at(i + 1, j), at(i + 1, j + 1));
            let u3 = link(at(i, j + 1), at(i + 1, j + 1));
            let u4 = link(at(i, j), at(i, j + 1));
            flux += (u1 * u2 * u3.conj() * u4.conj()).arg();
        }
    }
    flux / TAU
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lz::Axis;
    use crate::models::ModelParams;

    fn qah(m_z: f64) -> BandField<f64> {
        BandField::new(ModelKind::Qah2d, ModelParams { m_z, ..Default::default() }, Axis::Z).unwrap()
    }

    #[test]
    fn gauge_choice_is_an_eigenvector() {
        for h in [[0.3, -0.2, 0.9], [0.3, -0.2, -0.9], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]] {
            let u = lower_band(h);
            let e = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
            let r0 = u[0] * h[2] + u[1] * Complex64::new(h[0], -h[1]) + u[0] * e;
            let r1 = u[0] * Complex64::new(h[0], h[1]) - u[1] * h[2] + u[1] * e;
            assert!(r0.norm() < 1e-14 && r1.norm() < 1e-14, "{h:?}");
        }
    }

    #[test]
    fn qah_phases() {
        assert!((fhs_chern(&qah(1.0), 60) + 1.0).abs() < 1e-9);
        assert!((fhs_chern(&qah(-1.0), 60) - 1.0).abs() < 1e-9);
        assert!(fhs_chern(&qah(3.0), 60).abs() < 1e-9);
    }

    #[test]
    fn chain_phases() {
        let f = |m_z| BandField::new(ModelKind::Aiii1d, ModelParams { m_z, ..Default::default() }, Axis::Z).unwrap();
        assert!((winding_oracle_1d(&f(0.0), 1000) - 1.0).abs() < 1e-9);
        assert!(winding_oracle_1d(&f(1.5), 1000).abs() < 1e-9);
    }
}
