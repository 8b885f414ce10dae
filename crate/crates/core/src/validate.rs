//! Cross-checks of the solvers against independent references.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::lz::{canonicalize_axis, probability_from_cos, Axis, LzParams};
use crate::models::{BandField, BzGrid, ModelKind, ModelParams};
use crate::scan::{compare_methods, scan, Method, ScanOptions};
use crate::special::kummer::kummer_m;
use crate::tdse::{
    averaged_spin_numeric, default_coulomb_start, evolve_quench, excited_occupation, InitialState, PointField,
    QuenchProtocol,
};
use crate::topo::{find_zero_sets, invariant_for_map, oracle, DEFAULT_TOL_SIS};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, value: f64, tol: f64, detail: String) -> Self {
        Check { name: name.into(), value, tol, pass: value.is_finite() && value <= tol, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Largest `|P_numeric - P_closed|` over a few `(g, θ)` pairs at `ε = 1`.
pub fn probability_check(tol: f64) -> Result<Check, Error> {
    let mut worst: f64 = 0.0;
    for &g in &[0.25, 1.0, 2.0] {
        for &theta in &[0.4, std::f64::consts::FRAC_PI_2, 2.5] {
            let lz = LzParams::new(g, 1.0, theta, 0.3)?;
            let field = PointField::from_lz(&lz);
            let p = QuenchProtocol::coulomb(g, default_coulomb_start(g, 1.0), 2000.0, 200.0)?;
            let out = evolve_quench(&p, &field, &InitialState::Ground, 1e-11)?;
            let pn = excited_occupation(&p, &field, &out);
            worst = worst.max((pn - lz.transition_probability()).abs());
        }
    }
    Ok(Check::new("probability vs closed form", worst, tol, "g in {0.25, 1, 2}, theta in {0.4, pi/2, 2.5}".into()))
}

/// `M(1, 2, 1) = e - 1`.
pub fn kummer_check() -> Result<Check, Error> {
    let one = Complex::new(1.0, 0.0);
    let m = kummer_m(one, Complex::new(2.0, 0.0), one).map_err(|e| Error::Config(e.to_string()))?;
    let err = (m - Complex::new(std::f64::consts::E - 1.0, 0.0)).norm();
    Ok(Check::new("M(1,2,1) = e - 1", err, 1e-14, format!("M = {m}")))
}

fn chain(m_z: f64, t_so: f64) -> Result<BandField<f64>, Error> {
    Ok(BandField::new(ModelKind::Aiii1d, ModelParams { m_z, t_so, ..Default::default() }, Axis::Z)?)
}

/// Winding number from the analytic texture against the Hamiltonian oracle.
pub fn winding_check() -> Result<Check, Error> {
    let model = chain(0.0, 0.2)?;
    let grid = BzGrid::new(1, 400)?;
    let p = QuenchProtocol::coulomb(1.0, 1e-6, 1000.0, 200.0)?;
    let map = scan(&model, &grid, &p, Method::Analytic, &ScanOptions::default())?;
    let sets = find_zero_sets(&map, DEFAULT_TOL_SIS)?;
    let nu = invariant_for_map(&map, &sets, DEFAULT_TOL_SIS)?;
    let reference = oracle::winding_oracle_1d(&model, 10_000);
    let err = (nu.value as f64 - reference).abs();
    Ok(Check::new("1D winding vs oracle", err, 1e-6, format!("texture {} oracle {reference:.6}", nu.value)))
}

/// Chern number from the analytic texture against plaquette Berry flux.
pub fn chern_check() -> Result<Check, Error> {
    let model = BandField::new(
        ModelKind::Qah2d,
        ModelParams { m_z: 1.0, t_so_x: 0.6, t_so_y: 0.6, ..Default::default() },
        Axis::Z,
    )?;
    let grid = BzGrid::new(2, 61)?;
    let p = QuenchProtocol::coulomb(1.0, 1e-6, 1000.0, 200.0)?;
    let map = scan(&model, &grid, &p, Method::Analytic, &ScanOptions::default())?;
    let sets = find_zero_sets(&map, DEFAULT_TOL_SIS)?;
    let c = invariant_for_map(&map, &sets, DEFAULT_TOL_SIS)?;
    let reference = oracle::fhs_chern(&model, 60);
    let err = (c.value as f64 - reference).abs();
    Ok(Check::new("2D Chern vs Berry flux", err, 1e-6, format!("texture {} flux {reference:.6}", c.value)))
}

/// Largest componentwise difference between numeric and analytic chain maps.
pub fn map_check(tol: f64) -> Result<Check, Error> {
    let model = chain(0.3, 0.2)?;
    let grid = BzGrid::new(1, 32)?;
    let p = QuenchProtocol::coulomb(0.5, 1e-7, 4000.0, 400.0)?;
    let r = compare_methods(&model, &grid, &p, &ScanOptions::default())?;
    Ok(Check::new("numeric vs analytic map", r.max, tol, format!("mean {:.3e} over {} points", r.mean, r.points)))
}

/// The four-level texture equals `-(1 - 2P) h/|h|` with `P` from the
/// two-level formula at the same `cos θ`.
pub fn four_level_check(tol: f64) -> Result<Check, Error> {
    let h: [f64; 4] = [0.7, -0.4, 0.5, 0.3];
    let g: f64 = 1.0;
    let field = PointField::four_level(h);
    let n = field.post_norm();
    let p = QuenchProtocol::coulomb(g, default_coulomb_start(g, n), 2000.0, 300.0)?;
    let s = averaged_spin_numeric(&p, &field, &InitialState::Ground, 1e-10)?;
    let amp = -(1.0 - 2.0 * probability_from_cos(g, h[0] / n)) / n;
    let err = (0..4).map(|i| (s[i] - amp * h[i]).abs()).fold(0.0, f64::max);
    Ok(Check::new("four-level reduction", err, tol, format!("{s:?}")))
}

/// Two-level field quenched along `y` matches the relabeled closed form.
pub fn axis_check(tol: f64) -> Result<Check, Error> {
    let h: [f64; 3] = [0.3, -0.5, 0.8];
    let g: f64 = 0.7;
    let field = PointField::two_level(h, Axis::Y);
    let n = field.post_norm();
    let p = QuenchProtocol::coulomb(g, default_coulomb_start(g, n), 2000.0, 300.0)?;
    let s = averaged_spin_numeric(&p, &field, &InitialState::Ground, 1e-10)?;
    let c = canonicalize_axis(h, Axis::Y, g)?;
    let a = c.averaged_spin();
    let err = (0..3).map(|i| (s[i] - a[i]).abs()).fold(0.0, f64::max);
    Ok(Check::new("y-axis quench vs relabeled closed form", err, tol, format!("{:?}", &s[..3])))
}

/// Runs every check.
pub fn run_all() -> Result<ValidationReport, Error> {
    Ok(ValidationReport {
        checks: vec![
            probability_check(1e-6)?,
            kummer_check()?,
            winding_check()?,
            chern_check()?,
            map_check(2e-3)?,
            four_level_check(3e-3)?,
            axis_check(3e-3)?,
        ],
    })
}
