//! End-to-end workflows behind the command-line subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::io::config::field_bound;
use crate::io::svg::{heatmap_2d, line_plot_1d, xy_plot, Series};
use crate::io::{write_json, write_map, write_trajectory, ExperimentConfig};
use crate::lz::{canonicalize_axis, Axis};
use crate::models::{expected_invariant, ModelKind};
use crate::scan::{scan, scan_slice, Method, SpinTextureMap};
use crate::tdse::{
    averaged_spin_numeric, evolve_quench, excited_occupation, integrate, InitialState, PointField, ProtocolKind,
    Sampling,
};
use crate::topo::{find_zero_sets, invariant_for_map, oracle, InvariantResult, TopoError, ZeroKind, ZeroSet};
use crate::Error;

/// Results for one value of `g` in a single-point run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinglePoint {
    pub g: f64,
    pub beta: f64,
    pub p_analytic: Option<f64>,
    pub p_numeric: f64,
    pub spin_analytic: Option<Vec<f64>>,
    pub spin_numeric: Vec<f64>,
    pub residual_p: Option<f64>,
    /// Largest componentwise `|analytic - numeric|` of the averaged spin.
    pub residual_spin: Option<f64>,
    pub norm_drift: f64,
    pub steps: usize,
    pub trajectory_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleReport {
    /// Post-quench field.
    pub field: Vec<f64>,
    pub levels: usize,
    pub quench_component: usize,
    pub protocol: ProtocolKind,
    pub points: Vec<SinglePoint>,
}

fn initial_for(field: &PointField<f64>, cfg: &ExperimentConfig) -> InitialState<f64> {
    if field.levels == 4 {
        cfg.scan.four_level_start.into()
    } else {
        InitialState::Ground
    }
}

/// Runs the quench at one momentum for every configured `g`, writing
/// `single_report.json` and one trajectory CSV per `g` into `out`.
pub fn run_single(cfg: &ExperimentConfig, out: &Path) -> Result<SingleReport, Error> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let field = cfg.single_field()?;
    let spec = cfg.single.clone().unwrap_or_else(|| unreachable!("validated"));
    let eps = field.post_norm();
    let init = initial_for(&field, cfg);
    let tol = cfg.scan.tol;
    let mut points = Vec::new();
    for (i, g) in cfg.g_values().into_iter().enumerate() {
        let protocol = cfg.quench_protocol(g, eps)?;
        let analytic = if field.levels == 2 && protocol.kind == ProtocolKind::Coulomb {
            let axis = Axis::from_index(field.quench).unwrap_or_default();
            let c = canonicalize_axis([field.h[0], field.h[1], field.h[2]], axis, g)?;
            Some((c.params.transition_probability(), c.averaged_spin().to_vec()))
        } else {
            None
        };
        let outcome = evolve_quench(&protocol, &field, &init, tol)?;
        let p_numeric = excited_occupation(&protocol, &field, &outcome);
        let spin = averaged_spin_numeric(&protocol, &field, &init, tol)?;
        let spin_numeric = spin[..field.n_components()].to_vec();
        let trajectory_file = if spec.trajectory {
            let samples = integrate(
                &protocol,
                &field,
                &init,
                tol,
                Sampling { samples_per_period: spec.samples_per_period, record_quench: true },
            )?;
            let name = format!("trajectory_{i}.csv");
            write_trajectory(&samples, &out.join(&name))?;
            Some(name)
        } else {
            None
        };
        let (residual_p, residual_spin) = match &analytic {
            Some((p, s)) => (
                Some((p - p_numeric).abs()),
                Some(s.iter().zip(&spin_numeric).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)),
            ),
            None => (None, None),
        };
        points.push(SinglePoint {
            g,
            beta: protocol.beta,
            p_analytic: analytic.as_ref().map(|a| a.0),
            p_numeric,
            spin_analytic: analytic.map(|a| a.1),
            spin_numeric,
            residual_p,
            residual_spin,
            norm_drift: outcome.norm_drift,
            steps: outcome.stats.accepted + outcome.stats.rejected,
            trajectory_file,
        });
    }
    let report = SingleReport {
        field: field.h[..field.n_components()].to_vec(),
        levels: field.levels,
        quench_component: field.quench,
        protocol: cfg.protocol.kind,
        points,
    };
    write_json(&out.join("single_report.json"), &report)?;
    if cfg.output.plots && report.points.len() > 1 {
        write_single_plots(&report, out)?;
    }
    Ok(report)
}

fn write_single_plots(report: &SingleReport, out: &Path) -> Result<(), Error> {
    let g: Vec<f64> = report.points.iter().map(|p| p.g).collect();
    let pn: Vec<f64> = report.points.iter().map(|p| p.p_numeric).collect();
    let mut series = vec![Series { label: "numeric", x: &g, y: &pn, points: true }];
    let pa: Vec<f64> = report.points.iter().map(|p| p.p_analytic.unwrap_or(f64::NAN)).collect();
    if report.points.iter().all(|p| p.p_analytic.is_some()) {
        series.insert(0, Series { label: "closed form", x: &g, y: &pa, points: false });
    }
    std::fs::write(out.join("probability.svg"), xy_plot("transition probability", "g", "P", &series))?;
    let n = report.points[0].spin_numeric.len();
    let cols: Vec<Vec<f64>> = (0..n).map(|c| report.points.iter().map(|p| p.spin_numeric[c]).collect()).collect();
    let acols: Vec<Vec<f64>> = (0..n)
        .map(|c| report.points.iter().map(|p| p.spin_analytic.as_ref().map_or(f64::NAN, |s| s[c])).collect())
        .collect();
    let labels: Vec<String> = (0..n).map(|c| format!("s_{c}")).collect();
    let alabels: Vec<String> = (0..n).map(|c| format!("s_{c} closed form")).collect();
    let mut series: Vec<Series> = Vec::new();
    for c in 0..n {
        if acols[c].iter().all(|v| v.is_finite()) {
            series.push(Series { label: &alabels[c], x: &g, y: &acols[c], points: false });
        }
        series.push(Series { label: &labels[c], x: &g, y: &cols[c], points: true });
    }
    std::fs::write(out.join("spin.svg"), xy_plot("time-averaged spin", "g", "avg s_i", &series))?;
    Ok(())
}

/// Compact description of a zero set for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSetSummary {
    pub kind: ZeroKind,
    pub points: usize,
    pub triangles: usize,
    pub closed: bool,
    pub min_residual: f64,
    pub max_residual: f64,
    pub min_grid_index: usize,
}

impl From<&ZeroSet> for ZeroSetSummary {
    fn from(s: &ZeroSet) -> Self {
        ZeroSetSummary {
            kind: s.kind,
            points: s.len(),
            triangles: s.triangles.len(),
            closed: s.closed,
            min_residual: s.residual_inplane.iter().copied().fold(f64::INFINITY, f64::min),
            max_residual: s.residual_inplane.iter().copied().fold(0.0, f64::max),
            min_grid_index: s.min_grid_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub tol_sis: f64,
    pub zero_sets: Vec<ZeroSetSummary>,
    pub invariant: Option<InvariantResult>,
    pub invariant_error: Option<String>,
    /// Invariant of the post-quench Hamiltonian from the phase table.
    pub expected: Option<i32>,
    /// Invariant from the Hamiltonian directly (angle accumulation in 1D,
    /// plaquette Berry flux in 2D), before rounding.
    pub oracle: Option<f64>,
    pub ambiguous: usize,
    #[serde(skip)]
    pub sets: Vec<ZeroSet>,
    #[serde(skip)]
    ill_conditioned: bool,
}

impl Detection {
    /// Error to report through the exit status, if any.
    pub fn status(&self) -> Result<(), Error> {
        if self.ambiguous > 0 {
            return Err(Error::Ambiguous(format!("{} zero set(s) mix BIS and SIS points", self.ambiguous)));
        }
        if self.ill_conditioned {
            return Err(Error::Ambiguous(self.invariant_error.clone().unwrap_or_default()));
        }
        Ok(())
    }
}

/// Zero sets, invariant and reference values of a map.
pub fn detect(map: &SpinTextureMap<f64>, tol_sis: f64) -> Result<Detection, Error> {
    let sets = find_zero_sets(map, tol_sis)?;
    let ambiguous = sets.iter().filter(|s| s.kind == ZeroKind::Ambiguous).count();
    let (invariant, invariant_error, ill) = if map.slice.is_some() {
        (None, None, false)
    } else {
        match invariant_for_map(map, &sets, tol_sis) {
            Ok(r) => (Some(r), None, false),
            Err(e @ (TopoError::IllConditioned { .. } | TopoError::OpenSet(_))) => (None, Some(e.to_string()), true),
            Err(e) => (None, Some(e.to_string()), false),
        }
    };
    let model = &map.model;
    let expected = expected_invariant(model).ok();
    let oracle = match (model.kind, map.slice) {
        (ModelKind::Aiii1d, _) => Some(oracle::winding_oracle_1d(model, 10_000)),
        (ModelKind::Qah2d, None) => Some(oracle::fhs_chern(model, map.grid.n[0].max(60))),
        _ => None,
    };
    Ok(Detection {
        tol_sis,
        zero_sets: sets.iter().map(ZeroSetSummary::from).collect(),
        invariant,
        invariant_error,
        expected,
        oracle,
        ambiguous,
        sets,
        ill_conditioned: ill,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub map_file: String,
    pub method: Method,
    pub points: usize,
    pub failures: usize,
    pub detection: Detection,
    pub slice_files: Vec<String>,
    pub plots: Vec<String>,
}

/// Overrides taken from the command line.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOverrides {
    pub method: Option<Method>,
    pub threads: Option<usize>,
}

/// Scans the configured model, writes `map.csv`, `zero_sets.json`,
/// `report.json`, any cross-sections and plots, and returns the report.
pub fn run_scan(cfg: &ExperimentConfig, out: &Path, ov: RunOverrides) -> Result<ScanReport, Error> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let model = cfg.band_field()?;
    let grid = cfg.bz_grid()?;
    let protocol = cfg.quench_protocol(cfg.protocol.g, field_bound(&model))?;
    let mut opts = cfg.scan_options();
    if let Some(n) = ov.threads {
        if n == 0 {
            return Err(Error::Config("thread count must be >= 1".into()));
        }
        opts.threads = Some(n);
    }
    let method = ov.method.unwrap_or(cfg.scan.method);
    let map = scan(&model, &grid, &protocol, method, &opts)?;
    let map_file = "map.csv".to_string();
    write_map(&map, &out.join(&map_file))?;
    let detection = detect(&map, cfg.detect.tol_sis)?;
    write_json(&out.join("zero_sets.json"), &detection.sets)?;
    let mut plots = Vec::new();
    let mut slice_files = Vec::new();
    for (i, (slice, n)) in cfg.slices().into_iter().enumerate() {
        let smap = scan_slice(&model, slice, n, &protocol, method, &opts)?;
        let name = format!("slice_{i}.csv");
        write_map(&smap, &out.join(&name))?;
        if cfg.output.plots {
            let sets = find_zero_sets(&smap, cfg.detect.tol_sis)?;
            let pname = format!("slice_{i}.svg");
            std::fs::write(out.join(&pname), heatmap_2d(&smap, 3, &sets, 0))?;
            plots.push(pname);
        }
        slice_files.push(name);
    }
    if cfg.output.plots {
        plots.extend(map_plots(&map, &detection.sets, out)?);
    }
    let report = ScanReport {
        map_file,
        method: map.method,
        points: map.len(),
        failures: map.failures.len(),
        detection,
        slice_files,
        plots,
    };
    write_json(&out.join("report.json"), &report)?;
    Ok(report)
}

/// Writes the default figure for a map and returns the file names.
pub fn map_plots(map: &SpinTextureMap<f64>, sets: &[ZeroSet], out: &Path) -> Result<Vec<String>, Error> {
    let mut names = Vec::new();
    match (map.grid.dim, map.slice.is_some()) {
        (1, _) => {
            let comps: Vec<usize> = (0..map.n_components).filter(|&c| c != 1).collect();
            let svg = line_plot_1d(&[(format!("g = {}", map.protocol.g), map)], &comps, sets);
            std::fs::write(out.join("texture.svg"), svg)?;
            names.push("texture.svg".into());
        }
        (2, _) => {
            let stride = (map.grid.n[0] / 12).max(1);
            let svg = heatmap_2d(map, map.quench_component, sets, stride);
            std::fs::write(out.join("texture.svg"), svg)?;
            names.push("texture.svg".into());
        }
        _ => {}
    }
    Ok(names)
}

/// Re-analyzes a saved map and writes `detect_report.json` next to `out`.
pub fn detect_file(map_path: &Path, tol_sis: f64, out: &Path) -> Result<Detection, Error> {
    let map = crate::io::read_map(map_path)?;
    std::fs::create_dir_all(out)?;
    let d = detect(&map, tol_sis)?;
    write_json(&out.join("detect_report.json"), &d)?;
    write_json(&out.join("zero_sets.json"), &d.sets)?;
    Ok(d)
}

/// Figures for saved maps: one overlaid line plot for 1D maps, one heatmap
/// per 2D map or cross-section.
pub fn plot_files(map_paths: &[PathBuf], tol_sis: f64, out: &Path) -> Result<Vec<String>, Error> {
    std::fs::create_dir_all(out)?;
    let maps = map_paths.iter().map(|p| crate::io::read_map(p)).collect::<Result<Vec<_>, _>>()?;
    let mut names = Vec::new();
    let ones: Vec<(String, &SpinTextureMap<f64>)> = maps
        .iter()
        .filter(|m| m.grid.dim == 1)
        .map(|m| {
            let label = match m.protocol.kind {
                ProtocolKind::Coulomb => format!("g = {}", m.protocol.g),
                ProtocolKind::Linear => format!("beta = {}", m.protocol.beta),
            };
            (label, m)
        })
        .collect();
    if let Some((_, first)) = ones.first() {
        let sets = find_zero_sets(first, tol_sis)?;
        let comps: Vec<usize> = (0..first.n_components).filter(|&c| c != 1).collect();
        std::fs::write(out.join("texture_1d.svg"), line_plot_1d(&ones, &comps, &sets))?;
        names.push("texture_1d.svg".to_string());
    }
    for (i, m) in maps.iter().enumerate().filter(|(_, m)| m.grid.dim == 2) {
        let sets = find_zero_sets(m, tol_sis)?;
        let comp = if m.slice.is_some() { 3 } else { m.quench_component };
        let stride = if m.slice.is_some() { 0 } else { (m.grid.n[0] / 12).max(1) };
        let name = format!("texture_2d_{i}.svg");
        std::fs::write(out.join(&name), heatmap_2d(m, comp, &sets, stride))?;
        names.push(name);
    }
    Ok(names)
}
