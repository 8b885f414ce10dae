//! Brillouin-zone sweeps producing time-averaged spin-texture maps.
//!
//! Every grid point is solved independently (closed form for two-band
//! Coulomb quenches, numerical integration otherwise) and written to its own
//! slot, so the result does not depend on how the work is scheduled.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lz::probability_from_cos;
use crate::models::{BandField, BzGrid, ModelError};
use crate::real::{lit, to_f64, Real};
use crate::tdse::{
    averaged_spin_numeric, FourLevelStart, InitialState, PointField, ProtocolKind, QuenchProtocol, TdseError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Numeric,
    #[default]
    Auto,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analytic" => Ok(Method::Analytic),
            "numeric" => Ok(Method::Numeric),
            "auto" => Ok(Method::Auto),
            o => Err(format!("unknown method '{o}' (expected analytic, numeric or auto)")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Analytic => "analytic",
            Method::Numeric => "numeric",
            Method::Auto => "auto",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScanError {
    #[error("analytic method needs a two-band model with the Coulomb protocol")]
    AnalyticUnavailable,
    #[error("{failed} of {total} grid points failed; first: {first}")]
    TooManyFailures { failed: usize, total: usize, first: String, failures: Vec<PointFailure> },
    #[error("grid dimension {grid} does not match the model dimension {model}")]
    DimensionMismatch { grid: usize, model: usize },
    #[error("maps differ in shape or component count")]
    ShapeMismatch,
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Tdse(#[from] TdseError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub index: usize,
    pub multi_index: Vec<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions<T> {
    /// Relative tolerance of numerical integration.
    pub tol: T,
    pub four_level_start: FourLevelStart,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Largest tolerated fraction of failed points.
    pub max_failure_fraction: f64,
}

impl<T: Real> Default for ScanOptions<T> {
    fn default() -> Self {
        ScanOptions {
            tol: lit(1e-10),
            four_level_start: FourLevelStart::Mixed,
            threads: None,
            max_failure_fraction: 1e-3,
        }
    }
}

/// A plane through a 3D Brillouin zone holding `axis` fixed at `value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slice<T> {
    pub axis: usize,
    pub value: T,
}

/// Time-averaged `⟨γ_i⟩` at every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinTextureMap<T> {
    pub grid: BzGrid,
    /// Row-major, `n_components` entries per point.
    pub values: Vec<T>,
    pub n_components: usize,
    pub quench_component: usize,
    pub method: Method,
    pub protocol: QuenchProtocol<T>,
    pub model: BandField<T>,
    pub slice: Option<Slice<T>>,
    /// Points whose solve failed (stored as NaN).
    pub failures: Vec<PointFailure>,
}

impl<T: Real> SpinTextureMap<T> {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn value(&self, idx: usize) -> &[T] {
        &self.values[idx * self.n_components..(idx + 1) * self.n_components]
    }

    pub fn quench_value(&self, idx: usize) -> T {
        self.values[idx * self.n_components + self.quench_component]
    }

    /// Model momentum of a grid point, with the slice coordinate inserted.
    pub fn momentum(&self, idx: usize) -> Vec<T> {
        let k = self.grid.point::<T>(idx);
        let mut v: Vec<T> = k[..self.grid.dim].to_vec();
        if let Some(s) = self.slice {
            v.insert(s.axis, s.value);
        }
        v
    }

    /// Largest `|⟨γ_i⟩|` over the map.
    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &x| if x.is_nan() { a } else { a.max(x.abs()) })
    }
}

fn analytic_point<T: Real>(field: &PointField<T>, g: T) -> Result<[T; 4], String> {
    let n = field.post_norm();
    if !(n > T::zero() && n.is_finite()) {
        return Err("post-quench field vanishes".into());
    }
    let c = field.h[field.quench] / n;
    let p = probability_from_cos(g, c);
    let amp = -(T::one() - p - p) / n;
    Ok(field.h.map(|x| x * amp))
}

fn resolve<T: Real>(model: &BandField<T>, protocol: &QuenchProtocol<T>, method: Method) -> Result<Method, ScanError> {
    let analytic_ok = model.bands() == 2 && protocol.kind == ProtocolKind::Coulomb;
    match method {
        Method::Analytic if !analytic_ok => Err(ScanError::AnalyticUnavailable),
        Method::Auto => Ok(if analytic_ok { Method::Analytic } else { Method::Numeric }),
        m => Ok(m),
    }
}

fn with_pool<R: Send>(threads: Option<usize>, job: impl FnOnce() -> R + Send) -> Result<R, ScanError> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| ScanError::ThreadPool(e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

/// Sweeps the full Brillouin zone of `model`.
pub fn scan<T: Real>(
    model: &BandField<T>,
    grid: &BzGrid,
    protocol: &QuenchProtocol<T>,
    method: Method,
    opts: &ScanOptions<T>,
) -> Result<SpinTextureMap<T>, ScanError> {
    if grid.dim != model.dim() {
        return Err(ScanError::DimensionMismatch { grid: grid.dim, model: model.dim() });
    }
    scan_points(model, grid.clone(), None, protocol, method, opts)
}

/// Sweeps the plane `k[slice.axis] = slice.value` of a 3D model on an
/// `n × n` grid over the two remaining axes.
pub fn scan_slice<T: Real>(
    model: &BandField<T>,
    slice: Slice<T>,
    n: usize,
    protocol: &QuenchProtocol<T>,
    method: Method,
    opts: &ScanOptions<T>,
) -> Result<SpinTextureMap<T>, ScanError> {
    if model.dim() != 3 || slice.axis > 2 {
        return Err(ScanError::DimensionMismatch { grid: 2, model: model.dim() });
    }
    let grid = BzGrid::new(2, n).map_err(|e| ModelError::InvalidParams(e.to_string()))?;
    scan_points(model, grid, Some(slice), protocol, method, opts)
}

fn scan_points<T: Real>(
    model: &BandField<T>,
    grid: BzGrid,
    slice: Option<Slice<T>>,
    protocol: &QuenchProtocol<T>,
    method: Method,
    opts: &ScanOptions<T>,
) -> Result<SpinTextureMap<T>, ScanError> {
    model.validate()?;
    protocol.validate()?;
    let method = resolve(model, protocol, method)?;
    let ncomp = model.n_components();
    let mut map = SpinTextureMap {
        grid,
        values: Vec::new(),
        n_components: ncomp,
        quench_component: model.quench_component(),
        method,
        protocol: *protocol,
        model: *model,
        slice,
        failures: Vec::new(),
    };
    let total = map.len();
    let fields: Vec<PointField<T>> = (0..total).map(|i| model.at(&map.momentum(i))).collect();
    if method == Method::Numeric {
        // the window must hold ten periods of the slowest precession on the grid
        let min_norm =
            fields.iter().map(|f| f.post_norm()).filter(|n| *n > T::zero()).fold(T::infinity(), |a, b| a.min(b));
        if min_norm.is_finite() {
            let required = T::PI() / min_norm * lit(10.0);
            let len = protocol.t_avg_end - protocol.t_avg_begin;
            if len < required {
                return Err(TdseError::WindowTooShort { required: to_f64(required), got: to_f64(len) }.into());
            }
        }
    }
    let init: InitialState<T> = opts.four_level_start.into();
    let tol = opts.tol;
    let solve = |f: &PointField<T>| -> Result<[T; 4], String> {
        match method {
            Method::Analytic => analytic_point(f, protocol.g),
            _ => averaged_spin_numeric(protocol, f, &init, tol).map_err(|e| e.to_string()),
        }
    };
    let results: Vec<Result<[T; 4], String>> = with_pool(opts.threads, || fields.par_iter().map(solve).collect())?;
    let mut values = Vec::with_capacity(total * ncomp);
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => values.extend_from_slice(&v[..ncomp]),
            Err(message) => {
                values.extend(std::iter::repeat(T::nan()).take(ncomp));
                let m = map.grid.unflatten(i);
                failures.push(PointFailure { index: i, multi_index: m[..map.grid.dim].to_vec(), message });
            }
        }
    }
    if !failures.is_empty() && failures.len() as f64 > opts.max_failure_fraction * total as f64 {
        let first = format!("point {:?}: {}", failures[0].multi_index, failures[0].message);
        return Err(ScanError::TooManyFailures { failed: failures.len(), total, first, failures });
    }
    map.values = values;
    map.failures = failures;
    Ok(map)
}

/// Componentwise residuals between two maps of the same grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub max: f64,
    pub mean: f64,
    pub max_per_component: Vec<f64>,
    /// Flat index of the largest residual.
    pub worst_index: usize,
    pub points: usize,
}

pub fn residuals<T: Real>(a: &SpinTextureMap<T>, b: &SpinTextureMap<T>) -> Result<ResidualStats, ScanError> {
    if a.grid != b.grid || a.n_components != b.n_components {
        return Err(ScanError::ShapeMismatch);
    }
    let d = a.n_components;
    let mut max_c = vec![0.0f64; d];
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut worst = (0.0f64, 0usize);
    for i in 0..a.len() {
        for c in 0..d {
            let r = to_f64((a.value(i)[c] - b.value(i)[c]).abs());
            if r.is_nan() {
                continue;
            }
            max_c[c] = max_c[c].max(r);
            sum += r;
            count += 1;
            if r > worst.0 {
                worst = (r, i);
            }
        }
    }
    Ok(ResidualStats {
        max: worst.0,
        mean: if count > 0 { sum / count as f64 } else { 0.0 },
        max_per_component: max_c,
        worst_index: worst.1,
        points: a.len(),
    })
}

/// Scans `model` both analytically and numerically and compares the maps.
pub fn compare_methods<T: Real>(
    model: &BandField<T>,
    grid: &BzGrid,
    protocol: &QuenchProtocol<T>,
    opts: &ScanOptions<T>,
) -> Result<ResidualStats, ScanError> {
    let a = scan(model, grid, protocol, Method::Analytic, opts)?;
    let n = scan(model, grid, protocol, Method::Numeric, opts)?;
    residuals(&a, &n)
}
