use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::lz::{Axis, LzParams};
use crate::models::{BandField, BzGrid, ModelKind, ModelParams};
use crate::scan::{Method, ScanOptions, Slice};
use crate::tdse::{default_coulomb_start, FourLevelStart, PointField, ProtocolKind, QuenchProtocol};
use crate::topo::DEFAULT_TOL_SIS;
use crate::Error;

/// One experiment: model, protocol, sampling, detection and output settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Reserved; every stage of the pipeline is deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    pub protocol: ProtocolSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub scan: ScanSpec,
    #[serde(default)]
    pub detect: DetectSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single: Option<SingleSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub slices: Vec<SliceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default)]
    pub quench_axis: Axis,
    #[serde(default)]
    pub params: ModelParams<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    #[serde(default)]
    pub g: f64,
    #[serde(default)]
    pub beta: f64,
    /// Coulomb: defaults to a start time small enough for the closed form to
    /// hold to `1e-4`. Linear: required (negative).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    /// Coulomb: required. Linear: defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_quench_end: Option<f64>,
    /// Length of the averaging window after the quench.
    pub window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Points per axis.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub four_level_start: FourLevelStart,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default = "default_failure_fraction")]
    pub max_failure_fraction: f64,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_failure_fraction() -> f64 {
    1e-3
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec {
            method: Method::Auto,
            tol: default_tol(),
            four_level_start: FourLevelStart::Mixed,
            threads: None,
            max_failure_fraction: default_failure_fraction(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectSpec {
    #[serde(default = "default_tol_sis")]
    pub tol_sis: f64,
}

fn default_tol_sis() -> f64 {
    DEFAULT_TOL_SIS
}

impl Default for DetectSpec {
    fn default() -> Self {
        DetectSpec { tol_sis: DEFAULT_TOL_SIS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "yes")]
    pub plots: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_dir(), plots: true }
    }
}

/// A single quench: either a canonical Landau–Zener field `(ε, θ, φ)`
/// quenched along `z`, or the model field at momentum `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<f64>>,
    /// Values of `g` to run; defaults to the protocol's `g`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub g_values: Vec<f64>,
    #[serde(default = "yes")]
    pub trajectory: bool,
    #[serde(default = "default_spp")]
    pub samples_per_period: usize,
}

fn default_spp() -> usize {
    32
}

/// A cross-section `k[axis] = value` of a 3D model on an `n × n` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceSpec {
    pub axis: Axis,
    pub value: f64,
    pub n: usize,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, Error> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| config_err(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let s = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn to_toml_string(&self) -> Result<String, Error> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    pub fn band_field(&self) -> Result<BandField<f64>, Error> {
        let m = self.model.as_ref().ok_or_else(|| config_err("missing [model] section"))?;
        let f = BandField::new(m.kind, m.params, m.quench_axis)?;
        f.check_gap()?;
        Ok(f)
    }

    pub fn bz_grid(&self) -> Result<BzGrid, Error> {
        let m = self.model.as_ref().ok_or_else(|| config_err("missing [model] section"))?;
        let g = self.grid.as_ref().ok_or_else(|| config_err("missing [grid] section"))?;
        BzGrid::new(m.kind.dim(), g.n).map_err(|e| config_err(e.to_string()))
    }

    /// Protocol with quench strength `g`; `eps_max` bounds the post-quench
    /// field and sets the default Coulomb start time.
    pub fn quench_protocol(&self, g: f64, eps_max: f64) -> Result<QuenchProtocol<f64>, Error> {
        let p = &self.protocol;
        let proto = match p.kind {
            ProtocolKind::Coulomb => {
                let t_end = p.t_quench_end.ok_or_else(|| config_err("Coulomb protocol needs t_quench_end"))?;
                let t_start = p.t_start.unwrap_or_else(|| default_coulomb_start(g, eps_max));
                QuenchProtocol::coulomb(g, t_start, t_end, p.window)?
            }
            ProtocolKind::Linear => {
                let t_start = p.t_start.ok_or_else(|| config_err("linear protocol needs t_start"))?;
                let t_end = p.t_quench_end.unwrap_or(0.0);
                let proto = QuenchProtocol {
                    kind: ProtocolKind::Linear,
                    g: 0.0,
                    beta: p.beta,
                    t_start,
                    t_quench_end: t_end,
                    t_avg_begin: t_end,
                    t_avg_end: t_end + p.window,
                };
                proto.validate()?;
                proto
            }
        };
        Ok(proto)
    }

    pub fn scan_options(&self) -> ScanOptions<f64> {
        ScanOptions {
            tol: self.scan.tol,
            four_level_start: self.scan.four_level_start,
            threads: self.scan.threads,
            max_failure_fraction: self.scan.max_failure_fraction,
        }
    }

    pub fn slices(&self) -> Vec<(Slice<f64>, usize)> {
        self.slices.iter().map(|s| (Slice { axis: s.axis.index(), value: s.value }, s.n)).collect()
    }

    /// Values of `g` for `single` runs.
    pub fn g_values(&self) -> Vec<f64> {
        match &self.single {
            Some(s) if !s.g_values.is_empty() => s.g_values.clone(),
            _ => vec![self.protocol.g],
        }
    }

    /// Static field of a `single` run.
    pub fn single_field(&self) -> Result<PointField<f64>, Error> {
        let s = self.single.as_ref().ok_or_else(|| config_err("missing [single] section"))?;
        match (&s.k, s.epsilon, s.theta) {
            (Some(k), None, None) => {
                let f = self.band_field()?;
                if k.len() != f.dim() {
                    return Err(config_err(format!("single.k needs {} components, got {}", f.dim(), k.len())));
                }
                let pf = f.at(k);
                if !(pf.post_norm() > 0.0) {
                    return Err(config_err("post-quench field vanishes at single.k"));
                }
                Ok(pf)
            }
            (None, Some(eps), Some(theta)) => {
                let p = LzParams::new(0.0, eps, theta, s.phi.unwrap_or(0.0))?;
                Ok(PointField::from_lz(&p))
            }
            _ => Err(config_err("[single] needs either k or epsilon and theta")),
        }
    }

    /// Full validation, including gap closing of the post-quench model.
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.scan.tol >= 1e-12 && self.scan.tol <= 1e-6) {
            return Err(config_err(format!("scan.tol must lie in [1e-12, 1e-6], got {}", self.scan.tol)));
        }
        if !(self.detect.tol_sis > 0.0 && self.detect.tol_sis <= 0.2) {
            return Err(config_err(format!("detect.tol_sis must lie in (0, 0.2], got {}", self.detect.tol_sis)));
        }
        if !(0.0..1.0).contains(&self.scan.max_failure_fraction) {
            return Err(config_err("scan.max_failure_fraction must lie in [0, 1)"));
        }
        if self.scan.threads == Some(0) {
            return Err(config_err("scan.threads must be >= 1"));
        }
        if self.protocol.kind == ProtocolKind::Coulomb && !(self.protocol.g >= 0.0 && self.protocol.g.is_finite()) {
            return Err(config_err(format!("protocol.g must be >= 0, got {}", self.protocol.g)));
        }
        let eps = match (&self.model, &self.single) {
            (Some(_), _) => {
                let f = self.band_field()?;
                field_bound(&f)
            }
            (None, Some(s)) => s.epsilon.unwrap_or(1.0),
            (None, None) => return Err(config_err("config needs a [model] or a [single] section")),
        };
        for g in self.g_values() {
            self.quench_protocol(g, eps)?;
        }
        if self.single.is_some() {
            self.single_field()?;
        }
        if self.grid.is_some() {
            self.bz_grid()?;
        }
        for s in &self.slices {
            if self.model.as_ref().map(|m| m.kind.dim()) != Some(3) {
                return Err(config_err("slices are only defined for 3D models"));
            }
            if s.n < 4 {
                return Err(config_err("slice grids need at least 4 points per axis"));
            }
        }
        Ok(())
    }
}

/// Upper bound on `|h(k)|` of the post-quench model.
pub fn field_bound(f: &BandField<f64>) -> f64 {
    let p = &f.params;
    let so = p.t_so.max(p.t_so_x).max(p.t_so_y);
    p.m_x.abs() + p.m_y.abs() + p.m_z.abs() + p.t0 * f.dim() as f64 + so * (f.dim() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    const QAH: &str = r#"
[model]
kind = "qah2d"
quench_axis = "z"
[model.params]
m_z = 1.0

[protocol]
kind = "coulomb"
g = 5.0
t_quench_end = 1000.0
window = 200.0

[grid]
n = 101
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml_str(QAH).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.model.as_ref().unwrap().params.t_so_x, 0.2);
        assert_eq!(cfg.detect.tol_sis, 0.02);
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn gap_closing_is_rejected() {
        let s = QAH.replace("m_z = 1.0", "m_z = 2.0");
        let cfg = ExperimentConfig::from_toml_str(&s).unwrap();
        let e = cfg.validate().unwrap_err();
        assert!(e.to_string().contains("gap closes"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let s = QAH.replace("window = 200.0", "window = 200.0\nspeed = 3");
        assert!(matches!(ExperimentConfig::from_toml_str(&s), Err(Error::Config(_))));
    }

    #[test]
    fn single_point_from_angles() {
        let s = r#"
[protocol]
kind = "coulomb"
t_quench_end = 2000.0
window = 100.0
[single]
epsilon = 2.0
theta = 1.0471975511965976
g_values = [0.0, 0.5, 1.0]
"#;
        let cfg = ExperimentConfig::from_toml_str(s).unwrap();
        cfg.validate().unwrap();
        let f = cfg.single_field().unwrap();
        assert!((f.post_norm() - 2.0).abs() < 1e-15);
        assert_eq!(cfg.g_values().len(), 3);
    }
}
