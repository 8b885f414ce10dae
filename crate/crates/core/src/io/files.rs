use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::models::{BandField, BzGrid};
use crate::real::{to_f64, Real};
use crate::scan::{Method, PointFailure, Slice, SpinTextureMap};
use crate::tdse::{QuenchProtocol, TrajectorySample};
use crate::Error;

const K_NAMES: [&str; 3] = ["k_x", "k_y", "k_z"];

/// Formats with 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

/// Everything about a map except its values, stored next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMeta {
    pub grid: BzGrid,
    pub n_components: usize,
    pub quench_component: usize,
    pub method: Method,
    pub protocol: QuenchProtocol<f64>,
    pub model: BandField<f64>,
    #[serde(default)]
    pub slice: Option<Slice<f64>>,
    #[serde(default)]
    pub failures: Vec<PointFailure>,
}

/// Path of the metadata file belonging to `csv`.
pub fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

fn cast_map<T: Real>(map: &SpinTextureMap<T>) -> SpinTextureMap<f64> {
    let p = &map.protocol;
    let m = &map.model;
    let mp = &m.params;
    SpinTextureMap {
        grid: map.grid.clone(),
        values: map.values.iter().map(|&v| to_f64(v)).collect(),
        n_components: map.n_components,
        quench_component: map.quench_component,
        method: map.method,
        protocol: QuenchProtocol {
            kind: p.kind,
            g: to_f64(p.g),
            beta: to_f64(p.beta),
            t_start: to_f64(p.t_start),
            t_quench_end: to_f64(p.t_quench_end),
            t_avg_begin: to_f64(p.t_avg_begin),
            t_avg_end: to_f64(p.t_avg_end),
        },
        model: BandField {
            kind: m.kind,
            quench_axis: m.quench_axis,
            params: crate::models::ModelParams {
                t0: to_f64(mp.t0),
                t_so: to_f64(mp.t_so),
                t_so_x: to_f64(mp.t_so_x),
                t_so_y: to_f64(mp.t_so_y),
                m_x: to_f64(mp.m_x),
                m_y: to_f64(mp.m_y),
                m_z: to_f64(mp.m_z),
            },
        },
        slice: map.slice.map(|s| Slice { axis: s.axis, value: to_f64(s.value) }),
        failures: map.failures.clone(),
    }
}

/// Writes `map` as CSV (`k_x[,k_y[,k_z]],s_avg_0..,method`) plus a
/// `.meta.json` sidecar.
pub fn write_map<T: Real>(map: &SpinTextureMap<T>, path: &Path) -> Result<(), Error> {
    let map = cast_map(map);
    let dim = map.model.dim();
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = K_NAMES[..dim].iter().map(|s| s.to_string()).collect();
    header.extend((0..map.n_components).map(|i| format!("s_avg_{i}")));
    header.push("method".into());
    w.write_record(&header)?;
    let method = map.method.to_string();
    for i in 0..map.len() {
        let mut row: Vec<String> = map.momentum(i).iter().map(|&k| fmt_num(k)).collect();
        row.extend(map.value(i).iter().map(|&v| fmt_num(v)));
        row.push(method.clone());
        w.write_record(&row)?;
    }
    w.flush()?;
    let meta = MapMeta {
        grid: map.grid.clone(),
        n_components: map.n_components,
        quench_component: map.quench_component,
        method: map.method,
        protocol: map.protocol,
        model: map.model,
        slice: map.slice,
        failures: map.failures.clone(),
    };
    write_json(&meta_path(path), &meta)
}

/// Reads a map written by [`write_map`].
pub fn read_map(path: &Path) -> Result<SpinTextureMap<f64>, Error> {
    let meta_file = meta_path(path);
    let meta: MapMeta = serde_json::from_reader(
        File::open(&meta_file).map_err(|e| Error::Io(format!("{}: {e}", meta_file.display())))?,
    )?;
    let dim = meta.model.dim();
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let expected = dim + meta.n_components + 1;
    if header.len() != expected || &header[0] != "k_x" || &header[expected - 1] != "method" {
        return Err(Error::Format(format!("{}: unexpected header {:?}", path.display(), header)));
    }
    let mut values = Vec::with_capacity(meta.grid.len() * meta.n_components);
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec?;
        for j in dim..dim + meta.n_components {
            let v: f64 = rec[j]
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("row {}: bad number '{}'", rows + 2, &rec[j])))?;
            values.push(v);
        }
        rows += 1;
    }
    if rows != meta.grid.len() {
        return Err(Error::Format(format!("{}: expected {} rows, found {rows}", path.display(), meta.grid.len())));
    }
    Ok(SpinTextureMap {
        grid: meta.grid,
        values,
        n_components: meta.n_components,
        quench_component: meta.quench_component,
        method: meta.method,
        protocol: meta.protocol,
        model: meta.model,
        slice: meta.slice,
        failures: meta.failures,
    })
}

/// Writes a trajectory as CSV: `t`, real and imaginary parts of every state
/// component, then the spin components.
pub fn write_trajectory<T: Real>(samples: &[TrajectorySample<T>], path: &Path) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path)?;
    let Some(first) = samples.first() else {
        w.write_record(["t"])?;
        w.flush()?;
        return Ok(());
    };
    let members = first.state.len();
    let mut header = vec!["t".to_string()];
    for (m, s) in first.state.iter().enumerate() {
        for i in 0..s.len() {
            let tag = if members == 1 { format!("{i}") } else { format!("{m}_{i}") };
            header.push(format!("re_psi{tag}"));
            header.push(format!("im_psi{tag}"));
        }
    }
    header.extend((0..first.spin.len()).map(|i| format!("s_{i}")));
    w.write_record(&header)?;
    for s in samples {
        let mut row = vec![fmt_num(to_f64(s.t))];
        for st in &s.state {
            for c in st {
                row.push(fmt_num(to_f64(c.re)));
                row.push(fmt_num(to_f64(c.im)));
            }
        }
        row.extend(s.spin.iter().map(|&x| fmt_num(to_f64(x))));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the `t` column and spin columns of a trajectory CSV.
pub fn read_trajectory_spin(path: &Path) -> Result<Vec<(f64, Vec<f64>)>, Error> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let spin_cols: Vec<usize> =
        header.iter().enumerate().filter(|(_, h)| h.starts_with("s_")).map(|(i, _)| i).collect();
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num =
            |j: usize| rec[j].trim().parse::<f64>().map_err(|_| Error::Format(format!("bad number '{}'", &rec[j])));
        let t = num(0)?;
        let s = spin_cols.iter().map(|&j| num(j)).collect::<Result<Vec<_>, _>>()?;
        out.push((t, s));
    }
    Ok(out)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), Error> {
    let f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).map_err(|e| Error::Io(e.to_string()))?;
    w.flush().map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

pub fn read_json<S: for<'de> Deserialize<'de>>(path: &Path) -> Result<S, Error> {
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
}
