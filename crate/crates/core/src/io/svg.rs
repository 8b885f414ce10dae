//! Minimal SVG figures: line plots, heatmaps with zero-set overlays.

use std::f64::consts::PI;
use std::fmt::Write;

use crate::scan::SpinTextureMap;
use crate::topo::{ZeroKind, ZeroSet};

const W: f64 = 640.0;
const PANEL_H: f64 = 220.0;
const M_L: f64 = 60.0;
const M_R: f64 = 20.0;
const M_T: f64 = 30.0;
const M_B: f64 = 40.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const K_LABELS: [&str; 3] = ["k_x", "k_y", "k_z"];

/// A data series for [`xy_plot`].
pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
    /// Draw markers instead of a line.
    pub points: bool,
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.x0 + (x - self.xr.0) / (self.xr.1 - self.xr.0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.yr.0) / (self.yr.1 - self.yr.0) * self.h
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let _ = writeln!(
            out,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#000"/>"##,
            self.x0, self.y0, self.w, self.h
        );
        for i in 0..=4 {
            let fx = self.xr.0 + (self.xr.1 - self.xr.0) * i as f64 / 4.0;
            let fy = self.yr.0 + (self.yr.1 - self.yr.0) * i as f64 / 4.0;
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#,
                self.px(fx),
                self.y0 + self.h + 14.0,
                tick(fx)
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#,
                self.x0 - 4.0,
                self.py(fy) + 3.0,
                tick(fy)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{}</text>"#,
            self.x0 + self.w / 2.0,
            self.y0 + self.h + 30.0,
            xlabel
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
            self.x0 - 42.0,
            self.y0 + self.h / 2.0,
            self.x0 - 42.0,
            self.y0 + self.h / 2.0,
            ylabel
        );
    }
}

fn tick(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn open(height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {W:.0} {height:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n"
    )
}

fn polyline(out: &mut String, pts: &[(f64, f64)], color: &str, dash: Option<&str>, width: f64) {
    if pts.len() < 2 {
        return;
    }
    let mut d = String::new();
    for (x, y) in pts {
        let _ = write!(d, "{x:.2},{y:.2} ");
    }
    let dash = dash.map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"{dash}/>"#,
        d.trim_end()
    );
}

/// Line plot of several series on one set of axes.
pub fn xy_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for (&x, &y) in s.x.iter().zip(s.y) {
            if x.is_finite() && y.is_finite() {
                xmin = xmin.min(x);
                xmax = xmax.max(x);
                ymin = ymin.min(y);
                ymax = ymax.max(y);
            }
        }
    }
    if !(xmax > xmin) {
        xmax = xmin + 1.0;
    }
    if !(ymax > ymin) {
        ymax = ymin + 1.0;
    }
    let pad = 0.05 * (ymax - ymin);
    let h = PANEL_H + M_T + M_B;
    let f = Frame { x0: M_L, y0: M_T, w: W - M_L - M_R, h: PANEL_H, xr: (xmin, xmax), yr: (ymin - pad, ymax + pad) };
    let mut out = open(h);
    let _ = writeln!(out, r#"<text x="{:.1}" y="18" font-size="13" text-anchor="middle">{title}</text>"#, W / 2.0);
    f.axes(&mut out, xlabel, ylabel);
    for (i, s) in series.iter().enumerate() {
        let c = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s.x.iter().zip(s.y).map(|(&x, &y)| (f.px(x), f.py(y))).collect();
        if s.points {
            for (x, y) in &pts {
                let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{c}"/>"#);
            }
        } else {
            polyline(&mut out, &pts, c, None, 1.5);
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" fill="{c}">{}</text>"#,
            f.x0 + f.w - 120.0,
            f.y0 + 14.0 + 13.0 * i as f64,
            s.label
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One panel per requested component, each with one curve per map, and the
/// zero sets of the first map drawn as vertical lines (BIS dashed black, SIS
/// gray).
pub fn line_plot_1d(maps: &[(String, &SpinTextureMap<f64>)], components: &[usize], sets: &[ZeroSet]) -> String {
    let h = M_T + components.len() as f64 * (PANEL_H + M_B);
    let mut out = open(h);
    for (p, &c) in components.iter().enumerate() {
        let f = Frame {
            x0: M_L,
            y0: M_T + p as f64 * (PANEL_H + M_B),
            w: W - M_L - M_R,
            h: PANEL_H - 10.0,
            xr: (-PI, PI),
            yr: (-1.05, 1.05),
        };
        f.axes(&mut out, "k", &format!("avg s_{c}"));
        for s in sets {
            let (color, dash) = match s.kind {
                ZeroKind::Bis => ("#000", "5,4"),
                ZeroKind::Sis => ("#999", "2,2"),
                ZeroKind::Ambiguous => ("#f0a", "1,3"),
            };
            for pt in &s.points {
                let x = f.px(pt[0]);
                polyline(&mut out, &[(x, f.y0), (x, f.y0 + f.h)], color, Some(dash), 1.0);
            }
        }
        for (i, (label, m)) in maps.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<(f64, f64)> = (0..m.len()).map(|j| (f.px(m.momentum(j)[0]), f.py(m.value(j)[c]))).collect();
            polyline(&mut out, &pts, color, None, 1.5);
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="11" fill="{color}">{label}</text>"#,
                f.x0 + f.w - 110.0,
                f.y0 + 14.0 + 13.0 * i as f64
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn diverging(v: f64) -> String {
    let t = v.clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 {
        (255.0, 255.0 * (1.0 - t), 255.0 * (1.0 - t))
    } else {
        (255.0 * (1.0 + t), 255.0 * (1.0 + t), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

/// Heatmap of `component` over a 2D map or cross-section, with BIS loops
/// (dashed black), SIS loops (dashed pink) and arrows of the reversed
/// transverse texture on every `arrow_stride`-th BIS point.
pub fn heatmap_2d(map: &SpinTextureMap<f64>, component: usize, sets: &[ZeroSet], arrow_stride: usize) -> String {
    let side = W - M_L - M_R;
    let h = M_T + side + M_B;
    let mut out = open(h);
    let axes: Vec<usize> = match map.slice {
        Some(s) => (0..3).filter(|&a| a != s.axis).collect(),
        None => vec![0, 1],
    };
    let f = Frame { x0: M_L, y0: M_T, w: side, h: side, xr: (-PI, PI), yr: (-PI, PI) };
    let (nx, ny) = (map.grid.n[0], map.grid.n[1]);
    let (cw, ch) = (side / nx as f64, side / ny as f64);
    for idx in 0..map.len() {
        let m = map.grid.unflatten(idx);
        let v = map.value(idx)[component];
        let x = f.x0 + m[0] as f64 * cw;
        let y = f.y0 + side - (m[1] + 1) as f64 * ch;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            cw + 0.3,
            ch + 0.3,
            diverging(v)
        );
    }
    let title = match map.slice {
        Some(s) => format!("avg s_{component}, {} = {:.3}", K_LABELS[s.axis], s.value),
        None => format!("avg s_{component}"),
    };
    let _ = writeln!(out, r#"<text x="{:.1}" y="18" font-size="13" text-anchor="middle">{title}</text>"#, W / 2.0);
    f.axes(&mut out, K_LABELS[axes[0]], K_LABELS[axes[1]]);
    let transverse: Vec<usize> =
        if map.n_components == 4 { vec![axes[0] + 1, axes[1] + 1] } else { vec![axes[0], axes[1]] };
    for s in sets.iter().filter(|s| s.triangles.is_empty()) {
        let (color, dash) = match s.kind {
            ZeroKind::Bis => ("#000", "6,4"),
            ZeroKind::Sis => ("#e377c2", "6,4"),
            ZeroKind::Ambiguous => ("#f0a", "2,3"),
        };
        // split where a loop wraps around the zone
        let mut run: Vec<(f64, f64)> = Vec::new();
        let pts: Vec<(f64, f64)> = s.points.iter().map(|p| (p[axes[0]], p[axes[1]])).collect();
        for (i, &(x, y)) in pts.iter().chain(pts.first()).enumerate() {
            if let Some((px, py)) = (i > 0).then(|| pts[i - 1]) {
                if (x - px).abs() > PI || (y - py).abs() > PI {
                    polyline(&mut out, &run, color, Some(dash), 1.5);
                    run.clear();
                }
            }
            run.push((f.px(x), f.py(y)));
        }
        polyline(&mut out, &run, color, Some(dash), 1.5);
        if s.kind == ZeroKind::Bis && arrow_stride > 0 {
            for (p, t) in s.points.iter().zip(&s.texture).step_by(arrow_stride) {
                let (ax, ay) = (-t[transverse[0]], -t[transverse[1]]);
                let (x, y) = (f.px(p[axes[0]]), f.py(p[axes[1]]));
                let len = 18.0;
                let (ex, ey) = (x + ax * len, y - ay * len);
                let _ = writeln!(
                    out,
                    r##"<line x1="{x:.2}" y1="{y:.2}" x2="{ex:.2}" y2="{ey:.2}" stroke="#fff" stroke-width="1.8"/><circle cx="{ex:.2}" cy="{ey:.2}" r="2" fill="#fff"/>"##
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xy_plot_is_well_formed() {
        let x = [0.0, 0.5, 1.0];
        let y = [0.0, 0.25, 1.0];
        let svg = xy_plot("P(g)", "g", "P", &[Series { label: "closed form", x: &x, y: &y, points: false }]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("<polyline"));
    }

    #[test]
    fn colormap_endpoints() {
        assert_eq!(diverging(1.0), "#ff0000");
        assert_eq!(diverging(-1.0), "#0000ff");
        assert_eq!(diverging(0.0), "#ffffff");
    }
}
