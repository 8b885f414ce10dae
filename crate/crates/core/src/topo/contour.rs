use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{PI, TAU};

use super::{classify, TopoError, ZeroKind, ZeroSet};
use crate::real::{to_f64, Real};
use crate::scan::SpinTextureMap;

/// A zero of the quench-axis average on the grid edge `key`.
#[derive(Debug, Clone)]
struct Crossing {
    key: (usize, usize),
    pos: Vec<f64>,
    texture: Vec<f64>,
    residual: f64,
    sign: i8,
}

struct View<'a, T> {
    map: &'a SpinTextureMap<T>,
    dk: Vec<f64>,
}

fn wrap_k(x: f64) -> f64 {
    let y = x - TAU * ((x + PI) / TAU).floor();
    if y >= PI {
        y - TAU
    } else {
        y
    }
}

impl<'a, T: Real> View<'a, T> {
    fn new(map: &'a SpinTextureMap<T>) -> Self {
        let dk = (0..map.grid.dim).map(|a| to_f64(map.grid.dk::<T>(a))).collect();
        View { map, dk }
    }

    fn f(&self, idx: usize) -> f64 {
        to_f64(self.map.quench_value(idx))
    }

    fn positive(&self, idx: usize) -> bool {
        self.f(idx) > 0.0
    }

    fn index(&self, base: &[usize], off: &[isize]) -> usize {
        let m: Vec<isize> = base.iter().zip(off).map(|(&b, &o)| b as isize + o).collect();
        self.map.grid.flatten_wrapped(&m)
    }

    /// Zero on the edge between grid points at `base + oa` and `base + ob`.
    fn crossing(&self, base: &[usize], oa: &[isize], ob: &[isize]) -> Crossing {
        let ia = self.index(base, oa);
        let ib = self.index(base, ob);
        let (fa, fb) = (self.f(ia), self.f(ib));
        let t = if fa == fb { 0.5 } else { fa / (fa - fb) };
        let ka = self.map.grid.point::<T>(ia);
        let mut pos: Vec<f64> =
            (0..self.map.grid.dim).map(|a| wrap_k(to_f64(ka[a]) + t * (ob[a] - oa[a]) as f64 * self.dk[a])).collect();
        if let Some(s) = self.map.slice {
            pos.insert(s.axis, to_f64(s.value));
        }
        let va = self.map.value(ia);
        let vb = self.map.value(ib);
        let texture: Vec<f64> = va.iter().zip(vb).map(|(&x, &y)| (1.0 - t) * to_f64(x) + t * to_f64(y)).collect();
        let q = self.map.quench_component;
        let residual = texture.iter().enumerate().filter(|(i, _)| *i != q).fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        // edges are generated with non-negative offset steps, so ob is the upper end when its offsets dominate
        let upper_is_b = ob.iter().zip(oa).all(|(b, a)| b >= a);
        let slope = if upper_is_b { fb - fa } else { fa - fb };
        Crossing {
            key: (ia.min(ib), ia.max(ib)),
            pos,
            texture,
            residual,
            sign: if slope > 0.0 {
                1
            } else if slope < 0.0 {
                -1
            } else {
                0
            },
        }
    }
}

fn build_set(points: Vec<Crossing>, triangles: Vec<[usize; 3]>, closed: bool, tol: f64) -> ZeroSet {
    let residual: Vec<f64> = points.iter().map(|c| c.residual).collect();
    ZeroSet {
        kind: classify(&residual, tol),
        min_grid_index: points.iter().map(|c| c.key.0).min().unwrap_or(0),
        crossing_sign: points.iter().map(|c| c.sign).collect(),
        texture: points.iter().map(|c| c.texture.clone()).collect(),
        points: points.into_iter().map(|c| c.pos).collect(),
        residual_inplane: residual,
        triangles,
        closed,
    }
}

/// Locates and classifies every zero set of the quench-axis average.
///
/// Zeros are found on grid edges by sign change and placed by linear
/// interpolation, as is the texture there. In 1D the BIS points are returned
/// as one set and the SIS points as another; ambiguous points each form their
/// own set. In 2D each set is a closed loop of a triangulated marching-squares
/// contour. In 3D each set is a connected triangulated surface built by
/// marching tetrahedra. Sets are sorted by their smallest grid index.
pub fn find_zero_sets<T: Real>(map: &SpinTextureMap<T>, tol_sis: f64) -> Result<Vec<ZeroSet>, TopoError> {
    if !(tol_sis > 0.0 && tol_sis <= 0.2) {
        return Err(TopoError::BadTolerance(tol_sis));
    }
    let bad = map.values.iter().filter(|v| !v.is_finite()).count();
    if bad > 0 {
        return Err(TopoError::IncompleteMap(bad / map.n_components.max(1) + usize::from(bad % map.n_components != 0)));
    }
    let view = View::new(map);
    let mut sets = match map.grid.dim {
        1 => points_1d(&view, tol_sis),
        2 => loops_2d(&view, tol_sis),
        _ => surfaces_3d(&view, tol_sis),
    };
    sets.sort_by_key(|s| s.min_grid_index);
    Ok(sets)
}

fn points_1d<T: Real>(v: &View<T>, tol: f64) -> Vec<ZeroSet> {
    let n = v.map.grid.n[0];
    let mut bis = Vec::new();
    let mut sis = Vec::new();
    let mut out = Vec::new();
    for j in 0..n {
        let b = (j + 1) % n;
        if v.positive(j) == v.positive(b) {
            continue;
        }
        let c = v.crossing(&[j], &[0], &[1]);
        match classify(&[c.residual], tol) {
            ZeroKind::Bis => bis.push(c),
            ZeroKind::Sis => sis.push(c),
            ZeroKind::Ambiguous => out.push(build_set(vec![c], vec![], false, tol)),
        }
    }
    for group in [bis, sis] {
        if !group.is_empty() {
            out.push(build_set(group, vec![], false, tol));
        }
    }
    out
}

fn loops_2d<T: Real>(v: &View<T>, tol: f64) -> Vec<ZeroSet> {
    let (nx, ny) = (v.map.grid.n[0], v.map.grid.n[1]);
    // counter-clockwise triangles of each cell
    const TRIS: [[[isize; 2]; 3]; 2] = [[[0, 0], [1, 0], [1, 1]], [[0, 0], [1, 1], [0, 1]]];
    let mut crossings: BTreeMap<(usize, usize), Crossing> = BTreeMap::new();
    let mut segments: Vec<((usize, usize), (usize, usize))> = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let base = [i, j];
            for tri in &TRIS {
                let pos: Vec<bool> = tri.iter().map(|o| v.positive(v.index(&base, o))).collect();
                let (mut start, mut end) = (None, None);
                for e in 0..3 {
                    let (a, b) = (e, (e + 1) % 3);
                    if pos[a] == pos[b] {
                        continue;
                    }
                    let c = v.crossing(&base, &tri[a], &tri[b]);
                    let key = c.key;
                    crossings.entry(key).or_insert(c);
                    if pos[a] {
                        start = Some(key);
                    } else {
                        end = Some(key);
                    }
                }
                if let (Some(s), Some(e)) = (start, end) {
                    segments.push((s, e));
                }
            }
        }
    }
    let next: HashMap<(usize, usize), usize> = segments.iter().enumerate().map(|(i, s)| (s.0, i)).collect();
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    for first in 0..segments.len() {
        if used[first] {
            continue;
        }
        let mut pts = Vec::new();
        let mut cur = first;
        let mut closed = false;
        loop {
            used[cur] = true;
            pts.push(crossings[&segments[cur].0].clone());
            match next.get(&segments[cur].1) {
                Some(&n) if n == first => {
                    closed = true;
                    break;
                }
                Some(&n) if !used[n] => cur = n,
                _ => break,
            }
        }
        out.push(build_set(pts, vec![], closed, tol));
    }
    out
}

/// Freudenthal decomposition of the unit cube into six tetrahedra sharing
/// the main diagonal; it tiles the periodic grid consistently.
fn kuhn_tetrahedra() -> Vec<[[isize; 3]; 4]> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    perms
        .iter()
        .map(|p| {
            let mut t = [[0isize; 3]; 4];
            for s in 1..4 {
                t[s] = t[s - 1];
                if s <= 3 {
                    t[s][p[s - 1]] = 1;
                }
            }
            t
        })
        .collect()
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn surfaces_3d<T: Real>(v: &View<T>, tol: f64) -> Vec<ZeroSet> {
    let n = &v.map.grid.n;
    let tets = kuhn_tetrahedra();
    let mut vid: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut verts: Vec<Crossing> = Vec::new();
    let mut tris: Vec<[usize; 3]> = Vec::new();
    for i in 0..n[0] {
        for j in 0..n[1] {
            for l in 0..n[2] {
                let base = [i, j, l];
                for tet in &tets {
                    let pos: Vec<bool> = tet.iter().map(|o| v.positive(v.index(&base, o))).collect();
                    let np = pos.iter().filter(|&&p| p).count();
                    if np == 0 || np == 4 {
                        continue;
                    }
                    let p_idx: Vec<usize> = (0..4).filter(|&s| pos[s]).collect();
                    let n_idx: Vec<usize> = (0..4).filter(|&s| !pos[s]).collect();
                    let edges: Vec<(usize, usize)> = if np == 2 {
                        let (a, b, c, d) = (p_idx[0], p_idx[1], n_idx[0], n_idx[1]);
                        vec![(a, c), (a, d), (b, d), (b, c)]
                    } else {
                        p_idx.iter().flat_map(|&a| n_idx.iter().map(move |&b| (a, b))).collect()
                    };
                    let local = |e: &(usize, usize)| -> ([f64; 3], usize) {
                        let c = v.crossing(&base, &tet[e.0], &tet[e.1]);
                        // edge midpoints fix the orientation; interpolated points can coincide
                        let mut x = [0.0; 3];
                        for a in 0..3 {
                            x[a] = 0.5 * (tet[e.0][a] + tet[e.1][a]) as f64 * v.dk[a];
                        }
                        let key = c.key;
                        let id = *vid.entry(key).or_insert_with(|| {
                            verts.push(c);
                            verts.len() - 1
                        });
                        (x, id)
                    };
                    let q: Vec<([f64; 3], usize)> = edges.iter().map(local).collect();
                    // the surface normal points from the positive vertices toward the negative ones
                    let centroid = |ids: &[usize]| {
                        let mut c = [0.0; 3];
                        for &s in ids {
                            for a in 0..3 {
                                c[a] += tet[s][a] as f64 * v.dk[a] / ids.len() as f64;
                            }
                        }
                        c
                    };
                    let dir = sub(&centroid(&n_idx), &centroid(&p_idx));
                    let mut emit = |a: usize, b: usize, c: usize| {
                        let nrm = cross(&sub(&q[b].0, &q[a].0), &sub(&q[c].0, &q[a].0));
                        let d = nrm[0] * dir[0] + nrm[1] * dir[1] + nrm[2] * dir[2];
                        if d >= 0.0 {
                            tris.push([q[a].1, q[b].1, q[c].1]);
                        } else {
                            tris.push([q[a].1, q[c].1, q[b].1]);
                        }
                    };
                    emit(0, 1, 2);
                    if q.len() == 4 {
                        emit(0, 2, 3);
                    }
                }
            }
        }
    }
    components(verts, tris, tol)
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn components(verts: Vec<Crossing>, tris: Vec<[usize; 3]>, tol: f64) -> Vec<ZeroSet> {
    let mut parent: Vec<usize> = (0..verts.len()).collect();
    for t in &tris {
        for s in 1..3 {
            let (a, b) = (find(&mut parent, t[0]), find(&mut parent, t[s]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, (Vec<usize>, Vec<[usize; 3]>)> = BTreeMap::new();
    for vtx in 0..verts.len() {
        let r = find(&mut parent, vtx);
        groups.entry(r).or_default().0.push(vtx);
    }
    for t in &tris {
        let r = find(&mut parent, t[0]);
        groups.entry(r).or_default().1.push(*t);
    }
    groups
        .into_values()
        .map(|(vs, ts)| {
            let local: HashMap<usize, usize> = vs.iter().enumerate().map(|(i, &g)| (g, i)).collect();
            let ts: Vec<[usize; 3]> = ts.iter().map(|t| [local[&t[0]], local[&t[1]], local[&t[2]]]).collect();
            let closed = is_closed(&ts);
            let pts = vs.iter().map(|&g| verts[g].clone()).collect();
            build_set(pts, ts, closed, tol)
        })
        .collect()
}

/// Every directed edge is matched by exactly one reversed edge.
fn is_closed(tris: &[[usize; 3]]) -> bool {
    let mut count: HashMap<(usize, usize), i32> = HashMap::new();
    for t in tris {
        for e in 0..3 {
            *count.entry((t[e], t[(e + 1) % 3])).or_default() += 1;
        }
    }
    count.iter().all(|(&(a, b), &c)| c == 1 && count.get(&(b, a)) == Some(&1))
}
