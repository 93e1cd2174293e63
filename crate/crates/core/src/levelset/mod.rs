//! Level curves and superlevel components of scalar fields on a chart.

mod components;
mod export;

pub use components::{components_from_samples, superlevel_components, Component, SuperlevelComponents};
pub use export::write_levelset_csv;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{Domain, FieldSamples, ParamGrid, ScalarField, Vec3};
use crate::{Error, Result};

/// Relative node tolerance for the near-critical test.
const NODE_REL_EPS: f64 = 1e-6;
/// Relative gradient tolerance for the near-critical test.
const CRIT_REL_EPS: f64 = 1e-4;

/// Connected piece of a level curve.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Polyline {
    pub params: Vec<(f64, f64)>,
    pub points: Vec<[f64; 3]>,
    /// Weight samples per vertex, `|∇h|` of the extracting field unless replaced.
    pub theta: Vec<f64>,
    /// Closed polylines repeat their first vertex at the end.
    pub closed: bool,
    /// Grid cell index traversed by each segment.
    #[serde(skip)]
    pub cells: Vec<usize>,
}

impl Polyline {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| (Vec3::from(w[1]) - Vec3::from(w[0])).norm()).collect()
    }

    pub fn length(&self) -> f64 {
        self.segment_lengths().iter().sum()
    }

    /// Composite trapezoid of per-vertex samples against arc length.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.segment_lengths().iter().enumerate().map(|(k, ds)| 0.5 * (values[k] + values[k + 1]) * ds).sum()
    }

    /// `∫ θ ds` with the stored weights.
    pub fn theta_mass(&self) -> f64 {
        self.integrate(&self.theta)
    }

    /// Cumulative arc length at each vertex.
    pub fn arclength(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.len());
        let mut acc = 0.0;
        s.push(0.0);
        for ds in self.segment_lengths() {
            acc += ds;
            s.push(acc);
        }
        s
    }

    /// Straight polyline through given samples, used for synthetic one-dimensional sets.
    pub fn synthetic(points: Vec<Vec3>, theta: Vec<f64>, closed: bool) -> Self {
        let n = points.len();
        Polyline {
            params: (0..n).map(|k| (k as f64, 0.0)).collect(),
            points: points.iter().map(|p| [p.x, p.y, p.z]).collect(),
            theta,
            closed,
            cells: vec![0; n.saturating_sub(1)],
        }
    }
}

/// Level set `{field = level}` traced on a parameter grid.
#[derive(Clone, Debug)]
pub struct LevelSet {
    pub field: ScalarField,
    pub level: f64,
    pub grid: ParamGrid,
    pub components: Vec<Polyline>,
}

impl LevelSet {
    pub fn open_arcs(&self) -> impl Iterator<Item = &Polyline> {
        self.components.iter().filter(|p| !p.closed)
    }

    pub fn cycles(&self) -> impl Iterator<Item = &Polyline> {
        self.components.iter().filter(|p| p.closed)
    }

    pub fn has_cycles(&self) -> bool {
        self.components.iter().any(|p| p.closed)
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Per-component `∫ θ ds` with the stored weights.
    pub fn theta_masses(&self) -> Vec<f64> {
        self.components.iter().map(Polyline::theta_mass).collect()
    }

    /// Replaces the weight samples by `w(u, v)`.
    pub fn reweighted<W>(&self, w: W) -> LevelSet
    where
        W: Fn(f64, f64) -> f64 + Sync,
    {
        let mut out = self.clone();
        for p in &mut out.components {
            p.theta = p.params.iter().map(|&(u, v)| w(u, v)).collect();
        }
        out
    }

    /// Restricts the level set to `{f > tau}`, optionally to one labeled component of it.
    ///
    /// Curves are split where they cross `f = tau`; the crossing point is solved on both
    /// equations. Closed curves that never leave the region stay closed.
    pub fn restrict(&self, f: &ScalarField, tau: f64, region: Option<(&SuperlevelComponents, usize)>) -> LevelSet {
        let dom = self.grid.domain;
        let mut pieces = Vec::new();
        for line in &self.components {
            let g: Vec<f64> = line.params.iter().map(|&(u, v)| f.eval(u, v) - tau).collect();
            let n = line.len();
            if g.iter().all(|&x| x > 0.0) {
                pieces.push(line.clone());
                continue;
            }
            // Vertex order to walk; closed curves start at a vertex outside the region.
            let order: Vec<usize> = if line.closed {
                let start = (0..n - 1).find(|&k| g[k] <= 0.0).unwrap_or(0);
                (0..n - 1).map(|k| (start + k) % (n - 1)).chain(std::iter::once(start)).collect()
            } else {
                (0..n).collect()
            };
            let mut cur: Option<Polyline> = None;
            for w in 0..order.len() {
                let k = order[w];
                if g[k] > 0.0 {
                    let c = cur.get_or_insert_with(Polyline::default);
                    if w > 0 {
                        let prev = order[w - 1];
                        if g[prev] <= 0.0 {
                            let q = self.cross_point(f, tau, line.params[prev], line.params[k], g[prev], g[k]);
                            push_vertex(
                                c,
                                &self.field,
                                q,
                                frame(line, prev, &self.field),
                                line.cells.get(prev).copied(),
                            );
                        } else {
                            c.cells.push(line.cells.get(prev).copied().unwrap_or(0));
                        }
                    }
                    push_vertex_raw(c, line, k);
                } else if let Some(mut c) = cur.take() {
                    let prev = order[w - 1];
                    let q = self.cross_point(f, tau, line.params[prev], line.params[k], g[prev], g[k]);
                    push_vertex(&mut c, &self.field, q, frame(line, prev, &self.field), line.cells.get(prev).copied());
                    pieces.push(c);
                }
            }
            if let Some(c) = cur.take() {
                pieces.push(c);
            }
        }
        pieces.retain(|p| p.len() >= 2);
        if let Some((comps, label)) = region {
            pieces.retain(|p| {
                let mid = p.params[p.len() / 2];
                comps.component_at(mid.0, mid.1) == Some(label)
            });
        }
        for p in &mut pieces {
            for q in &mut p.params {
                *q = dom.wrap(q.0, q.1);
            }
        }
        LevelSet { field: self.field.clone(), level: self.level, grid: self.grid, components: pieces }
    }

    /// Point on `{h = t, f = tau}` between two level-curve vertices.
    fn cross_point(&self, f: &ScalarField, tau: f64, a: (f64, f64), b: (f64, f64), ga: f64, gb: f64) -> (f64, f64) {
        let dom = self.grid.domain;
        let b = unwrap_near(&dom, a, b);
        let s = ga / (ga - gb);
        let mut p = (a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1));
        let h = &self.field;
        let t = self.level;
        let start = p;
        let span = dom.distance(a, b).max(1e-300);
        for _ in 0..30 {
            let (hv, hu_, hv_) = h.param_grad(p.0, p.1);
            let (fv, fu_, fv_) = f.param_grad(p.0, p.1);
            let (r1, r2) = (hv - t, fv - tau);
            let det = hu_ * fv_ - hv_ * fu_;
            if det.abs() < 1e-300 {
                return start;
            }
            let du = (r1 * fv_ - r2 * hv_) / det;
            let dv = (hu_ * r2 - fu_ * r1) / det;
            p = (p.0 - du, p.1 - dv);
            if du.abs() + dv.abs() <= 1e-15 * (1.0 + p.0.abs() + p.1.abs()) {
                break;
            }
        }
        if dom.distance(p, start) > 2.0 * span || !p.0.is_finite() || !p.1.is_finite() {
            start
        } else {
            p
        }
    }
}

fn push_vertex_raw(c: &mut Polyline, line: &Polyline, k: usize) {
    c.params.push(line.params[k]);
    c.points.push(line.points[k]);
    c.theta.push(line.theta[k]);
}

/// Offset between the stored (unwrapped) position of vertex `k` and the chart point at its parameters.
fn frame(line: &Polyline, k: usize, h: &ScalarField) -> Vec3 {
    let (u, v) = line.params[k];
    Vec3::from(line.points[k]) - h.surface.point(u, v)
}

fn push_vertex(c: &mut Polyline, h: &ScalarField, q: (f64, f64), offset: Vec3, cell: Option<usize>) {
    let jet = h.surface.jet(q.0, q.1);
    let th = h.gradient_jet(&jet, q.0, q.1).map(|g| g.norm()).unwrap_or(0.0);
    if !c.params.is_empty() {
        c.cells.push(cell.unwrap_or(0));
    }
    c.params.push(q);
    let pos = jet.pos + offset;
    c.points.push([pos.x, pos.y, pos.z]);
    c.theta.push(th);
}

/// Representative of `b` closest to `a` along periodic axes.
fn unwrap_near(dom: &Domain, a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let fix = |x: f64, y: f64, [lo, hi]: [f64; 2], periodic: bool| {
        if !periodic {
            return y;
        }
        let p = hi - lo;
        y - p * ((y - x) / p).round()
    };
    (fix(a.0, b.0, dom.u, dom.periodic_u), fix(a.1, b.1, dom.v, dom.periodic_v))
}

/// Grid edge carrying a level crossing.
#[derive(Clone, Copy, Debug)]
struct EdgeRef {
    a: usize,
    b: usize,
    pa: (f64, f64),
    pb: (f64, f64),
}

struct Edges<'g> {
    grid: &'g ParamGrid,
    offset: usize,
}

impl<'g> Edges<'g> {
    fn new(grid: &'g ParamGrid) -> Self {
        Edges { grid, offset: grid.nodes_v() * grid.nu }
    }

    fn u_edge(&self, i: usize, j: usize) -> usize {
        (j % self.grid.nodes_v()) * self.grid.nu + i
    }

    fn v_edge(&self, i: usize, j: usize) -> usize {
        self.offset + j * self.grid.nodes_u() + (i % self.grid.nodes_u())
    }

    fn endpoints(&self, id: usize) -> EdgeRef {
        let g = self.grid;
        let (i, j, di, dj) = if id < self.offset {
            (id % g.nu, id / g.nu, 1, 0)
        } else {
            let k = id - self.offset;
            (k % g.nodes_u(), k / g.nodes_u(), 0, 1)
        };
        EdgeRef { a: g.node_index(i, j), b: g.node_index(i + di, j + dj), pa: g.node(i, j), pb: g.node(i + di, j + dj) }
    }
}

/// Root of `field − t` on a parameter segment by Illinois false position.
fn edge_root(field: &ScalarField, t: f64, pa: (f64, f64), pb: (f64, f64), fa: f64, fb: f64) -> (f64, f64) {
    let at = |s: f64| (pa.0 + s * (pb.0 - pa.0), pa.1 + s * (pb.1 - pa.1));
    let (mut s0, mut s1) = (0.0f64, 1.0f64);
    let (mut g0, mut g1) = (fa - t, fb - t);
    if g0 == 0.0 {
        return pa;
    }
    if g1 == 0.0 {
        return pb;
    }
    let mut side = 0i8;
    let tol = 1e-14 * (1.0 + t.abs());
    let mut s = s0;
    for _ in 0..100 {
        s = (s0 * g1 - s1 * g0) / (g1 - g0);
        let (u, v) = at(s);
        let g = field.eval(u, v) - t;
        if g.abs() <= tol || (s1 - s0).abs() < 1e-15 {
            break;
        }
        if (g > 0.0) == (g1 > 0.0) {
            s1 = s;
            g1 = g;
            if side == 1 {
                g0 *= 0.5;
            }
            side = 1;
        } else {
            s0 = s;
            g0 = g;
            if side == -1 {
                g1 *= 0.5;
            }
            side = -1;
        }
    }
    at(s)
}

/// Marching-squares segments of one cell as pairs of edge ids.
fn cell_segments(
    field: &ScalarField,
    grid: &ParamGrid,
    edges: &Edges,
    values: &[f64],
    t: f64,
    i: usize,
    j: usize,
) -> Vec<(usize, usize)> {
    let c = grid.cell_corners(i, j);
    let inside: [bool; 4] = c.map(|k| values[k] > t);
    let mask = inside.iter().enumerate().fold(0u8, |m, (k, &b)| m | ((b as u8) << k));
    if mask == 0 || mask == 15 {
        return Vec::new();
    }
    // bottom, right, top, left
    let e = [edges.u_edge(i, j), edges.v_edge(i + 1, j), edges.u_edge(i, j + 1), edges.v_edge(i, j)];
    let cut = |k: usize| inside[k] != inside[(k + 1) % 4];
    // corner k sits between edges (k + 3) % 4 and k
    let around = |k: usize| (e[(k + 3) % 4], e[k]);
    match mask {
        5 | 10 => {
            let (uc, vc) = (grid.u_at(i) + 0.5 * grid.du(), grid.v_at(j) + 0.5 * grid.dv());
            let center_in = field.eval(uc, vc) > t;
            let isolate_inside = !center_in;
            let corners: [usize; 2] = if (mask == 5) == isolate_inside { [0, 2] } else { [1, 3] };
            corners.iter().map(|&k| around(k)).collect()
        }
        _ => {
            let crossed: Vec<usize> = (0..4).filter(|&k| cut(k)).collect();
            debug_assert_eq!(crossed.len(), 2);
            vec![(e[crossed[0]], e[crossed[1]])]
        }
    }
}

/// Traces `{field = t}` on `grid` with marching squares and exact edge roots.
pub fn extract_level_set(field: &ScalarField, t: f64, grid: &ParamGrid) -> Result<LevelSet> {
    let samples = FieldSamples::new(field, grid);
    extract_from_samples(field, t, &samples)
}

/// Same as [`extract_level_set`] reusing node samples shared across levels.
pub fn extract_from_samples(field: &ScalarField, t: f64, samples: &FieldSamples) -> Result<LevelSet> {
    let grid = &samples.grid;
    let values = &samples.values;
    let (lo, hi) = samples.range();
    let eps_node = NODE_REL_EPS * (hi - lo).max(f64::MIN_POSITIVE);
    let eps_crit = CRIT_REL_EPS * samples.max_grad();
    for (k, (&f, &g)) in values.iter().zip(&samples.grad_norm).enumerate() {
        if (f - t).abs() < eps_node && !(g >= eps_crit) {
            let (u, v) = grid.node(k % grid.nodes_u(), k / grid.nodes_u());
            return Err(Error::NearCriticalLevel { level: t, u, v });
        }
    }
    let edges = Edges::new(grid);
    let cells: Vec<(usize, usize)> = (0..grid.nv).flat_map(|j| (0..grid.nu).map(move |i| (i, j))).collect();
    let segs: Vec<(usize, (usize, usize))> = cells
        .par_iter()
        .flat_map_iter(|&(i, j)| {
            let cell = j * grid.nu + i;
            cell_segments(field, grid, &edges, values, t, i, j).into_iter().map(move |s| (cell, s))
        })
        .collect();
    // adjacency: edge -> (neighbor edge, cell)
    let mut adj: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for &(cell, (a, b)) in &segs {
        adj.entry(a).or_default().push((b, cell));
        adj.entry(b).or_default().push((a, cell));
    }
    let ids: Vec<usize> = adj.keys().copied().collect();
    let roots: Vec<(f64, f64)> = ids
        .par_iter()
        .map(|&id| {
            let r = edges.endpoints(id);
            edge_root(field, t, r.pa, r.pb, values[r.a], values[r.b])
        })
        .collect();
    let root_of: BTreeMap<usize, (f64, f64)> = ids.iter().copied().zip(roots).collect();

    let mut used_seg: std::collections::HashSet<(usize, usize, usize)> = Default::default();
    let key = |a: usize, b: usize, c: usize| if a < b { (a, b, c) } else { (b, a, c) };
    let mut chains: Vec<(Vec<usize>, Vec<usize>, bool)> = Vec::new();
    let walk = |start: usize, used: &mut std::collections::HashSet<(usize, usize, usize)>| {
        let mut path = vec![start];
        let mut cells_path = Vec::new();
        let mut cur = start;
        loop {
            let next = adj[&cur].iter().find(|&&(n, c)| !used.contains(&key(cur, n, c))).copied();
            match next {
                Some((n, c)) => {
                    used.insert(key(cur, n, c));
                    path.push(n);
                    cells_path.push(c);
                    cur = n;
                    if n == start {
                        break;
                    }
                }
                None => break,
            }
        }
        (path, cells_path)
    };
    for &id in &ids {
        if adj[&id].len() == 1 && !adj[&id].iter().all(|&(n, c)| used_seg.contains(&key(id, n, c))) {
            let (p, c) = walk(id, &mut used_seg);
            chains.push((p, c, false));
        }
    }
    for &id in &ids {
        while adj[&id].iter().any(|&(n, c)| !used_seg.contains(&key(id, n, c))) {
            let (p, c) = walk(id, &mut used_seg);
            let closed = p.len() > 2 && p.first() == p.last();
            chains.push((p, c, closed));
        }
    }
    let components = chains
        .into_par_iter()
        .map(|(path, cells, closed)| {
            let params: Vec<(f64, f64)> = path.iter().map(|id| root_of[id]).collect();
            // Positions follow the unwrapped curve so that seam-crossing chords stay short on
            // charts whose immersion is not periodic.
            let mut prev = params[0];
            let (points, theta): (Vec<[f64; 3]>, Vec<f64>) = params
                .iter()
                .map(|&(u, v)| {
                    let (uu, vv) = unwrap_near(&grid.domain, prev, (u, v));
                    prev = (uu, vv);
                    let pos = field.surface.point(uu, vv);
                    let jet = field.surface.jet(u, v);
                    let th = field.gradient_jet(&jet, u, v).map(|g| g.norm()).unwrap_or(0.0);
                    ([pos.x, pos.y, pos.z], th)
                })
                .unzip();
            Polyline { params, points, theta, closed, cells }
        })
        .collect();
    Ok(LevelSet { field: field.clone(), level: t, grid: *grid, components })
}

/// Per-component `∫ w ds` with a weight function of the parameters.
pub fn weighted_length<W>(levelset: &LevelSet, w: W) -> Result<Vec<f64>>
where
    W: Fn(f64, f64) -> f64 + Sync,
{
    if levelset.is_empty() {
        return Err(Error::EmptyLevelSet(levelset.level));
    }
    Ok(levelset
        .components
        .iter()
        .map(|p| {
            let vals: Vec<f64> = p.params.iter().map(|&(u, v)| w(u, v)).collect();
            p.integrate(&vals)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{catalog_surface, surface_gradient, Domain, SurfaceChart};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn catenoid() -> Arc<SurfaceChart> {
        Arc::new(catalog_surface("catenoid").unwrap())
    }

    #[test]
    fn catenoid_height_circles() {
        let c = catenoid();
        let h = ScalarField::abs_coordinate(c.clone(), Vec3::z());
        let g = ParamGrid::new(c.domain, 256, 120);
        let ls = extract_level_set(&h, 1.0, &g).unwrap();
        assert_eq!(ls.components.len(), 2);
        for p in &ls.components {
            assert!(p.closed);
            assert_relative_eq!(p.length(), 2.0 * PI * 1f64.cosh(), max_relative = 1e-4);
            for &(u, v) in &p.params {
                assert!((h.eval(u, v) - 1.0).abs() <= 1e-8);
            }
        }
        // θ = |∇h| = 1/cosh t, per circle 2π
        for m in ls.theta_masses() {
            assert_relative_eq!(m, 2.0 * PI, max_relative = 1e-4);
        }
    }

    #[test]
    fn plane_line_is_one_arc() {
        let p = Arc::new(catalog_surface("plane").unwrap().with_domain(Domain::new([-3.0, 3.0], [-2.0, 2.0])));
        let f = ScalarField::coordinate(p.clone(), Vec3::x());
        let ls = extract_level_set(&f, 0.0, &ParamGrid::new(p.domain, 33, 20)).unwrap();
        assert_eq!(ls.components.len(), 1);
        assert!(!ls.components[0].closed);
        let w = weighted_length(&ls, |_, _| 1.0).unwrap();
        assert_relative_eq!(w[0], 4.0, max_relative = 1e-12);
    }

    #[test]
    fn catenoid_x1_two_branches() {
        let c = catenoid();
        let f = ScalarField::coordinate(c.clone(), Vec3::x());
        let ls = extract_level_set(&f, 2.0, &ParamGrid::new(c.domain, 128, 96)).unwrap();
        assert_eq!(ls.components.len(), 2);
        assert!(ls.components.iter().all(|p| !p.closed));
        // brute-force oracle: branches of cosh v cos u = 2 meet the truncation edges v = ±3
        let crossings = |v: f64| {
            let n = 20000;
            (0..n)
                .filter(|&k| {
                    let u0 = 2.0 * PI * k as f64 / n as f64;
                    let u1 = 2.0 * PI * (k + 1) as f64 / n as f64;
                    (v.cosh() * u0.cos() - 2.0).signum() != (v.cosh() * u1.cos() - 2.0).signum()
                })
                .count()
        };
        assert_eq!(crossings(3.0) + crossings(-3.0), 4);
    }

    #[test]
    fn near_critical_level_rejected() {
        let c = catenoid();
        let f = ScalarField::coordinate(c.clone(), Vec3::x());
        // node (0, 0) is the saddle with value 1
        let g = ParamGrid::new(c.domain, 64, 60);
        assert!(matches!(extract_level_set(&f, 1.0, &g), Err(Error::NearCriticalLevel { .. })));
    }

    #[test]
    fn empty_level_is_not_an_error() {
        let c = catenoid();
        let h = ScalarField::abs_coordinate(c.clone(), Vec3::z());
        let ls = extract_level_set(&h, 50.0, &ParamGrid::new(c.domain, 32, 32)).unwrap();
        assert!(ls.is_empty());
        assert!(matches!(weighted_length(&ls, |_, _| 1.0), Err(Error::EmptyLevelSet(_))));
    }

    #[test]
    fn unit_circle_in_plane() {
        let p = Arc::new(catalog_surface("plane").unwrap().with_domain(Domain::new([-2.0, 2.0], [-2.0, 2.0])));
        let r = ScalarField::norm(p.clone());
        let ls = extract_level_set(&r, 1.0, &ParamGrid::new(p.domain, 200, 200)).unwrap();
        assert_eq!(ls.components.len(), 1);
        assert!(ls.components[0].closed);
        assert_relative_eq!(weighted_length(&ls, |_, _| 1.0).unwrap()[0], 2.0 * PI, max_relative = 1e-4);
    }

    #[test]
    fn weighted_length_converges() {
        let c = catenoid();
        let h = ScalarField::abs_coordinate(c.clone(), Vec3::z());
        let err = |n: usize| {
            let ls = extract_level_set(&h, 0.7, &ParamGrid::new(c.domain, n, 30)).unwrap();
            let w: f64 = weighted_length(&ls, |_, _| 1.0).unwrap().iter().sum();
            (w - 4.0 * PI * 0.7f64.cosh()).abs()
        };
        let (e1, e2, e3) = (err(16), err(32), err(64));
        assert!(e1 / e2 >= 1.8 && e2 / e3 >= 1.8, "{e1} {e2} {e3}");
    }

    #[test]
    fn restriction_splits_at_threshold() {
        let p = Arc::new(catalog_surface("plane").unwrap().with_domain(Domain::new([-12.0, 12.0], [-12.0, 12.0])));
        let h = ScalarField::norm(p.clone());
        let f = ScalarField::coordinate(p.clone(), Vec3::x());
        let g = ParamGrid::new(p.domain, 240, 240);
        let ls = extract_level_set(&h, 5.0, &g).unwrap();
        let r = ls.restrict(&f, 1.0, None);
        assert_eq!(r.components.len(), 1);
        assert!(!r.components[0].closed);
        let arc = r.components[0].length();
        assert_relative_eq!(arc, 2.0 * 5.0 * (1.0f64 / 5.0).acos(), max_relative = 1e-4);
        let ends = [r.components[0].params[0], *r.components[0].params.last().unwrap()];
        for (u, v) in ends {
            assert!((u - 1.0).abs() < 1e-10 && (u.hypot(v) - 5.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_splits_along_level_curve() {
        // |∇f|² = (∇f·T)² + (∇f·∇h/|∇h|)² on h-level curves
        let c = catenoid();
        let h = ScalarField::norm(c.clone());
        let f = ScalarField::coordinate(c.clone(), Vec3::new(1.0, 0.5, 0.2));
        let ls = extract_level_set(&h, 3.0, &ParamGrid::new(c.domain, 128, 64)).unwrap();
        for p in &ls.components {
            for &(u, v) in &p.params {
                let (gf, nf) = surface_gradient(&f, u, v).unwrap();
                let (gh, nh) = surface_gradient(&h, u, v).unwrap();
                let nu = c.jet(u, v).normal().unwrap();
                let tan = nu.cross(&(gh / nh));
                let a = gf.dot(&tan);
                let b = gf.dot(&gh) / nh;
                assert!((nf * nf - a * a - b * b).abs() <= 1e-8 * nf * nf.max(1.0));
            }
        }
    }
}
