use std::f64::consts::PI;
use std::sync::Arc;

use log::debug;
use rayon::prelude::*;
use serde::Serialize;

use crate::bound::{BoundCheck, Relation};
use crate::geometry::{FieldSamples, ParamGrid, ScalarField, SurfaceChart, Vec3};
use crate::tracts::check_regular_direction;
use crate::{Error, Result};

/// Parameter radius of the circle on which level branches are counted.
pub const R_LOC: f64 = 1e-2;
/// Seeds need a surface gradient of `⟨x, e⟩` below this.
pub const SEED_GRADIENT: f64 = 0.5;
/// Distinct solutions closer than this are merged.
pub const MERGE_RADIUS: f64 = 1e-6;
/// Slack added to `V₂ − χ` in the index bound.
pub const INDEX_SLACK: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct CriticalPointRecord {
    pub u: f64,
    pub v: f64,
    pub value: f64,
    /// Sign changes of `f − f(a)` around a small circle.
    pub sigma: usize,
    /// `σ/2 − 1`
    pub index: i64,
    /// `σ` even and the index positive.
    pub valid: bool,
}

/// Gradient of `⟨x, e⟩` in parameters and its Jacobian.
fn residual(surface: &SurfaceChart, e: &Vec3, u: f64, v: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let j = surface.jet(u, v);
    let b = j.duv.dot(e);
    ([j.du.dot(e), j.dv.dot(e)], [[j.duu.dot(e), b], [b, j.dvv.dot(e)]])
}

fn solve2(a: [[f64; 2]; 2], r: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < 1e-300 {
        return None;
    }
    Some([(r[0] * a[1][1] - r[1] * a[0][1]) / det, (a[0][0] * r[1] - a[1][0] * r[0]) / det])
}

/// Levenberg–Marquardt on `∇(⟨x, e⟩) = 0` in parameters.
fn newton(surface: &SurfaceChart, e: &Vec3, mut u: f64, mut v: f64) -> Option<(f64, f64)> {
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let mut mu = 1e-6;
    let (mut r, mut jac) = residual(surface, e, u, v);
    for _ in 0..100 {
        let j0 = surface.jet(u, v);
        let scale = j0.du.norm() + j0.dv.norm();
        if norm(r) <= 1e-12 * scale.max(1.0) {
            return Some((u, v));
        }
        // (JᵀJ + μ I) δ = −Jᵀ r
        let jt = |a: usize, b: usize| jac[0][a] * jac[0][b] + jac[1][a] * jac[1][b];
        let g = [jac[0][0] * r[0] + jac[1][0] * r[1], jac[0][1] * r[0] + jac[1][1] * r[1]];
        let a = [[jt(0, 0) + mu, jt(0, 1)], [jt(1, 0), jt(1, 1) + mu]];
        let d = solve2(a, [-g[0], -g[1]])?;
        let (nu, nv) = (u + d[0], v + d[1]);
        let (nr, njac) = residual(surface, e, nu, nv);
        if norm(nr) < norm(r) {
            (u, v, r, jac) = (nu, nv, nr, njac);
            mu = (mu * 0.3).max(1e-15);
        } else {
            mu *= 10.0;
            if mu > 1e12 {
                return None;
            }
        }
    }
    None
}

/// Sign changes of `f − f(a)` on a circle of parameter radius `r`.
fn branch_count(f: &ScalarField, u: f64, v: f64, r: f64) -> usize {
    let f0 = f.eval(u, v);
    let n = 720;
    let signs: Vec<bool> = (0..n)
        .map(|k| {
            let phi = 2.0 * PI * (k as f64 + 0.5) / n as f64;
            f.eval(u + r * phi.cos(), v + r * phi.sin()) - f0 >= 0.0
        })
        .collect();
    (0..n).filter(|&k| signs[k] != signs[(k + 1) % n]).count()
}

/// `σ` at `R_LOC`, halving the radius until two consecutive counts agree.
fn sigma(f: &ScalarField, u: f64, v: f64) -> usize {
    let mut r = R_LOC;
    let mut prev = branch_count(f, u, v, r);
    for _ in 0..8 {
        r *= 0.5;
        let next = branch_count(f, u, v, r);
        if next == prev {
            return next;
        }
        prev = next;
    }
    prev
}

/// Critical points of `⟨x, e⟩`, seeded at local minima of its surface gradient.
pub fn find_critical_points(
    surface: &Arc<SurfaceChart>,
    e: Vec3,
    grid: &ParamGrid,
) -> Result<Vec<CriticalPointRecord>> {
    let e = e.try_normalize(1e-300).ok_or_else(|| Error::InvalidArgument("zero direction".into()))?;
    let f = ScalarField::coordinate(surface.clone(), e);
    let samples = FieldSamples::new(&f, grid);
    let g = &samples.grad_norm;
    let seeds: Vec<usize> =
        (0..grid.node_count()).filter(|&k| g[k] < SEED_GRADIENT && grid.neighbors(k).all(|nb| g[k] <= g[nb])).collect();
    let dom = grid.domain;
    // Stay a cell away from the truncation box; solutions there are boundary artefacts.
    let margin_u = if dom.periodic_u { f64::NEG_INFINITY } else { grid.du() };
    let margin_v = if dom.periodic_v { f64::NEG_INFINITY } else { grid.dv() };
    let interior = |u: f64, v: f64| {
        u > dom.u[0] + margin_u && u < dom.u[1] - margin_u && v > dom.v[0] + margin_v && v < dom.v[1] - margin_v
    };
    let found: Vec<(f64, f64)> = seeds
        .par_iter()
        .filter_map(|&k| {
            let (u0, v0) = grid.node(k % grid.nodes_u(), k / grid.nodes_u());
            match newton(surface, &e, u0, v0) {
                Some((u, v)) => {
                    let (u, v) = dom.wrap(u, v);
                    interior(u, v).then_some((u, v))
                }
                None => {
                    debug!("critical point search diverged from seed ({u0}, {v0})");
                    None
                }
            }
        })
        .collect();
    let mut unique: Vec<(f64, f64)> = Vec::new();
    for p in found {
        if unique.iter().all(|q| dom.distance(*q, p) > MERGE_RADIUS) {
            unique.push(p);
        }
    }
    unique.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(unique
        .into_iter()
        .map(|(u, v)| {
            let s = sigma(&f, u, v);
            let index = s as i64 / 2 - 1;
            CriticalPointRecord { u, v, value: f.eval(u, v), sigma: s, index, valid: s.is_multiple_of(2) && index >= 1 }
        })
        .collect())
}

/// Result of the index bound `Σ ind ≤ V₂ − χ`.
#[derive(Clone, Debug, Serialize)]
pub struct IndexCheck {
    pub points: Vec<CriticalPointRecord>,
    pub index_sum: i64,
    pub v2: f64,
    pub euler_char: i32,
    pub check: BoundCheck,
}

/// Checks the index bound for `⟨x, e⟩` given a finite projective volume.
pub fn index_theorem_check(
    surface: &Arc<SurfaceChart>,
    e: Vec3,
    v2: Option<f64>,
    grid: &ParamGrid,
) -> Result<IndexCheck> {
    let v2 = v2.filter(|v| v.is_finite()).ok_or(Error::InfiniteVolume)?;
    let chi = surface.euler_char.ok_or(Error::UnknownEulerCharacteristic)?;
    let f = ScalarField::coordinate(surface.clone(), e);
    check_regular_direction(&f, &FieldSamples::new(&f, grid))?;
    let points = find_critical_points(surface, e, grid)?;
    let index_sum: i64 = points.iter().map(|p| p.index).sum();
    let check =
        BoundCheck::with_slack("index_bound", index_sum as f64, v2 - chi as f64, Relation::Le, 0.0, INDEX_SLACK);
    Ok(IndexCheck { points, index_sum, v2, euler_char: chi, check })
}
