use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{ParamGrid, SurfaceChart, Vec3};
use crate::util::trapezoid;
use crate::{Error, Result};

/// Orthonormal basis of a projection plane through the origin.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProjectionPlane {
    pub e1: Vec3,
    pub e2: Vec3,
}

impl ProjectionPlane {
    /// Plane spanned by `a` and the part of `b` orthogonal to it.
    pub fn spanned(a: Vec3, b: Vec3) -> Result<Self> {
        let e1 = a.try_normalize(1e-300).ok_or_else(|| Error::InvalidArgument("zero plane vector".into()))?;
        let e2 = (b - e1 * e1.dot(&b))
            .try_normalize(1e-12)
            .ok_or_else(|| Error::InvalidArgument("plane vectors are parallel".into()))?;
        Ok(ProjectionPlane { e1, e2 })
    }

    /// The `(x₁, x₂)` plane.
    pub fn horizontal() -> Self {
        ProjectionPlane { e1: Vec3::x(), e2: Vec3::y() }
    }

    fn project(&self, x: &Vec3) -> [f64; 2] {
        [x.dot(&self.e1), x.dot(&self.e2)]
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MultiplicityPoint {
    pub radius: f64,
    /// `(1/ln R) ∫₁^R dt/t ∫₀^{2π} n(t e^{iθ}) dθ`
    pub integral: f64,
}

/// Rows `R,integral`.
pub fn multiplicity_csv(points: &[MultiplicityPoint]) -> String {
    let mut s = String::from("R,integral\n");
    for p in points {
        s.push_str(&format!("{},{}\n", p.radius, p.integral));
    }
    s
}

type Tri = [[f64; 2]; 3];

/// Projected cell triangles bucketed on a square lattice of bins.
struct Coverage {
    cells: Vec<[Tri; 2]>,
    bins: Vec<Vec<u32>>,
    side: usize,
    half: f64,
}

fn in_tri(p: [f64; 2], t: &Tri) -> bool {
    let cross = |a: [f64; 2], b: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    let (d0, d1, d2) = (cross(t[0], t[1]), cross(t[1], t[2]), cross(t[2], t[0]));
    (d0 > 0.0 && d1 > 0.0 && d2 > 0.0) || (d0 < 0.0 && d1 < 0.0 && d2 < 0.0)
}

impl Coverage {
    fn new(surface: &SurfaceChart, plane: &ProjectionPlane, grid: &ParamGrid, half: f64) -> Self {
        let proj: Vec<[f64; 2]> = grid.nodes().par_iter().map(|&(u, v)| plane.project(&surface.point(u, v))).collect();
        let cells: Vec<[Tri; 2]> = (0..grid.nv)
            .flat_map(|j| (0..grid.nu).map(move |i| (i, j)))
            .map(|(i, j)| {
                let c = grid.cell_corners(i, j).map(|k| proj[k]);
                [[c[0], c[1], c[2]], [c[0], c[2], c[3]]]
            })
            .collect();
        let side = 512;
        let mut bins = vec![Vec::new(); side * side];
        let to_bin = |x: f64| (((x + half) / (2.0 * half) * side as f64).floor().max(0.0) as usize).min(side - 1);
        for (k, quad) in cells.iter().enumerate() {
            let pts = quad[0].iter().chain(quad[1].iter());
            let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for p in pts {
                for a in 0..2 {
                    lo[a] = lo[a].min(p[a]);
                    hi[a] = hi[a].max(p[a]);
                }
            }
            if hi[0] < -half || lo[0] > half || hi[1] < -half || lo[1] > half {
                continue;
            }
            for by in to_bin(lo[1])..=to_bin(hi[1]) {
                for bx in to_bin(lo[0])..=to_bin(hi[0]) {
                    bins[by * side + bx].push(k as u32);
                }
            }
        }
        Coverage { cells, bins, side, half }
    }

    /// Number of cells whose image contains `p`.
    fn count(&self, p: [f64; 2]) -> usize {
        let to_bin = |x: f64| {
            (((x + self.half) / (2.0 * self.half) * self.side as f64).floor().max(0.0) as usize).min(self.side - 1)
        };
        self.bins[to_bin(p[1]) * self.side + to_bin(p[0])]
            .iter()
            .filter(|&&k| {
                let q = &self.cells[k as usize];
                in_tri(p, &q[0]) || in_tri(p, &q[1])
            })
            .count()
    }
}

/// Smallest projected radius of the truncation boundary.
pub fn projected_reach(surface: &SurfaceChart, plane: &ProjectionPlane, grid: &ParamGrid) -> f64 {
    (0..grid.node_count())
        .filter(|&k| grid.on_boundary(k))
        .map(|k| {
            let (u, v) = grid.node(k % grid.nodes_u(), k / grid.nodes_u());
            let p = plane.project(&surface.point(u, v));
            p[0].hypot(p[1])
        })
        .fold(f64::INFINITY, f64::min)
}

/// Averaged projection multiplicity for each radius, counting preimages cell by cell.
///
/// Fails with `NotProper` when the projected truncation boundary comes inside a radius.
pub fn projection_multiplicity_integral(
    surface: &Arc<SurfaceChart>,
    plane: &ProjectionPlane,
    radii: &[f64],
    n_theta: usize,
    n_t: usize,
    grid: &ParamGrid,
) -> Result<Vec<MultiplicityPoint>> {
    let reach = projected_reach(surface, plane, grid);
    if let Some(&bad) = radii.iter().find(|&&r| !(r > 1.0) || r > reach) {
        return Err(Error::NotProper { radius: bad, reach });
    }
    let r_max = radii.iter().copied().fold(1.0, f64::max);
    let cover = Coverage::new(surface, plane, grid, r_max * 1.001);
    let n_theta = n_theta.max(8);
    let dtheta = 2.0 * PI / n_theta as f64;
    radii
        .iter()
        .map(|&r| {
            let ln_r = r.ln();
            let s: Vec<f64> = (0..=n_t.max(2)).map(|k| ln_r * k as f64 / n_t.max(2) as f64).collect();
            let ring: Vec<f64> = s
                .par_iter()
                .map(|&sk| {
                    let t = sk.exp();
                    let hits: usize = (0..n_theta)
                        .map(|m| {
                            // offset keeps samples off lattice axes and cell edges
                            let th = (m as f64 + 0.5) * dtheta + 1e-3;
                            cover.count([t * th.cos(), t * th.sin()])
                        })
                        .sum();
                    hits as f64 * dtheta
                })
                .collect();
            Ok(MultiplicityPoint { radius: r, integral: trapezoid(&s, &ring) / ln_r })
        })
        .collect()
}
