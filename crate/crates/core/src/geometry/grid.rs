use rayon::prelude::*;

use super::{Domain, ScalarField};

/// Uniform node lattice over a chart domain.
///
/// `nu` and `nv` count cells. Along a periodic axis the last node is identified
/// with the first, so there are as many nodes as cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamGrid {
    pub domain: Domain,
    pub nu: usize,
    pub nv: usize,
}

impl ParamGrid {
    pub fn new(domain: Domain, nu: usize, nv: usize) -> Self {
        ParamGrid { domain, nu: nu.max(1), nv: nv.max(1) }
    }

    /// Same cell density, each axis scaled by `k`.
    pub fn refined(&self, k: usize) -> Self {
        ParamGrid::new(self.domain, self.nu * k, self.nv * k)
    }

    pub fn nodes_u(&self) -> usize {
        if self.domain.periodic_u {
            self.nu
        } else {
            self.nu + 1
        }
    }

    pub fn nodes_v(&self) -> usize {
        if self.domain.periodic_v {
            self.nv
        } else {
            self.nv + 1
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes_u() * self.nodes_v()
    }

    pub fn du(&self) -> f64 {
        self.domain.width_u() / self.nu as f64
    }

    pub fn dv(&self) -> f64 {
        self.domain.width_v() / self.nv as f64
    }

    pub fn u_at(&self, i: usize) -> f64 {
        self.domain.u[0] + i as f64 * self.du()
    }

    pub fn v_at(&self, j: usize) -> f64 {
        self.domain.v[0] + j as f64 * self.dv()
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        (j % self.nodes_v()) * self.nodes_u() + (i % self.nodes_u())
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (self.u_at(i), self.v_at(j))
    }

    /// Node coordinates, row-major in `v`.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let (nu, nv) = (self.nodes_u(), self.nodes_v());
        (0..nv).flat_map(|j| (0..nu).map(move |i| (i, j))).map(|(i, j)| self.node(i, j)).collect()
    }

    /// Corner node indices of cell `(i, j)` in the order `(i,j) (i+1,j) (i+1,j+1) (i,j+1)`.
    pub fn cell_corners(&self, i: usize, j: usize) -> [usize; 4] {
        [self.node_index(i, j), self.node_index(i + 1, j), self.node_index(i + 1, j + 1), self.node_index(i, j + 1)]
    }

    /// Grid-index neighbors of a node with periodic wrap.
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (nu, nv) = (self.nodes_u(), self.nodes_v());
        let (i, j) = (idx % nu, idx / nu);
        let pu = self.domain.periodic_u;
        let pv = self.domain.periodic_v;
        let cand = [
            if i + 1 < nu {
                Some((i + 1, j))
            } else if pu {
                Some((0, j))
            } else {
                None
            },
            if i > 0 {
                Some((i - 1, j))
            } else if pu {
                Some((nu - 1, j))
            } else {
                None
            },
            if j + 1 < nv {
                Some((i, j + 1))
            } else if pv {
                Some((i, 0))
            } else {
                None
            },
            if j > 0 {
                Some((i, j - 1))
            } else if pv {
                Some((i, nv - 1))
            } else {
                None
            },
        ];
        cand.into_iter().flatten().filter(move |&(a, b)| (a, b) != (i, j)).map(move |(a, b)| b * nu + a)
    }

    /// Whether a node lies on a non-periodic edge of the truncation box.
    pub fn on_boundary(&self, idx: usize) -> bool {
        let (nu, nv) = (self.nodes_u(), self.nodes_v());
        let (i, j) = (idx % nu, idx / nu);
        (!self.domain.periodic_u && (i == 0 || i == nu - 1)) || (!self.domain.periodic_v && (j == 0 || j == nv - 1))
    }

    pub fn sample(&self, field: &ScalarField) -> FieldSamples {
        FieldSamples::new(field, self)
    }
}

/// Field values and gradient norms at every grid node.
#[derive(Clone, Debug)]
pub struct FieldSamples {
    pub grid: ParamGrid,
    pub values: Vec<f64>,
    pub grad_norm: Vec<f64>,
}

impl FieldSamples {
    pub fn new(field: &ScalarField, grid: &ParamGrid) -> Self {
        let pairs: Vec<(f64, f64)> = grid
            .nodes()
            .into_par_iter()
            .map(|(u, v)| {
                let jet = field.surface.jet(u, v);
                let val = field.param_grad_jet(&jet, u, v).0;
                let g = field.gradient_jet(&jet, u, v).map(|g| g.norm()).unwrap_or(f64::NAN);
                (val, g)
            })
            .collect();
        let (values, grad_norm) = pairs.into_iter().unzip();
        FieldSamples { grid: *grid, values, grad_norm }
    }

    pub fn range(&self) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    }

    pub fn max_grad(&self) -> f64 {
        self.grad_norm.iter().copied().filter(|g| g.is_finite()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{catalog_surface, Vec3};

    #[test]
    fn periodic_node_counts_and_wrap() {
        let c = catalog_surface("catenoid").unwrap();
        let g = ParamGrid::new(c.domain, 16, 10);
        assert_eq!(g.nodes_u(), 16);
        assert_eq!(g.nodes_v(), 11);
        assert_eq!(g.cell_corners(15, 0)[1], g.node_index(0, 0));
        assert_eq!(g.neighbors(g.node_index(0, 5)).count(), 4);
        assert_eq!(g.neighbors(g.node_index(3, 0)).count(), 3);
        assert!(g.on_boundary(g.node_index(3, 10)));
        assert!(!g.on_boundary(g.node_index(0, 5)));
    }

    #[test]
    fn periodic_edges_agree() {
        let c = catalog_surface("catenoid").unwrap();
        let d = c.domain;
        for k in 0..20 {
            let v = d.v[0] + k as f64 * 0.3;
            let a = c.jet(d.u[0], v);
            let b = c.jet(d.u[1], v);
            for (x, y) in [(a.pos, b.pos), (a.du, b.du), (a.dv, b.dv), (a.duu, b.duu), (a.dvv, b.dvv)] {
                assert!((x - y).norm() < 1e-10 * (1.0 + x.norm()));
            }
        }
    }

    #[test]
    fn samples_have_grid_size() {
        let p = catalog_surface("plane").unwrap();
        let g = ParamGrid::new(p.domain, 4, 6);
        let s = g.sample(&ScalarField::coordinate(p, Vec3::x()));
        assert_eq!(s.values.len(), 35);
        assert_eq!(s.range(), (-10.0, 10.0));
        assert!((s.max_grad() - 1.0).abs() < 1e-15);
    }
}
