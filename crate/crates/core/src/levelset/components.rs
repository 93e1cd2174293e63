use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{FieldSamples, ParamGrid, ScalarField};

/// One connected component of a sampled superlevel set.
#[derive(Clone, Debug, Serialize)]
pub struct Component {
    pub id: usize,
    /// Sorted node indices.
    pub nodes: Vec<usize>,
    /// Parameter point of the largest sampled value.
    pub representative: (f64, f64),
    pub max_value: f64,
    /// Touches the truncation box; the proxy for a non-compact closure.
    pub touches_boundary: bool,
    /// Largest value among nodes on the truncation box or next to the complement.
    pub max_on_rim: f64,
    /// Node of the largest sampled value.
    pub max_node: usize,
    /// The largest value sits on the rim or one node away from it.
    pub max_near_rim: bool,
}

/// Labeled components of `{f > tau}` on a parameter grid.
#[derive(Clone, Debug)]
pub struct SuperlevelComponents {
    pub field: ScalarField,
    pub tau: f64,
    pub grid: ParamGrid,
    pub values: Vec<f64>,
    pub labels: Vec<Option<usize>>,
    pub components: Vec<Component>,
    /// Component count differs on the grid refined twice.
    pub unresolved: bool,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.0[hi] = lo;
        }
    }
}

/// Node labels of `{values > tau}`; saddle cells join their diagonal when the center is inside.
fn label_nodes(field: &ScalarField, grid: &ParamGrid, values: &[f64], tau: f64) -> (Vec<Option<usize>>, usize) {
    let n = values.len();
    let mut dsu = Dsu((0..n).collect());
    for idx in 0..n {
        if values[idx] > tau {
            for nb in grid.neighbors(idx) {
                if values[nb] > tau {
                    dsu.union(idx, nb);
                }
            }
        }
    }
    let diag: Vec<(usize, usize)> = (0..grid.nv)
        .into_par_iter()
        .flat_map_iter(|j| {
            (0..grid.nu).filter_map(move |i| {
                let c = grid.cell_corners(i, j);
                let inside = c.map(|k| values[k] > tau);
                let pair = match inside {
                    [true, false, true, false] => (c[0], c[2]),
                    [false, true, false, true] => (c[1], c[3]),
                    _ => return None,
                };
                let center = field.eval(grid.u_at(i) + 0.5 * grid.du(), grid.v_at(j) + 0.5 * grid.dv());
                (center > tau).then_some(pair)
            })
        })
        .collect();
    for (a, b) in diag {
        dsu.union(a, b);
    }
    let mut root_label = vec![usize::MAX; n];
    let mut labels = vec![None; n];
    let mut count = 0;
    for idx in 0..n {
        if values[idx] > tau {
            let r = dsu.find(idx);
            if root_label[r] == usize::MAX {
                root_label[r] = count;
                count += 1;
            }
            labels[idx] = Some(root_label[r]);
        }
    }
    (labels, count)
}

/// Connected components of `{f > tau}` with periodic adjacency.
pub fn superlevel_components(field: &ScalarField, tau: f64, grid: &ParamGrid) -> SuperlevelComponents {
    let samples = FieldSamples::new(field, grid);
    let mut out = components_from_samples(field, tau, &samples);
    let fine = grid.refined(2);
    let fine_vals = FieldSamples::new(field, &fine).values;
    let (_, fine_count) = label_nodes(field, &fine, &fine_vals, tau);
    out.unresolved = fine_count != out.components.len();
    out
}

/// Component labeling on precomputed samples, without the refinement check.
pub fn components_from_samples(field: &ScalarField, tau: f64, samples: &FieldSamples) -> SuperlevelComponents {
    let grid = samples.grid;
    let values = samples.values.clone();
    let (labels, count) = label_nodes(field, &grid, &values, tau);
    let mut comps: Vec<Component> = (0..count)
        .map(|id| Component {
            id,
            nodes: Vec::new(),
            representative: (0.0, 0.0),
            max_value: f64::NEG_INFINITY,
            touches_boundary: false,
            max_on_rim: f64::NEG_INFINITY,
            max_node: 0,
            max_near_rim: false,
        })
        .collect();
    for (idx, lab) in labels.iter().enumerate() {
        let Some(l) = *lab else { continue };
        let c = &mut comps[l];
        c.nodes.push(idx);
        let on_box = grid.on_boundary(idx);
        let rim = on_box || grid.neighbors(idx).any(|nb| labels[nb].is_none());
        c.touches_boundary |= on_box;
        if rim {
            c.max_on_rim = c.max_on_rim.max(values[idx]);
        }
        if values[idx] > c.max_value {
            c.max_value = values[idx];
            c.max_node = idx;
            c.representative = grid.node(idx % grid.nodes_u(), idx / grid.nodes_u());
        }
    }
    let is_rim = |idx: usize| grid.on_boundary(idx) || grid.neighbors(idx).any(|nb| labels[nb].is_none());
    for c in &mut comps {
        c.max_near_rim = is_rim(c.max_node) || grid.neighbors(c.max_node).any(is_rim);
    }
    SuperlevelComponents { field: field.clone(), tau, grid, values, labels, components: comps, unresolved: false }
}

impl SuperlevelComponents {
    pub fn count(&self) -> usize {
        self.components.len()
    }

    /// Components touching the truncation box.
    pub fn non_compact(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| c.touches_boundary)
    }

    /// Label of the component containing parameter point `(u, v)`.
    ///
    /// Uses the labeled corner of the enclosing cell with the largest sampled value.
    pub fn component_at(&self, u: f64, v: f64) -> Option<usize> {
        let g = &self.grid;
        let (u, v) = g.domain.wrap(u, v);
        let i = (((u - g.domain.u[0]) / g.du()).floor().max(0.0) as usize).min(g.nu - 1);
        let j = (((v - g.domain.v[0]) / g.dv()).floor().max(0.0) as usize).min(g.nv - 1);
        g.cell_corners(i, j)
            .into_iter()
            .filter_map(|k| self.labels[k].map(|l| (l, self.values[k])))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(l, _)| l)
    }

    /// Label of the cell `(i, j)` if every labeled corner agrees.
    pub fn cell_label(&self, i: usize, j: usize) -> Option<usize> {
        self.grid
            .cell_corners(i, j)
            .into_iter()
            .filter_map(|k| self.labels[k].map(|l| (l, self.values[k])))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(l, _)| l)
    }

    /// Component of `coarser` (lower threshold, same grid) containing component `id`.
    pub fn parent_in(&self, coarser: &SuperlevelComponents, id: usize) -> Option<usize> {
        let first = *self.components[id].nodes.first()?;
        coarser.labels[first]
    }

    /// Cells whose corners are neither all inside nor all outside.
    pub fn boundary_cells(&self) -> Vec<usize> {
        let g = &self.grid;
        (0..g.nv)
            .flat_map(|j| (0..g.nu).map(move |i| (i, j)))
            .filter(|&(i, j)| {
                let c = g.cell_corners(i, j).map(|k| self.labels[k].is_some());
                c.iter().any(|&x| x) && c.iter().any(|&x| !x)
            })
            .map(|(i, j)| j * g.nu + i)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{catalog_surface, Vec3};
    use crate::levelset::extract_level_set;
    use std::collections::BTreeSet;
    use std::sync::Arc;

    /// Independent oracle: breadth-first search over the sampled indicator with 8-neighborhoods
    /// restricted to the same adjacency as the grid.
    fn bfs_count(grid: &ParamGrid, vals: &[f64], tau: f64) -> usize {
        let mut seen = vec![false; vals.len()];
        let mut count = 0;
        for s in 0..vals.len() {
            if vals[s] > tau && !seen[s] {
                count += 1;
                let mut stack = vec![s];
                seen[s] = true;
                while let Some(x) = stack.pop() {
                    for nb in grid.neighbors(x) {
                        if vals[nb] > tau && !seen[nb] {
                            seen[nb] = true;
                            stack.push(nb);
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn catenoid_x1_splits() {
        let c = Arc::new(catalog_surface("catenoid").unwrap());
        let f = ScalarField::coordinate(c.clone(), Vec3::x());
        let g = ParamGrid::new(c.domain, 128, 96);
        let s = superlevel_components(&f, 2.0, &g);
        assert_eq!(s.count(), 2);
        assert!(s.components.iter().all(|c| c.touches_boundary));
        assert!(!s.unresolved);
        assert_eq!(bfs_count(&g, &s.values, 2.0), 2);
        // sides v > 0 and v < 0
        let signs: BTreeSet<bool> = s.components.iter().map(|c| c.representative.1 > 0.0).collect();
        assert_eq!(signs.len(), 2);
    }

    #[test]
    fn plane_half_plane() {
        let p = Arc::new(catalog_surface("plane").unwrap());
        let f = ScalarField::coordinate(p.clone(), Vec3::x());
        let s = superlevel_components(&f, 0.0, &ParamGrid::new(p.domain, 40, 40));
        assert_eq!(s.count(), 1);
    }

    #[test]
    fn catenoid_height_end() {
        let c = Arc::new(catalog_surface("catenoid").unwrap());
        let f = ScalarField::coordinate(c.clone(), Vec3::z());
        let g = ParamGrid::new(c.domain, 64, 60);
        let s = superlevel_components(&f, 1.0, &g);
        assert_eq!(s.count(), 1);
        // its level boundary is a cycle
        let ls = extract_level_set(&f, 1.0, &g).unwrap();
        assert_eq!(ls.components.len(), 1);
        assert!(ls.components[0].closed);
    }

    #[test]
    fn nesting_and_boundary_consistency() {
        let c = Arc::new(catalog_surface("catenoid").unwrap());
        let f = ScalarField::coordinate(c.clone(), Vec3::new(1.0, 0.3, 0.1));
        let g = ParamGrid::new(c.domain, 96, 80);
        let lo = superlevel_components(&f, 1.7, &g);
        let hi = superlevel_components(&f, 3.1, &g);
        for comp in &hi.components {
            let parent = hi.parent_in(&lo, comp.id).unwrap();
            let pset: BTreeSet<usize> = lo.components[parent].nodes.iter().copied().collect();
            assert!(comp.nodes.iter().all(|n| pset.contains(n)));
        }
        let ls = extract_level_set(&f, 3.1, &g).unwrap();
        let crossed: BTreeSet<usize> = ls.components.iter().flat_map(|p| p.cells.iter().copied()).collect();
        let bcells: BTreeSet<usize> = hi.boundary_cells().into_iter().collect();
        assert_eq!(crossed, bcells);
    }
}
