use rayon::prelude::*;

use crate::geometry::{Jet, ParamGrid, ScalarField};
use crate::levelset::SuperlevelComponents;

/// Integration region on a chart.
#[derive(Clone, Copy, Debug)]
pub enum Region<'a> {
    Whole,
    /// One labeled component of `{f > tau}`.
    Component {
        comps: &'a SuperlevelComponents,
        id: usize,
    },
}

impl Region<'_> {
    /// Fraction of the sub-cell around `(u, v)` lying inside the region.
    fn fraction(&self, cell: (usize, usize), u: f64, v: f64, su: f64, sv: f64) -> f64 {
        match self {
            Region::Whole => 1.0,
            Region::Component { comps, id } => {
                if comps.cell_label(cell.0, cell.1) != Some(*id) {
                    return 0.0;
                }
                let (g, gu, gv) = comps.field.param_grad(u, v);
                let half = 0.5 * (gu.abs() * su + gv.abs() * sv);
                ramp(g - comps.tau, half)
            }
        }
    }
}

/// Linear coverage of `{x > 0}` for a sample spread uniformly over `[key − half, key + half]`.
fn ramp(x: f64, half: f64) -> f64 {
    if half <= 0.0 {
        return if x > 0.0 {
            1.0
        } else if x == 0.0 {
            0.5
        } else {
            0.0
        };
    }
    (0.5 + x / (2.0 * half)).clamp(0.0, 1.0)
}

/// Weighted area samples keyed by an exhaustion function, answering `∫_{h < t} w dA` for any `t`.
///
/// Each sub-cell carries the value of `h` at its midpoint and a half-range from the parameter
/// gradient; its mass is spread linearly across that range. Queries are exact for the resulting
/// piecewise-linear distribution and cost `O(log n)`.
#[derive(Clone, Debug)]
pub struct CoverageQuadrature {
    /// Step samples: sorted keys with prefix mass.
    step_keys: Vec<f64>,
    step_prefix: Vec<f64>,
    /// Ramp samples sorted by start and by end, with prefix sums of `w`, `w/(b−a)`, `w·a/(b−a)`.
    starts: Vec<f64>,
    start_prefix: Vec<[f64; 2]>,
    ends: Vec<f64>,
    end_prefix: Vec<[f64; 3]>,
    total: f64,
}

/// Sub-cell sample `(key, half, weight)`.
type Sample = (f64, f64, f64);

impl CoverageQuadrature {
    /// Samples `w(jet, u, v) dA` over `region` on `grid` with `k × k` midpoints per cell.
    pub fn build<W>(h: &ScalarField, region: Region<'_>, grid: &ParamGrid, k: usize, w: W) -> Self
    where
        W: Fn(&Jet, f64, f64) -> f64 + Sync,
    {
        let k = k.max(1);
        let (su, sv) = (grid.du() / k as f64, grid.dv() / k as f64);
        let cell_area = su * sv;
        let samples: Vec<Sample> = (0..grid.nv)
            .into_par_iter()
            .flat_map_iter(|j| {
                let w = &w;
                (0..grid.nu).flat_map(move |i| {
                    (0..k * k).filter_map(move |s| {
                        let u = grid.u_at(i) + (s % k) as f64 * su + 0.5 * su;
                        let v = grid.v_at(j) + (s / k) as f64 * sv + 0.5 * sv;
                        let frac = region.fraction((i, j), u, v, su, sv);
                        if frac == 0.0 {
                            return None;
                        }
                        let jet = h.surface.jet(u, v);
                        let (hv, hu_, hv_) = h.param_grad_jet(&jet, u, v);
                        let half = 0.5 * (hu_.abs() * su + hv_.abs() * sv);
                        let mass = frac * w(&jet, u, v) * jet.area_element() * cell_area;
                        Some((hv, half, mass))
                    })
                })
            })
            .collect();
        Self::from_samples(samples)
    }

    fn from_samples(samples: Vec<Sample>) -> Self {
        let (mut steps, ramps): (Vec<Sample>, Vec<Sample>) = samples.into_iter().partition(|s| s.1 <= 0.0);
        steps.sort_by(|a, b| a.0.total_cmp(&b.0));
        let step_keys = steps.iter().map(|s| s.0).collect();
        let step_prefix = prefix(steps.iter().map(|s| [s.2]).collect::<Vec<_>>()).into_iter().map(|p| p[0]).collect();

        let mut by_start: Vec<(f64, f64, f64)> =
            ramps.iter().map(|&(key, half, m)| (key - half, key + half, m)).collect();
        let mut by_end = by_start.clone();
        by_start.sort_by(|a, b| a.0.total_cmp(&b.0));
        by_end.sort_by(|a, b| a.1.total_cmp(&b.1));
        let starts = by_start.iter().map(|s| s.0).collect();
        let start_prefix = prefix(by_start.iter().map(|&(a, b, m)| [m / (b - a), m * a / (b - a)]).collect());
        let ends = by_end.iter().map(|s| s.1).collect();
        let end_prefix = prefix(by_end.iter().map(|&(a, b, m)| [m, m / (b - a), m * a / (b - a)]).collect());
        let total = steps.iter().chain(ramps.iter()).map(|s| s.2).sum();
        CoverageQuadrature { step_keys, step_prefix, starts, start_prefix, ends, end_prefix, total }
    }

    /// `∫_{h < t} w dA`.
    pub fn below(&self, t: f64) -> f64 {
        let ns = self.step_keys.partition_point(|&x| x < t);
        let steps = self.step_prefix[ns];
        let na = self.starts.partition_point(|&a| a < t);
        let nb = self.ends.partition_point(|&b| b <= t);
        let [sa1, sa2] = self.start_prefix[na];
        let [eb0, eb1, eb2] = self.end_prefix[nb];
        // ramps started: Σ w(t − a)/(b − a); finished ones are replaced by their full mass
        steps + (sa1 * t - sa2) - (eb1 * t - eb2) + eb0
    }

    /// `∫_{t1 < h < t2} w dA`.
    pub fn between(&self, t1: f64, t2: f64) -> f64 {
        self.below(t2) - self.below(t1)
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

fn prefix<const N: usize>(xs: Vec<[f64; N]>) -> Vec<[f64; N]> {
    let mut out = Vec::with_capacity(xs.len() + 1);
    let mut acc = [0.0; N];
    out.push(acc);
    for x in xs {
        for d in 0..N {
            acc[d] += x[d];
        }
        out.push(acc);
    }
    out
}
