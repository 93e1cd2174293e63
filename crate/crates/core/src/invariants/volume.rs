use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::energy::{CoverageQuadrature, Region, DEFAULT_SUBSAMPLES};
use crate::geometry::{ParamGrid, ScalarField, SurfaceChart};
use crate::util::ls_slope;
use crate::{Error, Result};

/// Length of the unit circle, the normalising constant for `p = 2`.
pub const OMEGA_2: f64 = 2.0 * PI;
/// Growth of the per-decade slope beyond which the volume is declared infinite.
pub const DIVERGENCE_RATIO: f64 = 2.0;

/// Samples of `V(t) = ∫_{1<|x|<t} |x|^{−2} dA` and `Area(|x| < t)` with both limit estimators.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectiveVolumeEstimate {
    pub t_grid: Vec<f64>,
    pub v_of_t: Vec<f64>,
    pub area_of_t: Vec<f64>,
    /// Slope of `V` against `ln t` over the top decade, over `ω₂`.
    pub v2_log: f64,
    /// Slope of `Area` against `t²` over the top decade, times `2/ω₂`.
    pub v2_area: f64,
    /// Slope of `V` against `ln t` within each full decade.
    pub decade_slopes: Vec<f64>,
    pub diverged: bool,
}

impl ProjectiveVolumeEstimate {
    /// Logarithmic estimate, `None` when the volume diverged.
    pub fn v2(&self) -> Option<f64> {
        (!self.diverged).then_some(self.v2_log)
    }

    /// Relative gap between the two estimators.
    pub fn estimator_gap(&self) -> f64 {
        ((self.v2_log - self.v2_area) / self.v2_log).abs()
    }

    /// Rows `t,V,Area`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,V,Area\n");
        for k in 0..self.t_grid.len() {
            s.push_str(&format!("{},{},{}\n", self.t_grid[k], self.v_of_t[k], self.area_of_t[k]));
        }
        s
    }
}

fn fit_window(t: &[f64], y: &[f64], lo: f64, hi: f64, x: impl Fn(f64) -> f64) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(y)
        .filter(|(t, _)| **t >= lo * (1.0 - 1e-12) && **t <= hi * (1.0 + 1e-12))
        .map(|(t, y)| (x(*t), *y))
        .unzip();
    if xs.len() < 2 {
        f64::NAN
    } else {
        ls_slope(&xs, &ys)
    }
}

/// Projective volume `V₂` from log-spaced radii spanning at least two decades.
pub fn projective_volume(
    surface: &Arc<SurfaceChart>,
    t_grid: &[f64],
    grid: &ParamGrid,
) -> Result<ProjectiveVolumeEstimate> {
    let (t0, t1) = match (t_grid.first(), t_grid.last()) {
        (Some(&a), Some(&b)) if a > 0.0 && b > a => (a, b),
        _ => return Err(Error::GridTooShort { decades: 0.0 }),
    };
    let decades = (t1 / t0).log10();
    if decades < 2.0 - 1e-9 {
        return Err(Error::GridTooShort { decades });
    }
    let h = ScalarField::norm(surface.clone());
    let vol = CoverageQuadrature::build(&h, Region::Whole, grid, DEFAULT_SUBSAMPLES, |jet, _, _| {
        let r2 = jet.pos.norm_squared();
        if r2 > 0.0 {
            1.0 / r2
        } else {
            0.0
        }
    });
    let area = CoverageQuadrature::build(&h, Region::Whole, grid, DEFAULT_SUBSAMPLES, |_, _, _| 1.0);
    let v_of_t: Vec<f64> = t_grid.iter().map(|&t| if t > 1.0 { vol.between(1.0, t) } else { 0.0 }).collect();
    let area_of_t: Vec<f64> = t_grid.iter().map(|&t| area.below(t)).collect();

    let v2_log = fit_window(t_grid, &v_of_t, t1 / 10.0, t1, f64::ln) / OMEGA_2;
    let v2_area = 2.0 * fit_window(t_grid, &area_of_t, t1 / 10.0, t1, |t| t * t) / OMEGA_2;
    let full = (decades + 1e-9).floor().max(1.0) as i32;
    let decade_slopes: Vec<f64> = (0..full)
        .map(|k| {
            let hi = t1 / 10f64.powi(k);
            fit_window(t_grid, &v_of_t, hi / 10.0, hi, f64::ln)
        })
        .rev()
        .collect();
    let diverged = decade_slopes.windows(2).any(|w| w[1] > DIVERGENCE_RATIO * w[0]);
    Ok(ProjectiveVolumeEstimate {
        t_grid: t_grid.to_vec(),
        v_of_t,
        area_of_t,
        v2_log,
        v2_area,
        decade_slopes,
        diverged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog_surface;
    use crate::util::log_space;

    fn estimate(name: &str, nu: usize, nv: usize) -> ProjectiveVolumeEstimate {
        let s = Arc::new(catalog_surface(name).unwrap().truncated_to_radius(1e3));
        let g = ParamGrid::new(s.domain, nu, nv);
        projective_volume(&s, &log_space(10.0, 1e3, 41), &g).unwrap()
    }

    #[test]
    fn plane_and_catenoid() {
        let p = estimate("plane", 400, 400);
        assert!((p.v2_log - 1.0).abs() < 0.02, "{p:?}");
        assert!(p.estimator_gap() < 0.05);
        assert!(!p.diverged);
        let c = estimate("catenoid", 128, 400);
        assert!((c.v2_log - 2.0).abs() < 0.04, "{}", c.v2_log);
        assert!(c.estimator_gap() < 0.05, "{} {}", c.v2_log, c.v2_area);
        assert!(c.v_of_t.windows(2).all(|w| w[1] >= w[0]));
        assert!(c.area_of_t.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn helicoid_diverges() {
        let h = estimate("helicoid", 400, 200);
        assert!(h.diverged, "{:?}", h.decade_slopes);
        assert!(h.v2().is_none());
    }

    #[test]
    fn short_grid_rejected() {
        let s = Arc::new(catalog_surface("plane").unwrap());
        let g = ParamGrid::new(s.domain, 10, 10);
        assert!(matches!(projective_volume(&s, &[1.0, 50.0], &g), Err(Error::GridTooShort { .. })));
    }
}
