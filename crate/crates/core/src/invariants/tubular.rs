use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::bound::{BoundCheck, Relation};
use crate::energy::{dirichlet_profile, full_flow, singular_terms, Region, SingularTerms};
use crate::geometry::{FieldSamples, ParamGrid, ScalarField};
use crate::levelset::extract_from_samples;
use crate::spectra::{fundamental_frequency, FrequencySpec};
use crate::Result;

/// `Q/J` at the top level below which the vanishing-ratio hypothesis counts as holding.
pub const CONDITION_TOLERANCE: f64 = 1e-6;
/// Relative tolerance of the growth bound.
pub const GROWTH_TOLERANCE: f64 = 0.05;
/// Relative tolerance of the per-level frequency identity.
pub const FREQUENCY_TOLERANCE: f64 = 0.01;

#[derive(Clone, Debug, Serialize)]
pub struct TubularReport {
    pub t_grid: Vec<f64>,
    pub j: Vec<f64>,
    pub q: Vec<f64>,
    pub q_over_j: Vec<f64>,
    /// Full flow of the exhaustion.
    pub s_h: f64,
    /// `8π/S(h)`
    pub bound: f64,
    /// `ln J(t)/t` at the largest sampled level.
    pub ln_j_over_t: f64,
    pub condition_holds: bool,
    /// Present only when the hypothesis holds.
    pub growth: Option<BoundCheck>,
    /// `λ_h(Σ_h(t)) = 2π min_j 1/S(h,Γ_j)` per level.
    pub lambda_h: Vec<f64>,
    /// `λ_h(Σ_h(t)) ≥ 4π/S(h)` per level.
    pub frequency_checks: Vec<BoundCheck>,
    #[serde(skip)]
    pub singular: SingularTerms,
}

impl TubularReport {
    /// Rows `t,J,Q,Q_over_J,lambda_h`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,J,Q,Q_over_J,lambda_h\n");
        for k in 0..self.t_grid.len() {
            s.push_str(&format!(
                "{},{:e},{:e},{:e},{}\n",
                self.t_grid[k], self.j[k], self.q[k], self.q_over_j[k], self.lambda_h[k]
            ));
        }
        s
    }
}

/// Growth of `J(t)` for a harmonic `f` on a tubular range of a harmonic exhaustion `h` (`α = 2`).
pub fn tubular_growth_check(
    f: &ScalarField,
    h: &ScalarField,
    t_grid: &[f64],
    grid: &ParamGrid,
) -> Result<TubularReport> {
    let st = singular_terms(f, h, t_grid, grid)?;
    let s_h = full_flow(h, 2.0, t_grid, grid)?;
    let prof = dirichlet_profile(f, Region::Whole, h, 2.0, grid);
    let j: Vec<f64> = t_grid.iter().map(|&t| prof.below(t)).collect();
    let q_over_j: Vec<f64> = st.q.iter().zip(&j).map(|(q, j)| if *j > 0.0 { q / j } else { f64::INFINITY }).collect();
    let bound = 8.0 * PI / s_h;
    let (t_top, j_top) = (*t_grid.last().unwrap_or(&0.0), *j.last().unwrap_or(&0.0));
    let ln_j_over_t = j_top.ln() / t_top;
    let condition_holds = q_over_j.last().is_some_and(|r| *r < CONDITION_TOLERANCE);
    let growth =
        condition_holds.then(|| BoundCheck::new("tubular_growth", ln_j_over_t, bound, Relation::Ge, GROWTH_TOLERANCE));

    let samples = FieldSamples::new(h, grid);
    let spec = FrequencySpec::plain(2.0);
    let lambda_h = t_grid
        .par_iter()
        .map(|&t| Ok(fundamental_frequency(&extract_from_samples(h, t, &samples)?, &spec)?.lambda))
        .collect::<Result<Vec<f64>>>()?;
    let floor = 4.0 * PI / s_h;
    let frequency_checks = t_grid
        .iter()
        .zip(&lambda_h)
        .map(|(t, &l)| BoundCheck::new(format!("cycle_frequency@{t}"), l, floor, Relation::Ge, FREQUENCY_TOLERANCE))
        .collect();
    Ok(TubularReport {
        t_grid: t_grid.to_vec(),
        j,
        q: st.q.clone(),
        q_over_j,
        s_h,
        bound,
        ln_j_over_t,
        condition_holds,
        growth,
        lambda_h,
        frequency_checks,
        singular: st,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{catalog_surface, Domain, Vec3};
    use crate::util::lin_space;
    use std::sync::Arc;

    fn catenoid(vmax: f64) -> Arc<crate::geometry::SurfaceChart> {
        let c = catalog_surface("catenoid").unwrap();
        Arc::new(c.with_domain(Domain::new([0.0, 2.0 * PI], [-vmax, vmax]).periodic_in_u()))
    }

    #[test]
    fn equality_case_and_failing_hypothesis() {
        let c = catenoid(9.0);
        let g = ParamGrid::new(c.domain, 96, 360);
        let h = ScalarField::abs_coordinate(c.clone(), Vec3::z());
        let ts = lin_space(1.0, 8.0, 15);

        let r = tubular_growth_check(&ScalarField::coordinate(c.clone(), Vec3::x()), &h, &ts, &g).unwrap();
        assert!((r.s_h - 4.0 * PI).abs() < 0.01 * 4.0 * PI);
        // J(t) = π sinh 2t
        let exact = (PI * 16f64.sinh()).ln() / 8.0;
        assert!((r.ln_j_over_t - exact).abs() < 1e-3 * exact, "{} {exact}", r.ln_j_over_t);
        assert!((r.ln_j_over_t - 2.0).abs() < 0.05 * 2.0);
        assert!(r.condition_holds);
        assert!(r.growth.as_ref().unwrap().satisfied);
        assert!(r.frequency_checks.iter().all(|c| c.satisfied));
        assert!(r.lambda_h.iter().all(|l| (l - 1.0).abs() < 0.01));

        let r3 = tubular_growth_check(&ScalarField::coordinate(c.clone(), Vec3::z()), &h, &ts, &g).unwrap();
        assert!(!r3.condition_holds);
        assert!(r3.growth.is_none());
        assert!((r3.q_over_j.last().unwrap() - 1.0).abs() < 0.01, "{:?}", r3.q_over_j);
    }
}
