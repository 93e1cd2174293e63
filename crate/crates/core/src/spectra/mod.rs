//! Weighted fundamental frequencies of one-dimensional level sets.

mod oracle;

pub use oracle::rayleigh_oracle;

use std::f64::consts::PI;

use serde::Serialize;

use crate::levelset::{LevelSet, Polyline};
use crate::{Error, Result};

/// Weights below this are treated as vanishing.
pub const THETA_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrequencySpec {
    pub alpha: f64,
    /// Report `λ*`, which vanishes as soon as a cycle is present.
    pub reduced: bool,
}

impl FrequencySpec {
    pub fn reduced(alpha: f64) -> Self {
        FrequencySpec { alpha, reduced: true }
    }

    pub fn plain(alpha: f64) -> Self {
        FrequencySpec { alpha, reduced: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyMethod {
    WirtingerClosedForm,
    RayleighOracle,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyResult {
    pub lambda: f64,
    /// `(component index, λ_i)`.
    pub per_component: Vec<(usize, f64)>,
    pub method: FrequencyMethod,
}

fn check_theta(p: &Polyline) -> Result<()> {
    match p.theta.iter().position(|&t| !(t >= THETA_FLOOR)) {
        Some(k) => Err(Error::UndefinedFrequency(format!("weight {} below floor at vertex {k}", p.theta[k]))),
        None => Ok(()),
    }
}

/// Closed-form frequency of one component: `π/∫θ` for arcs, `2π/∫θ` for cycles.
pub fn component_frequency(p: &Polyline) -> Result<f64> {
    check_theta(p)?;
    let mass = p.theta_mass();
    if !(mass > 0.0) {
        return Err(Error::UndefinedFrequency("component has zero weighted length".into()));
    }
    Ok(if p.closed { 2.0 * PI / mass } else { PI / mass })
}

/// `λ_{2,θ}` (or `λ*`) of a level set from the one-dimensional Wirtinger inequalities.
pub fn fundamental_frequency(levelset: &LevelSet, spec: &FrequencySpec) -> Result<FrequencyResult> {
    if !(spec.alpha > 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must exceed 1, got {}", spec.alpha)));
    }
    if spec.alpha != 2.0 {
        return Err(Error::UndefinedFrequency(format!("closed form requires alpha = 2, got {}", spec.alpha)));
    }
    if levelset.is_empty() {
        return Err(Error::UndefinedFrequency(format!("empty level set at t = {}", levelset.level)));
    }
    let per_component = levelset
        .components
        .iter()
        .enumerate()
        .map(|(k, p)| component_frequency(p).map(|l| (k, l)))
        .collect::<Result<Vec<_>>>()?;
    let lambda = if spec.reduced && levelset.has_cycles() {
        0.0
    } else {
        per_component.iter().map(|c| c.1).fold(f64::INFINITY, f64::min)
    };
    Ok(FrequencyResult { lambda, per_component, method: FrequencyMethod::WirtingerClosedForm })
}

/// Certified lower bound for the `N`-mean of the reduced frequency.
///
/// Cycles kept whole contribute zero; every other part is a union of arcs whose frequency is at
/// least `π/mass`. Minimising over how many parts absorb a cycle gives the bound. Without cycles
/// it is `πN/∫θ`, the exact value for a single arc.
pub fn n_mean_lower_bound(levelset: &LevelSet, n: usize) -> f64 {
    let mut cycles: Vec<f64> = levelset.cycles().map(Polyline::theta_mass).collect();
    let open: f64 = levelset.open_arcs().map(Polyline::theta_mass).sum();
    n_mean_bound_from_masses(&mut cycles, open, n)
}

/// Same bound from cycle masses and the total open-arc mass.
pub fn n_mean_bound_from_masses(cycles: &mut [f64], open: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    cycles.sort_by(f64::total_cmp);
    let total: f64 = open + cycles.iter().sum::<f64>();
    let c = cycles.len();
    if c >= n {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    let mut reserved = 0.0;
    for j in 0..=c {
        if j > 0 {
            reserved += cycles[j - 1];
        }
        let avail = total - reserved;
        if avail > 0.0 && (j < c || open > 0.0) {
            let k = (n - j) as f64;
            best = best.min(PI * k * k / (n as f64 * avail));
        }
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}

/// Root `ξ` of `∫ |ξ − φ|^{α−2}(ξ − φ) θ ds = 0` on a component; the weighted mean for `α = 2`.
pub fn admissible_shift(component: &Polyline, phi: &[f64], alpha: f64) -> Result<f64> {
    if phi.len() != component.len() {
        return Err(Error::InvalidArgument("one φ sample per vertex required".into()));
    }
    if !(alpha > 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must exceed 1, got {alpha}")));
    }
    let w: Vec<f64> = component.theta.clone();
    let mass = component.integrate(&w);
    if !(mass > 0.0) {
        return Err(Error::UndefinedFrequency("component has zero weighted length".into()));
    }
    let (mut lo, mut hi) = phi.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if hi == lo {
        return Ok(lo);
    }
    if alpha == 2.0 {
        let prod: Vec<f64> = phi.iter().zip(&w).map(|(a, b)| a * b).collect();
        return Ok(component.integrate(&prod) / mass);
    }
    let resid = |xi: f64| {
        let g: Vec<f64> = phi
            .iter()
            .zip(&w)
            .map(|(&p, &t)| {
                let d = xi - p;
                d.abs().powf(alpha - 2.0) * d * t
            })
            .collect();
        component.integrate(&g)
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = resid(mid);
        if r == 0.0 || hi - lo <= 4.0 * f64::EPSILON * (1.0 + mid.abs()) {
            return Ok(mid);
        }
        if r > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `inf_s −(fθ)^{1−α} d/ds(|f'|^{α−2} f'/θ)` on a component, a lower bound for `λ^α`.
///
/// Arcs use interior vertices only; cycles wrap around.
pub fn yau_lower_bound(component: &Polyline, alpha: f64, f: &[f64]) -> Result<f64> {
    let n = component.len();
    if f.len() != n {
        return Err(Error::InvalidArgument("one test-function sample per vertex required".into()));
    }
    if n < 3 {
        return Err(Error::InvalidArgument("component needs at least three vertices".into()));
    }
    let h = component.segment_lengths();
    let th = &component.theta;
    let m = h.len();
    let flux = |k: usize| {
        let d = (f[k + 1] - f[k]) / h[k];
        let tm = 0.5 * (th[k] + th[k + 1]);
        d.abs().powf(alpha - 2.0) * d / tm
    };
    let indices: Vec<usize> = if component.closed { (0..m).collect() } else { (1..n - 1).collect() };
    let mut best = f64::INFINITY;
    for &k in &indices {
        if !(f[k] > 0.0) {
            return Err(Error::NonPositiveTestFunction { index: k, value: f[k] });
        }
        let (prev, next) = if k == 0 { (m - 1, 0) } else { (k - 1, k) };
        let div = (flux(next) - flux(prev)) / (0.5 * (h[next] + h[prev]));
        let val = -div / (f[k] * th[k]).powf(alpha - 1.0);
        best = best.min(val);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{catalog_surface, ParamGrid, ScalarField, Vec3};
    use crate::levelset::extract_level_set;
    use approx::assert_relative_eq;

    pub(crate) fn arc(len: f64, theta: f64, n: usize) -> Polyline {
        let pts = (0..=n).map(|k| Vec3::new(len * k as f64 / n as f64, 0.0, 0.0)).collect();
        Polyline::synthetic(pts, vec![theta; n + 1], false)
    }

    pub(crate) fn circle(len: f64, theta: f64, n: usize) -> Polyline {
        let r = len / (2.0 * PI);
        let pts = (0..=n)
            .map(|k| {
                let a = 2.0 * PI * (k % n) as f64 / n as f64;
                Vec3::new(r * a.cos(), r * a.sin(), 0.0)
            })
            .collect();
        Polyline::synthetic(pts, vec![theta; n + 1], true)
    }

    fn set_of(components: Vec<Polyline>) -> LevelSet {
        let c = catalog_surface("plane").unwrap();
        let g = ParamGrid::new(c.domain, 1, 1);
        LevelSet { field: ScalarField::norm(c), level: 1.0, grid: g, components }
    }

    #[test]
    fn closed_forms() {
        let a = set_of(vec![arc(PI, 1.0, 10)]);
        let r = fundamental_frequency(&a, &FrequencySpec::reduced(2.0)).unwrap();
        assert_relative_eq!(r.lambda, 1.0, max_relative = 1e-12);
        // polygon perimeter stands in for 2π; use the exact mass for the value
        let c = circle(2.0 * PI, 1.0, 4096);
        let m = c.theta_mass();
        let r = fundamental_frequency(&set_of(vec![c]), &FrequencySpec::plain(2.0)).unwrap();
        assert_relative_eq!(r.lambda, 2.0 * PI / m, max_relative = 1e-12);
        assert_relative_eq!(r.lambda, 1.0, max_relative = 1e-5);
        let r = fundamental_frequency(
            &set_of(vec![circle(2.0 * PI, 1.0, 64), arc(1.0, 1.0, 4)]),
            &FrequencySpec::reduced(2.0),
        )
        .unwrap();
        assert_eq!(r.lambda, 0.0);
        assert!(fundamental_frequency(&set_of(vec![]), &FrequencySpec::reduced(2.0)).is_err());
        assert!(fundamental_frequency(&a, &FrequencySpec::reduced(3.0)).is_err());
    }

    #[test]
    fn decomposition_takes_minimum() {
        let s = set_of(vec![arc(1.0, 1.0, 4), arc(3.0, 1.0, 4), arc(2.0, 0.5, 4)]);
        let r = fundamental_frequency(&s, &FrequencySpec::reduced(2.0)).unwrap();
        assert_relative_eq!(r.lambda, PI / 3.0, max_relative = 1e-12);
        assert_eq!(r.per_component.len(), 3);
    }

    #[test]
    fn catenoid_height_levels_have_unit_frequency() {
        let c = catalog_surface("catenoid").unwrap();
        let h = ScalarField::abs_coordinate(c.clone(), Vec3::z());
        let g = ParamGrid::new(c.domain, 256, 60);
        for t in [0.35, 1.1, 2.3] {
            let ls = extract_level_set(&h, t, &g).unwrap();
            let r = fundamental_frequency(&ls, &FrequencySpec::plain(2.0)).unwrap();
            assert_relative_eq!(r.lambda, 1.0, max_relative = 1e-3);
        }
    }

    #[test]
    fn n_mean_bounds() {
        let a = set_of(vec![arc(PI, 1.0, 8)]);
        assert_relative_eq!(n_mean_lower_bound(&a, 1), 1.0, max_relative = 1e-12);
        assert_relative_eq!(n_mean_lower_bound(&a, 2), 2.0, max_relative = 1e-12);
        let cycles = set_of(vec![circle(1.0, 1.0, 16), circle(2.0, 1.0, 16), arc(1.0, 1.0, 4)]);
        assert_eq!(n_mean_lower_bound(&cycles, 2), 0.0);
        assert_eq!(n_mean_lower_bound(&cycles, 1), 0.0);
        assert!(n_mean_lower_bound(&cycles, 3) > 0.0);
        let line = set_of(vec![arc(2.0 * 7.5, 1.0, 8)]);
        assert_relative_eq!(n_mean_lower_bound(&line, 1), PI / 15.0, max_relative = 1e-12);
        for n in 1..8 {
            assert!(n_mean_lower_bound(&a, n) <= n_mean_lower_bound(&a, n + 1));
        }
    }

    #[test]
    fn shifts() {
        let c = circle(2.0 * PI, 1.0, 256);
        let s = c.params.clone();
        for alpha in [1.5, 2.0, 3.0, 4.5] {
            assert_relative_eq!(admissible_shift(&c, &vec![1.7; c.len()], alpha).unwrap(), 1.7);
        }
        let phi: Vec<f64> = (0..s.len()).map(|k| (2.0 * PI * k as f64 / 256.0).cos()).collect();
        assert!(admissible_shift(&c, &phi, 2.0).unwrap().abs() < 1e-12);
        let seg = arc(1.0, 1.0, 200);
        let phi: Vec<f64> = seg.arclength();
        assert_relative_eq!(admissible_shift(&seg, &phi, 3.0).unwrap(), 0.5, epsilon = 1e-12);
        // bisection oracle on an asymmetric profile
        let phi: Vec<f64> = seg.arclength().iter().map(|x| x * x).collect();
        let xi = admissible_shift(&seg, &phi, 3.0).unwrap();
        let g: Vec<f64> = phi.iter().map(|p| (xi - p).abs() * (xi - p)).collect();
        assert!(seg.integrate(&g).abs() < 1e-10);
    }

    #[test]
    fn yau_examples() {
        let l = 2.0;
        let a = arc(l, 1.0, 400);
        let f: Vec<f64> = a.arclength().iter().map(|s| (PI * s / l).sin()).collect();
        assert_relative_eq!(yau_lower_bound(&a, 2.0, &f).unwrap(), (PI / l).powi(2), max_relative = 1e-4);
        let f: Vec<f64> = a.arclength().iter().map(|s| 1.0 + s).collect();
        assert!(yau_lower_bound(&a, 2.0, &f).unwrap().abs() < 1e-9);
        let c = circle(2.0 * PI, 1.0, 720);
        let f: Vec<f64> = (0..c.len()).map(|k| 2.0 + (2.0 * PI * k as f64 / 720.0).cos()).collect();
        assert_relative_eq!(yau_lower_bound(&c, 2.0, &f).unwrap(), -1.0, epsilon = 1e-3);
        let bad: Vec<f64> = a.arclength().iter().map(|s| s - 1.0).collect();
        assert!(matches!(yau_lower_bound(&a, 2.0, &bad), Err(Error::NonPositiveTestFunction { .. })));
    }
}
