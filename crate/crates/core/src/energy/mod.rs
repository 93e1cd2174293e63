//! Dirichlet integrals, flows, capacities and the singular terms of tubular ends.

mod quadrature;

pub use quadrature::{CoverageQuadrature, Region};

use rayon::prelude::*;
use serde::Serialize;

use crate::bound::{BoundCheck, Relation};
use crate::geometry::{FieldSamples, ParamGrid, ScalarField};
use crate::levelset::{extract_from_samples, LevelSet};
use crate::spectra::admissible_shift;
use crate::{Error, Result};

/// Sub-cell resolution of the area quadratures.
pub const DEFAULT_SUBSAMPLES: usize = 3;
/// Allowed relative spread of the flow of a harmonic exhaustion across levels.
pub const FLOW_TOLERANCE: f64 = 0.01;

/// `(α−1)/α` for `α >= 2`, `1/α` for `1 < α < 2`.
pub fn c_alpha(alpha: f64) -> f64 {
    if alpha >= 2.0 {
        (alpha - 1.0) / alpha
    } else {
        1.0 / alpha
    }
}

/// `∫ |∇f|^α dA` over a region as a function of the exhaustion level.
pub fn dirichlet_profile(
    f: &ScalarField,
    region: Region<'_>,
    h: &ScalarField,
    alpha: f64,
    grid: &ParamGrid,
) -> CoverageQuadrature {
    CoverageQuadrature::build(h, region, grid, DEFAULT_SUBSAMPLES, |jet, u, v| {
        f.gradient_jet(jet, u, v).map(|g| g.norm().powf(alpha)).unwrap_or(0.0)
    })
}

/// `J_α(f, D ∩ B_h(t))`; without `h` the whole region is integrated.
pub fn dirichlet_integral(
    f: &ScalarField,
    region: Region<'_>,
    ball: Option<(&ScalarField, f64)>,
    alpha: f64,
    grid: &ParamGrid,
) -> f64 {
    match ball {
        Some((h, t)) => dirichlet_profile(f, region, h, alpha, grid).below(t),
        None => dirichlet_profile(f, region, f, alpha, grid).total(),
    }
}

/// Flow of the exhaustion through one level set, `∫ |∇h|^{α−1} ds`.
pub fn level_flow(levelset: &LevelSet, alpha: f64) -> f64 {
    levelset
        .components
        .iter()
        .map(|p| {
            let w: Vec<f64> = p.theta.iter().map(|t| t.powf(alpha - 1.0)).collect();
            p.integrate(&w)
        })
        .sum()
}

/// Flows of `h` at several levels and their mean.
#[derive(Clone, Debug, Serialize)]
pub struct FlowSummary {
    pub t: Vec<f64>,
    pub flows: Vec<f64>,
    pub mean: f64,
    pub max_deviation: f64,
}

/// Flows at each sampled level without the constancy check.
pub fn flow_summary(h: &ScalarField, alpha: f64, t_samples: &[f64], grid: &ParamGrid) -> Result<FlowSummary> {
    let samples = FieldSamples::new(h, grid);
    let flows = t_samples
        .par_iter()
        .map(|&t| {
            let ls = extract_from_samples(h, t, &samples)?;
            if ls.is_empty() {
                return Err(Error::EmptyLevelSet(t));
            }
            Ok(level_flow(&ls, alpha))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = flows.iter().sum::<f64>() / flows.len().max(1) as f64;
    let max_deviation = flows.iter().map(|s| ((s - mean) / mean).abs()).fold(0.0, f64::max);
    Ok(FlowSummary { t: t_samples.to_vec(), flows, mean, max_deviation })
}

/// Full flow `S(h)`: the level-averaged `∫_{Σ_h(t)} |∇h|^{α−1}`, required constant to 1%.
pub fn full_flow(h: &ScalarField, alpha: f64, t_samples: &[f64], grid: &ParamGrid) -> Result<f64> {
    let s = flow_summary(h, alpha, t_samples, grid)?;
    for (&t, &f) in s.t.iter().zip(&s.flows) {
        let dev = ((f - s.mean) / s.mean).abs();
        if !(dev <= FLOW_TOLERANCE) {
            return Err(Error::FlowNotConstant { t, deviation: dev });
        }
    }
    Ok(s.mean)
}

/// `S = (∫|∇h|^{α−1})^{1/(α−1)}`, the flow normalisation entering the capacity formula.
pub fn normalized_flow(full: f64, alpha: f64) -> f64 {
    full.powf(1.0 / (alpha - 1.0))
}

/// `(S/(t2 − t1))^{α−1}` with `S` the normalised flow.
pub fn capacity_closed_form(s: f64, t1: f64, t2: f64, alpha: f64) -> Result<f64> {
    if !(t1 < t2) {
        return Err(Error::InvalidInterval { t1, t2 });
    }
    Ok((s / (t2 - t1)).powf(alpha - 1.0))
}

/// `∫ |∇φ|^α` for `φ = (t2 − h)/(t2 − t1)` on the shell `t1 < h < t2`, optionally inside a region.
pub fn capacity_variational(
    h: &ScalarField,
    region: Region<'_>,
    t1: f64,
    t2: f64,
    alpha: f64,
    grid: &ParamGrid,
) -> Result<f64> {
    if !(t1 < t2) {
        return Err(Error::InvalidInterval { t1, t2 });
    }
    let q = CoverageQuadrature::build(h, region, grid, DEFAULT_SUBSAMPLES, |jet, u, v| {
        h.gradient_jet(jet, u, v).map(|g| g.norm().powf(alpha)).unwrap_or(0.0)
    });
    Ok(q.between(t1, t2) / (t2 - t1).powf(alpha))
}

/// `max(floor, max f)` over the vertices of a level set.
pub fn max_modulus(f: &ScalarField, levelset: &LevelSet, floor: f64) -> Result<f64> {
    if levelset.is_empty() {
        return Err(Error::EmptyLevelSet(levelset.level));
    }
    let m = levelset
        .components
        .iter()
        .flat_map(|p| p.params.iter())
        .map(|&(u, v)| f.eval(u, v))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(m.max(floor))
}

/// `∫_{Σ} |∇f|^α/|∇h| ds`, the coarea density of `J`.
pub fn coarea_density(f: &ScalarField, levelset: &LevelSet, alpha: f64) -> f64 {
    levelset
        .components
        .iter()
        .map(|p| {
            let vals: Vec<f64> = p
                .params
                .iter()
                .zip(&p.theta)
                .map(|(&(u, v), &th)| {
                    let g = crate::geometry::surface_gradient(f, u, v).map(|g| g.1).unwrap_or(0.0);
                    if th > 0.0 {
                        g.powf(alpha) / th
                    } else {
                        0.0
                    }
                })
                .collect();
            p.integrate(&vals)
        })
        .sum()
}

/// Per-cycle quantities at one level.
#[derive(Clone, Debug, Serialize)]
pub struct CycleFlow {
    /// Weighted mean of `f`.
    pub q: f64,
    /// `∫ ⟨∇f, ∇h/|∇h|⟩ ds`
    pub s_f: f64,
    /// `∫ |∇h| ds`
    pub s_h: f64,
}

/// Singular terms at one level.
#[derive(Clone, Debug, Serialize)]
pub struct SingularLevel {
    pub t: f64,
    pub cycles: Vec<CycleFlow>,
    /// `Σ S(f,Γ_j)²/S(h,Γ_j)`
    pub omega: f64,
    /// `Σ q_j S(f,Γ_j)` evaluated directly.
    pub q_direct: f64,
}

impl SingularLevel {
    pub fn total_s_f(&self) -> f64 {
        self.cycles.iter().map(|c| c.s_f).sum()
    }

    pub fn total_s_h(&self) -> f64 {
        self.cycles.iter().map(|c| c.s_h).sum()
    }
}

/// Singular terms of a harmonic `f` against a harmonic exhaustion `h` on a tubular range (`α = 2`).
#[derive(Clone, Debug, Serialize)]
pub struct SingularTerms {
    pub levels: Vec<SingularLevel>,
    /// Cumulative trapezoid of `ω`, anchored at `Q(t_0) = t_0·ω(t_0)`.
    pub q: Vec<f64>,
}

impl SingularTerms {
    pub fn t(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.t).collect()
    }

    pub fn omega(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.omega).collect()
    }
}

fn singular_level(f: &ScalarField, h: &ScalarField, ls: &LevelSet) -> Result<SingularLevel> {
    if ls.open_arcs().next().is_some() {
        return Err(Error::NotTubular(ls.level));
    }
    let cycles = ls
        .components
        .iter()
        .map(|p| {
            let phi: Vec<f64> = p.params.iter().map(|&(u, v)| f.eval(u, v)).collect();
            let q = admissible_shift(p, &phi, 2.0)?;
            let flux: Vec<f64> = p
                .params
                .iter()
                .map(|&(u, v)| {
                    let jet = h.surface.jet(u, v);
                    let gf = f.gradient_jet(&jet, u, v)?;
                    let gh = h.gradient_jet(&jet, u, v)?;
                    let n = gh.norm();
                    Ok(if n > 0.0 { gf.dot(&gh) / n } else { 0.0 })
                })
                .collect::<Result<_>>()?;
            Ok(CycleFlow { q, s_f: p.integrate(&flux), s_h: p.theta_mass() })
        })
        .collect::<Result<Vec<_>>>()?;
    let omega = cycles.iter().filter(|c| c.s_h > 0.0).map(|c| c.s_f * c.s_f / c.s_h).sum();
    let q_direct = cycles.iter().map(|c| c.q * c.s_f).sum();
    Ok(SingularLevel { t: ls.level, cycles, omega, q_direct })
}

/// `q_j`, flows, `ω(t)` and `Q(t)` on an increasing grid of regular levels.
pub fn singular_terms(f: &ScalarField, h: &ScalarField, t_grid: &[f64], grid: &ParamGrid) -> Result<SingularTerms> {
    let samples = FieldSamples::new(h, grid);
    let levels = t_grid
        .par_iter()
        .map(|&t| {
            let ls = extract_from_samples(h, t, &samples)?;
            if ls.is_empty() {
                return Err(Error::EmptyLevelSet(t));
            }
            singular_level(f, h, &ls)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut q = Vec::with_capacity(levels.len());
    if let Some(first) = levels.first() {
        q.push(first.t * first.omega);
    }
    for w in levels.windows(2) {
        let last = *q.last().unwrap();
        q.push(last + 0.5 * (w[0].omega + w[1].omega) * (w[1].t - w[0].t));
    }
    Ok(SingularTerms { levels, q })
}

/// Sampled `t ↦ J, M, Q, ω` with the full flow of the exhaustion.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyProfile {
    pub alpha: f64,
    pub c_alpha: f64,
    pub t_grid: Vec<f64>,
    pub j: Vec<f64>,
    pub m: Vec<f64>,
    pub q: Option<Vec<f64>>,
    pub omega: Option<Vec<f64>>,
    pub s_h: Option<f64>,
    pub flows_per_cycle: Option<Vec<Vec<CycleFlow>>>,
}

impl EnergyProfile {
    /// Rows `t,J,M,Q,omega,S_h`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,J,M,Q,omega,S_h\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for k in 0..self.t_grid.len() {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.t_grid[k],
                self.j[k],
                self.m[k],
                opt(self.q.as_ref().map(|q| q[k])),
                opt(self.omega.as_ref().map(|w| w[k])),
                opt(self.s_h)
            ));
        }
        s
    }
}

/// Builds the profile of `f` over the whole chart against exhaustion `h`.
///
/// Singular terms and the full flow are filled in only when every sampled level is a union of
/// cycles and `α = 2`.
pub fn energy_profile(
    f: &ScalarField,
    h: &ScalarField,
    alpha: f64,
    t_grid: &[f64],
    grid: &ParamGrid,
) -> Result<EnergyProfile> {
    let jq = dirichlet_profile(f, Region::Whole, h, alpha, grid);
    let j = t_grid.iter().map(|&t| jq.below(t)).collect();
    let samples = FieldSamples::new(h, grid);
    let levels = t_grid.par_iter().map(|&t| extract_from_samples(h, t, &samples)).collect::<Result<Vec<_>>>()?;
    let m = levels.iter().map(|ls| max_modulus(f, ls, 0.0)).collect::<Result<Vec<_>>>()?;
    let tubular = alpha == 2.0 && levels.iter().all(|ls| !ls.is_empty() && ls.open_arcs().next().is_none());
    let (q, omega, flows, s_h) = if tubular {
        let st = singular_terms(f, h, t_grid, grid)?;
        let flows: Vec<Vec<CycleFlow>> = st.levels.iter().map(|l| l.cycles.clone()).collect();
        let s_h = full_flow(h, alpha, t_grid, grid).ok();
        (Some(st.q.clone()), Some(st.omega()), Some(flows), s_h)
    } else {
        (None, None, None, full_flow(h, alpha, t_grid, grid).ok())
    };
    Ok(EnergyProfile {
        alpha,
        c_alpha: c_alpha(alpha),
        t_grid: t_grid.to_vec(),
        j,
        m,
        q,
        omega,
        s_h,
        flows_per_cycle: flows,
    })
}

/// `∫_{P(t1)} |∇f|^α ≤ α^α cap_α(P(t1), Q(t2); D) M^α(t2)` on a superlevel component.
///
/// The capacity is replaced by the value of the linear extremal in `h`, an upper bound.
pub fn dirichlet_capacity_check(
    f: &ScalarField,
    h: &ScalarField,
    region: Region<'_>,
    tau: f64,
    t1: f64,
    t2: f64,
    alpha: f64,
    grid: &ParamGrid,
) -> Result<BoundCheck> {
    let lhs = dirichlet_profile(f, region, h, alpha, grid).below(t1);
    let cap = capacity_variational(h, region, t1, t2, alpha, grid)?;
    let ls = crate::levelset::extract_level_set(h, t2, grid)?;
    let ls = match region {
        Region::Whole => ls,
        Region::Component { comps, id } => ls.restrict(&comps.field, comps.tau, Some((comps, id))),
    };
    let m = max_modulus(f, &ls, tau)?;
    let rhs = alpha.powf(alpha) * cap * m.powf(alpha);
    Ok(BoundCheck::new("dirichlet_capacity", lhs, rhs, Relation::Le, 0.02))
}

/// `J(B_h(t1)) ≤ α^α [∫_{t1}^{t2} M^{−α/(α−1)}/S dt]^{1−α}` with `M = max |f|` on `Σ_h(t)`.
pub fn dirichlet_flow_check(
    f: &ScalarField,
    h: &ScalarField,
    t1: f64,
    t2: f64,
    alpha: f64,
    steps: usize,
    grid: &ParamGrid,
) -> Result<BoundCheck> {
    if !(t1 < t2) {
        return Err(Error::InvalidInterval { t1, t2 });
    }
    let lhs = dirichlet_profile(f, Region::Whole, h, alpha, grid).below(t1);
    let samples = FieldSamples::new(h, grid);
    let n = steps.max(2);
    let ts: Vec<f64> = (0..=n).map(|k| t1 + (t2 - t1) * k as f64 / n as f64).collect();
    let abs_f = match &f.kind {
        crate::geometry::FieldKind::Coordinate(e) => ScalarField::abs_coordinate(f.surface.clone(), *e),
        _ => {
            let g = f.clone();
            ScalarField::custom(f.surface.clone(), move |u, v| g.eval(u, v).abs())
        }
    };
    let integrand = ts
        .par_iter()
        .map(|&t| {
            let ls = extract_from_samples(h, t, &samples)?;
            let m = max_modulus(&abs_f, &ls, 0.0)?;
            let s = normalized_flow(level_flow(&ls, alpha), alpha);
            Ok(m.powf(-alpha / (alpha - 1.0)) / s)
        })
        .collect::<Result<Vec<f64>>>()?;
    let dt = (t2 - t1) / n as f64;
    let integral: f64 = integrand.windows(2).map(|w| 0.5 * (w[0] + w[1]) * dt).sum();
    let rhs = alpha.powf(alpha) * integral.powf(1.0 - alpha);
    Ok(BoundCheck::new("dirichlet_flow", lhs, rhs, Relation::Le, 0.02))
}
