//! Asymptotic tracts of subharmonic fields: nested superlevel components, their
//! regular/singular classification, hump counts and growth inequalities.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::bound::{BoundCheck, Relation};
use crate::energy::{c_alpha, dirichlet_profile, level_flow, max_modulus, CoverageQuadrature, Region};
use crate::geometry::{FieldSamples, ParamGrid, ScalarField, SurfaceChart, Vec3};
use crate::levelset::{components_from_samples, extract_from_samples, LevelSet, SuperlevelComponents};
use crate::spectra::{fundamental_frequency, n_mean_lower_bound, FrequencySpec};
use crate::util::{lin_space, log_space, ls_slope};
use crate::{Error, Result};

/// Tolerance of the growth inequalities, covering quadrature slack.
pub const INEQUALITY_TOLERANCE: f64 = 0.05;
/// Number of cofinal windows sampled by the regularity classification.
pub const COFINAL_WINDOWS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularity {
    Regular,
    Singular,
    Undetermined,
}

/// One superlevel component at one threshold.
#[derive(Clone, Debug, Serialize)]
pub struct ForestNode {
    pub component: usize,
    /// Containing component at the previous threshold.
    pub parent: Option<usize>,
    pub size: usize,
    pub representative: (f64, f64),
    pub max_value: f64,
    pub touches_boundary: bool,
    pub max_near_rim: bool,
}

/// Cycle census of one section `D(τ₀) ∩ Σ_h(t)`.
#[derive(Clone, Debug, Serialize)]
pub struct SectionSample {
    pub t: f64,
    pub cycles: usize,
    pub arcs: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CofinalWindow {
    pub t_lo: f64,
    pub t_hi: f64,
    pub samples: Vec<SectionSample>,
}

impl CofinalWindow {
    pub fn cycle_free(&self) -> bool {
        !self.samples.is_empty() && self.samples.iter().all(|s| s.cycles == 0 && s.arcs > 0)
    }

    pub fn all_cyclic(&self) -> bool {
        !self.samples.is_empty() && self.samples.iter().all(|s| s.cycles > 0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TractClassification {
    pub regularity: Regularity,
    pub windows: Vec<CofinalWindow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Tract {
    pub id: usize,
    /// Component index at each threshold of the forest.
    pub chain: Vec<usize>,
    /// Boundary contact survives on the chart enlarged twice.
    pub persists_enlarged: bool,
    pub classification: Option<TractClassification>,
}

/// Superlevel components of `f` over an increasing threshold grid, linked by containment.
#[derive(Clone, Debug, Serialize)]
pub struct TractForest {
    pub tau_grid: Vec<f64>,
    pub nodes: Vec<Vec<ForestNode>>,
    pub tracts: Vec<Tract>,
    #[serde(skip)]
    pub levels: Vec<SuperlevelComponents>,
}

impl TractForest {
    pub fn tract_count(&self) -> usize {
        self.tracts.len()
    }

    /// Component ids at the largest threshold that carry a tract.
    pub fn leaves_at_top(&self) -> Vec<usize> {
        self.tracts.iter().filter_map(|t| t.chain.last().copied()).collect()
    }

    /// Element `D(τ_k)` of a tract as an integration region.
    pub fn element(&self, tract: usize, k: usize) -> Region<'_> {
        Region::Component { comps: &self.levels[k], id: self.tracts[tract].chain[k] }
    }

    /// First threshold index at which all tract elements are distinct components.
    pub fn separating_level(&self) -> usize {
        (0..self.tau_grid.len())
            .find(|&k| {
                let mut ids: Vec<usize> = self.tracts.iter().map(|t| t.chain[k]).collect();
                ids.sort_unstable();
                ids.windows(2).all(|w| w[0] != w[1])
            })
            .unwrap_or(self.tau_grid.len().saturating_sub(1))
    }

    pub fn regular_count(&self) -> usize {
        self.tracts
            .iter()
            .filter(|t| t.classification.as_ref().is_some_and(|c| c.regularity == Regularity::Regular))
            .count()
    }

    /// Every child lies inside its parent and every maximum sits within one node of the rim.
    pub fn nesting_holds(&self) -> bool {
        let nested = (1..self.levels.len()).all(|k| {
            self.levels[k].components.iter().all(|c| {
                let Some(p) = self.nodes[k][c.id].parent else { return false };
                c.nodes.iter().all(|&n| self.levels[k - 1].labels[n] == Some(p))
            })
        });
        nested && self.levels.iter().all(|l| l.components.iter().all(|c| c.max_near_rim))
    }
}

fn check_threshold(samples: &FieldSamples, tau: f64) -> Result<()> {
    let (lo, hi) = samples.range();
    let eps_node = 1e-6 * (hi - lo).max(f64::MIN_POSITIVE);
    let eps_crit = 1e-4 * samples.max_grad();
    let critical =
        samples.values.iter().zip(&samples.grad_norm).any(|(&f, &g)| (f - tau).abs() < eps_node && !(g >= eps_crit));
    if critical {
        Err(Error::CriticalThreshold(tau))
    } else {
        Ok(())
    }
}

fn enlarged_field(f: &ScalarField, k: f64) -> ScalarField {
    let chart: SurfaceChart = (*f.surface).clone();
    let dom = chart.domain.enlarged(k);
    f.on(chart.with_domain(dom))
}

/// Labels `{f > τ}` for every threshold and links each component to its container one step down.
///
/// Only chains reaching the largest threshold while touching the truncation box are kept as tracts.
pub fn build_tract_forest(f: &ScalarField, tau_grid: &[f64], grid: &ParamGrid) -> Result<TractForest> {
    if tau_grid.windows(2).any(|w| !(w[0] < w[1])) || tau_grid.is_empty() {
        return Err(Error::InvalidArgument("tau grid must be non-empty and increasing".into()));
    }
    let samples = FieldSamples::new(f, grid);
    for &tau in tau_grid {
        check_threshold(&samples, tau)?;
    }
    let levels: Vec<SuperlevelComponents> =
        tau_grid.par_iter().map(|&tau| components_from_samples(f, tau, &samples)).collect();
    let mut nodes: Vec<Vec<ForestNode>> = Vec::with_capacity(levels.len());
    for (k, lvl) in levels.iter().enumerate() {
        let row = lvl
            .components
            .iter()
            .map(|c| ForestNode {
                component: c.id,
                parent: if k == 0 { None } else { lvl.parent_in(&levels[k - 1], c.id) },
                size: c.nodes.len(),
                representative: c.representative,
                max_value: c.max_value,
                touches_boundary: c.touches_boundary,
                max_near_rim: c.max_near_rim,
            })
            .collect();
        nodes.push(row);
    }

    // Boundary contact must persist when the chart grows.
    let top = levels.len() - 1;
    let big_field = enlarged_field(f, 2.0);
    let big_grid = ParamGrid::new(big_field.surface.domain, grid.nu * 2, grid.nv * 2);
    let big = components_from_samples(&big_field, tau_grid[top], &FieldSamples::new(&big_field, &big_grid));

    let mut tracts = Vec::new();
    for leaf in &levels[top].components {
        let mut chain = vec![leaf.id];
        let mut alive = leaf.touches_boundary;
        for k in (1..=top).rev() {
            match nodes[k][chain[0]].parent {
                Some(p) => {
                    alive &= levels[k - 1].components[p].touches_boundary;
                    chain.insert(0, p);
                }
                None => {
                    alive = false;
                    break;
                }
            }
        }
        if !alive {
            continue;
        }
        let (u, v) = leaf.representative;
        let persists_enlarged = big.component_at(u, v).is_some_and(|id| big.components[id].touches_boundary);
        tracts.push(Tract { id: tracts.len(), chain, persists_enlarged, classification: None });
    }
    Ok(TractForest { tau_grid: tau_grid.to_vec(), nodes, tracts, levels })
}

/// `COFINAL_WINDOWS` log-spaced windows over `[t_lo, t_hi]`, `per_window` samples each.
pub fn cofinal_samples(t_lo: f64, t_hi: f64, per_window: usize) -> Vec<f64> {
    let edges = log_space(t_lo, t_hi, COFINAL_WINDOWS + 1);
    let n = per_window.max(1);
    edges.windows(2).flat_map(|w| (0..n).map(move |k| w[0] * (w[1] / w[0]).powf((k as f64 + 0.5) / n as f64))).collect()
}

/// Sections `D(τ₀) ∩ Σ_h(t)` of the level set, restricted to one component.
fn section(
    h_samples: &FieldSamples,
    h: &ScalarField,
    comps: &SuperlevelComponents,
    id: usize,
    t: f64,
) -> Result<LevelSet> {
    let ls = extract_from_samples(h, t, h_samples)?;
    Ok(ls.restrict(&comps.field, comps.tau, Some((comps, id))))
}

/// Regular when the upper half of the cofinal windows is cycle-free, singular when every section
/// there carries a cycle.
pub fn classify_tract(forest: &TractForest, tract: usize, h: &ScalarField, t_samples: &[f64]) -> TractClassification {
    let comps = &forest.levels[0];
    let id = forest.tracts[tract].chain[0];
    let h = h.on(comps.field.surface.clone());
    let h_samples = FieldSamples::new(&h, &comps.grid);
    let mut ts = t_samples.to_vec();
    ts.sort_by(f64::total_cmp);
    let census: Vec<Option<SectionSample>> = ts
        .par_iter()
        .map(|&t| {
            // A near-critical sample is skipped rather than reported.
            let sec = section(&h_samples, &h, comps, id, t).ok()?;
            let cycles = sec.cycles().count();
            Some(SectionSample { t, cycles, arcs: sec.components.len() - cycles })
        })
        .collect();
    let per = ts.len().div_ceil(COFINAL_WINDOWS).max(1);
    let windows: Vec<CofinalWindow> = ts
        .chunks(per)
        .zip(census.chunks(per))
        .map(|(t, c)| CofinalWindow {
            t_lo: t[0],
            t_hi: t[t.len() - 1],
            samples: c.iter().flatten().cloned().collect(),
        })
        .collect();
    let tail = &windows[windows.len() / 2..];
    let regularity = if tail.is_empty() {
        Regularity::Undetermined
    } else if tail.iter().all(CofinalWindow::cycle_free) {
        Regularity::Regular
    } else if tail.iter().all(CofinalWindow::all_cyclic) {
        Regularity::Singular
    } else {
        Regularity::Undetermined
    };
    TractClassification { regularity, windows }
}

/// Classifies every tract of the forest in place.
pub fn classify_all(forest: &mut TractForest, h: &ScalarField, t_samples: &[f64]) {
    let out: Vec<TractClassification> =
        (0..forest.tracts.len()).map(|k| classify_tract(forest, k, h, t_samples)).collect();
    for (t, c) in forest.tracts.iter_mut().zip(out) {
        t.classification = Some(c);
    }
}

/// Hump count `N(Π₁; Π₂)` for the slab `|⟨x, e⟩| ≤ a`.
#[derive(Clone, Debug, Serialize)]
pub struct HumpCount {
    pub a: f64,
    pub count: usize,
    pub above: usize,
    pub below: usize,
    /// Levels of `⟨x, e⟩` whose sections were checked for compact components.
    pub levels_checked: usize,
}

/// Levels of `⟨x, e⟩` probed by the regular-direction check.
pub const DIRECTION_PROBES: usize = 17;

/// Fails with `NotRegular` if some sampled section `⟨x, e⟩ = c` has a closed component.
pub fn check_regular_direction(f: &ScalarField, samples: &FieldSamples) -> Result<usize> {
    let (lo, hi) = samples.range();
    if !(hi > lo) {
        return Ok(0);
    }
    let pad = 0.02 * (hi - lo);
    let mut checked = 0;
    for c in lin_space(lo + pad, hi - pad, DIRECTION_PROBES) {
        let Ok(ls) = extract_from_samples(f, c, samples) else { continue };
        checked += 1;
        if ls.has_cycles() {
            return Err(Error::NotRegular { level: c });
        }
    }
    Ok(checked)
}

/// Components of `{|⟨x, e⟩| > a}` touching the truncation box.
pub fn hump_count(surface: Arc<SurfaceChart>, e: Vec3, a: f64, grid: &ParamGrid) -> Result<HumpCount> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!("slab half-width must be positive, got {a}")));
    }
    let e = e.try_normalize(1e-300).ok_or_else(|| Error::InvalidArgument("zero direction".into()))?;
    let f = ScalarField::coordinate(surface.clone(), e);
    let samples = FieldSamples::new(&f, grid);
    let levels_checked = check_regular_direction(&f, &samples)?;
    let g = ScalarField::coordinate(surface, -e);
    let neg = FieldSamples { values: samples.values.iter().map(|x| -x).collect(), ..samples.clone() };
    let above = components_from_samples(&f, a, &samples).non_compact().count();
    let below = components_from_samples(&g, a, &neg).non_compact().count();
    Ok(HumpCount { a, count: above + below, above, below, levels_checked })
}

/// Both sides of the growth inequality on one tract element.
#[derive(Clone, Debug, Serialize)]
pub struct MainInequality {
    pub t1: f64,
    pub t2: f64,
    pub j1: f64,
    pub j2: f64,
    /// `∫ λ* dt` over `(t1, t2)`.
    pub lambda_integral: f64,
    pub check: BoundCheck,
    /// Right side with the constant `1/c(α)` in place of `c(α)`.
    pub rhs_sharp: f64,
}

/// Reduced frequency of each section, zero where the section is empty.
fn section_frequencies(
    h: &ScalarField,
    region: Option<(&SuperlevelComponents, usize)>,
    alpha: f64,
    ts: &[f64],
    grid: &ParamGrid,
) -> Result<Vec<f64>> {
    let samples = FieldSamples::new(h, grid);
    let spec = FrequencySpec::reduced(alpha);
    ts.par_iter()
        .map(|&t| {
            let ls = extract_from_samples(h, t, &samples)?;
            let ls = match region {
                Some((c, id)) => ls.restrict(&c.field, c.tau, Some((c, id))),
                None => ls,
            };
            if ls.is_empty() {
                return Ok(0.0);
            }
            Ok(fundamental_frequency(&ls, &spec)?.lambda)
        })
        .collect()
}

/// Level grid covering every pair, with the pair endpoints included.
fn pair_levels(pairs: &[(f64, f64)], steps: usize) -> Result<Vec<f64>> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no (t1, t2) pairs".into()));
    }
    if let Some(&(t1, t2)) = pairs.iter().find(|p| !(p.0 < p.1)) {
        return Err(Error::InvalidInterval { t1, t2 });
    }
    let lo = pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pairs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let mut ts = lin_space(lo, hi, steps.max(2) + 1);
    ts.extend(pairs.iter().flat_map(|p| [p.0, p.1]));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    Ok(ts)
}

/// Cumulative trapezoid of `y` over `ts`, looked up at sample points.
struct Cumulative {
    ts: Vec<f64>,
    acc: Vec<f64>,
}

impl Cumulative {
    fn new(ts: Vec<f64>, y: &[f64]) -> Self {
        let mut acc = vec![0.0];
        for k in 1..ts.len() {
            acc.push(acc[k - 1] + 0.5 * (y[k - 1] + y[k]) * (ts[k] - ts[k - 1]));
        }
        Cumulative { ts, acc }
    }

    fn between(&self, a: f64, b: f64) -> f64 {
        let at = |x: f64| self.ts.binary_search_by(|p| p.total_cmp(&x)).unwrap_or_else(|k| k.min(self.ts.len() - 1));
        self.acc[at(b)] - self.acc[at(a)]
    }
}

/// `J(D ∩ B_h(t1)) ≤ J(D ∩ B_h(t2)) exp(−c(α) ∫ λ*(Σ_h(t) ∩ D) dt)` on one superlevel component.
pub fn main_inequality_check(
    comps: &SuperlevelComponents,
    id: usize,
    f: &ScalarField,
    h: &ScalarField,
    alpha: f64,
    t1: f64,
    t2: f64,
    steps: usize,
) -> Result<MainInequality> {
    Ok(main_inequality_pairs(comps, id, f, h, alpha, &[(t1, t2)], steps)?.remove(0))
}

/// [`main_inequality_check`] at many pairs sharing one energy profile and one frequency sweep.
pub fn main_inequality_pairs(
    comps: &SuperlevelComponents,
    id: usize,
    f: &ScalarField,
    h: &ScalarField,
    alpha: f64,
    pairs: &[(f64, f64)],
    steps: usize,
) -> Result<Vec<MainInequality>> {
    let ts = pair_levels(pairs, steps)?;
    let grid = &comps.grid;
    let q = dirichlet_profile(f, Region::Component { comps, id }, h, alpha, grid);
    let lam = section_frequencies(h, Some((comps, id)), alpha, &ts, grid)?;
    let cum = Cumulative::new(ts, &lam);
    let c = c_alpha(alpha);
    Ok(pairs
        .iter()
        .map(|&(t1, t2)| {
            let (j1, j2) = (q.below(t1), q.below(t2));
            let integral = cum.between(t1, t2);
            MainInequality {
                t1,
                t2,
                j1,
                j2,
                lambda_integral: integral,
                check: BoundCheck::new(
                    "main_inequality",
                    j1,
                    j2 * (-c * integral).exp(),
                    Relation::Le,
                    INEQUALITY_TOLERANCE,
                ),
                rhs_sharp: j2 * (-integral / c).exp(),
            }
        })
        .collect())
}

/// `N min_i J(D_i ∩ B_h(t1)) ≤ exp(−c(α) ∫ λ(Σ_h(t); N) dt) J(B_h(t2))` over the forest's tracts.
pub fn tract_count_check(
    forest: &TractForest,
    f: &ScalarField,
    h: &ScalarField,
    alpha: f64,
    t1: f64,
    t2: f64,
    steps: usize,
) -> Result<BoundCheck> {
    Ok(tract_count_pairs(forest, f, h, alpha, &[(t1, t2)], steps)?.remove(0))
}

/// [`tract_count_check`] at many pairs.
pub fn tract_count_pairs(
    forest: &TractForest,
    f: &ScalarField,
    h: &ScalarField,
    alpha: f64,
    pairs: &[(f64, f64)],
    steps: usize,
) -> Result<Vec<BoundCheck>> {
    let ts = pair_levels(pairs, steps)?;
    let n = forest.tract_count();
    let k = forest.separating_level();
    let grid = &forest.levels[k].grid;
    let elems: Vec<CoverageQuadrature> =
        (0..n).map(|i| dirichlet_profile(f, forest.element(i, k), h, alpha, grid)).collect();
    let whole = dirichlet_profile(f, Region::Whole, h, alpha, grid);
    let samples = FieldSamples::new(h, grid);
    let lam = ts
        .par_iter()
        .map(|&t| Ok(n_mean_lower_bound(&extract_from_samples(h, t, &samples)?, n)))
        .collect::<Result<Vec<f64>>>()?;
    let cum = Cumulative::new(ts, &lam);
    let c = c_alpha(alpha);
    Ok(pairs
        .iter()
        .map(|&(t1, t2)| {
            let min_j = elems.iter().map(|q| q.below(t1)).fold(f64::INFINITY, f64::min);
            let lhs = if n == 0 { 0.0 } else { n as f64 * min_j };
            let rhs = (-c * cum.between(t1, t2)).exp() * whole.below(t2);
            BoundCheck::new("tract_count", lhs, rhs, Relation::Le, INEQUALITY_TOLERANCE)
        })
        .collect())
}

/// Geometric `(t, ξ)` schedule with `ξ = ratio·t`, `t` log-spaced over `[t_lo, t_hi]`.
pub fn geometric_schedule(t_lo: f64, t_hi: f64, n: usize, ratio: f64) -> Vec<(f64, f64)> {
    log_space(t_lo, t_hi, n).into_iter().map(|t| (t, ratio * t)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ProxyPoint {
    pub t: f64,
    pub xi: f64,
    pub max_modulus: f64,
    pub capacity: f64,
    pub lambda_integral: f64,
    pub proxy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DenjoyAhlfors {
    pub n: usize,
    /// Constant multiplying `∫ λ(Σ_h; N)/α` in the exponent.
    pub constant: f64,
    pub points: Vec<ProxyPoint>,
    /// Slope of `ln proxy` against `ln t` over the later half of the schedule.
    pub trend: f64,
    /// Same slope with the constant `c(α)`.
    pub trend_stated: f64,
    pub decays: bool,
    /// `N − 1` when the proxy decays; otherwise no bound is certified.
    pub implied_max_tracts: Option<usize>,
}

/// Slope below which the proxy counts as decaying.
pub const DECAY_SLOPE: f64 = -0.05;

/// Evaluates `M(ξ) cap^{1/α}(t, ξ) exp(−(κ/α) ∫_{t1}^t λ(Σ_h(s); N) ds)` along a schedule, with
/// `κ = 1/c(α)`.
///
/// The capacity is the radial upper bound `[∫_t^ξ F(s)^{−1/(α−1)} ds]^{1−α}`, `F` the flow of `h`.
pub fn denjoy_ahlfors_bound(
    f: &ScalarField,
    h: &ScalarField,
    alpha: f64,
    n: usize,
    t1: f64,
    schedule: &[(f64, f64)],
    grid: &ParamGrid,
) -> Result<DenjoyAhlfors> {
    if schedule.is_empty() || schedule.iter().any(|&(t, xi)| !(t1 < t && t < xi)) {
        return Err(Error::InvalidArgument("schedule needs t1 < t < xi".into()));
    }
    let t_max = schedule.iter().map(|p| p.1).fold(t1, f64::max);
    let mut ts = log_space(t1, t_max, 257);
    ts.extend(schedule.iter().flat_map(|&(t, xi)| [t, xi]));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let samples = FieldSamples::new(h, grid);
    let rows = ts
        .par_iter()
        .map(|&t| {
            let ls = extract_from_samples(h, t, &samples)?;
            let flow = level_flow(&ls, alpha);
            let m = if ls.is_empty() { 0.0 } else { max_modulus(f, &ls, 0.0)? };
            Ok((n_mean_lower_bound(&ls, n), flow.powf(-1.0 / (alpha - 1.0)), m))
        })
        .collect::<Result<Vec<(f64, f64, f64)>>>()?;
    let cumulative = |g: &dyn Fn(&(f64, f64, f64)) -> f64| {
        let mut acc = vec![0.0];
        for k in 1..ts.len() {
            let step = 0.5 * (g(&rows[k - 1]) + g(&rows[k])) * (ts[k] - ts[k - 1]);
            acc.push(acc[k - 1] + step);
        }
        acc
    };
    let lam_int = cumulative(&|r| r.0);
    let resist = cumulative(&|r| r.1);
    let at = |x: f64| ts.binary_search_by(|p| p.total_cmp(&x)).unwrap_or_else(|k| k.min(ts.len() - 1));
    let c = c_alpha(alpha);
    let kappa = 1.0 / c;
    let mut points = Vec::new();
    let mut stated = Vec::new();
    for &(t, xi) in schedule {
        let (it, ix) = (at(t), at(xi));
        let capacity = (resist[ix] - resist[it]).powf(1.0 - alpha);
        let m = rows[ix].2;
        let base = m * capacity.powf(1.0 / alpha);
        points.push(ProxyPoint {
            t,
            xi,
            max_modulus: m,
            capacity,
            lambda_integral: lam_int[it],
            proxy: base * (-kappa / alpha * lam_int[it]).exp(),
        });
        stated.push(base * (-c / alpha * lam_int[it]).exp());
    }
    let half = points.len() / 2;
    let slope = |vals: &[f64]| {
        let tail = &points[half..];
        if tail.len() < 2 || vals[half..].iter().any(|v| !(*v > 0.0)) {
            return f64::NAN;
        }
        let x: Vec<f64> = tail.iter().map(|p| p.t.ln()).collect();
        let y: Vec<f64> = vals[half..].iter().map(|v| v.ln()).collect();
        ls_slope(&x, &y)
    };
    let proxies: Vec<f64> = points.iter().map(|p| p.proxy).collect();
    let trend = slope(&proxies);
    let trend_stated = slope(&stated);
    let decays = trend < DECAY_SLOPE;
    Ok(DenjoyAhlfors {
        n,
        constant: kappa,
        points,
        trend,
        trend_stated,
        decays,
        implied_max_tracts: decays.then(|| n.saturating_sub(1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog_surface;
    use std::collections::BTreeSet;

    fn chart(name: &str) -> Arc<SurfaceChart> {
        Arc::new(catalog_surface(name).unwrap())
    }

    /// Brute-force labeling oracle: flood fill on a dense point cloud of `{f > τ}` in parameter
    /// space using only node adjacency, independent of the forest code.
    fn flood_components(f: &ScalarField, tau: f64, grid: &ParamGrid) -> usize {
        let vals: Vec<f64> = grid.nodes().iter().map(|&(u, v)| f.eval(u, v)).collect();
        let mut seen = vec![false; vals.len()];
        let mut count = 0;
        for s in 0..vals.len() {
            if vals[s] > tau && !seen[s] {
                count += 1;
                seen[s] = true;
                let mut q = vec![s];
                while let Some(x) = q.pop() {
                    for nb in grid.neighbors(x) {
                        if vals[nb] > tau && !seen[nb] {
                            seen[nb] = true;
                            q.push(nb);
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn catenoid_x1_has_two_tracts() {
        let c = chart("catenoid");
        let f = ScalarField::coordinate(c.clone(), Vec3::x());
        let g = ParamGrid::new(c.domain, 128, 96);
        let forest = build_tract_forest(&f, &[2.0, 4.0, 8.0], &g).unwrap();
        assert_eq!(forest.tract_count(), 2);
        assert!(forest.tracts.iter().all(|t| t.persists_enlarged));
        for (k, &tau) in forest.tau_grid.iter().enumerate() {
            assert_eq!(forest.nodes[k].len(), flood_components(&f, tau, &g));
        }
        assert!(forest.nesting_holds());
        let sides: BTreeSet<bool> =
            forest.tracts.iter().map(|t| forest.nodes[0][t.chain[0]].representative.1 > 0.0).collect();
        assert_eq!(sides.len(), 2);
        let json = serde_json::to_string(&forest).unwrap();
        assert!(json.contains("\"tracts\""));
    }

    #[test]
    fn plane_half_planes() {
        let p = chart("plane");
        let g = ParamGrid::new(p.domain, 40, 40);
        for e in [Vec3::x(), -Vec3::x()] {
            let f = ScalarField::coordinate(p.clone(), e);
            assert_eq!(build_tract_forest(&f, &[1.0, 3.0], &g).unwrap().tract_count(), 1);
        }
    }

    #[test]
    fn bounded_field_has_no_tracts() {
        let p = chart("plane");
        let f = ScalarField::custom(p.clone(), |u, v| -(u * u + v * v));
        let forest = build_tract_forest(&f, &[0.5, 1.0], &ParamGrid::new(p.domain, 40, 40)).unwrap();
        assert_eq!(forest.tract_count(), 0);
    }

    #[test]
    fn critical_threshold_rejected() {
        let p = chart("plane");
        let f = ScalarField::custom(p.clone(), |u, v| u * v);
        let err = build_tract_forest(&f, &[0.0], &ParamGrid::new(p.domain, 40, 40)).unwrap_err();
        assert!(matches!(err, Error::CriticalThreshold(t) if t == 0.0));
    }

    #[test]
    fn regularity_of_catenoid_tracts() {
        let c = chart("catenoid");
        let g = ParamGrid::new(c.domain, 128, 96);
        let h = ScalarField::norm(c.clone());
        let ts = cofinal_samples(3.0, 9.5, 2);
        let mut arcs = build_tract_forest(&ScalarField::coordinate(c.clone(), Vec3::x()), &[2.0, 4.0], &g).unwrap();
        classify_all(&mut arcs, &h, &ts);
        assert_eq!(arcs.regular_count(), 2);
        let mut rings = build_tract_forest(&ScalarField::coordinate(c.clone(), Vec3::z()), &[0.5, 1.0], &g).unwrap();
        assert_eq!(rings.tract_count(), 1);
        classify_all(&mut rings, &h, &ts);
        let cls = rings.tracts[0].classification.as_ref().unwrap();
        assert_eq!(cls.regularity, Regularity::Singular);
        assert_eq!(cls.windows.len(), COFINAL_WINDOWS);
    }

    #[test]
    fn plane_tract_is_regular() {
        let p = chart("plane");
        let g = ParamGrid::new(p.domain, 80, 80);
        let mut forest = build_tract_forest(&ScalarField::coordinate(p.clone(), Vec3::x()), &[1.0], &g).unwrap();
        classify_all(&mut forest, &ScalarField::norm(p), &cofinal_samples(2.0, 9.0, 2));
        assert_eq!(forest.regular_count(), 1);
    }

    #[test]
    fn humps() {
        let c = chart("catenoid");
        let g = ParamGrid::new(c.domain, 128, 96);
        let n = hump_count(c.clone(), Vec3::x(), 2.0, &g).unwrap();
        assert_eq!((n.count, n.above, n.below), (4, 2, 2));
        assert!(n.levels_checked > 10);
        assert!(matches!(hump_count(c.clone(), Vec3::z(), 2.0, &g), Err(Error::NotRegular { .. })));
        let p = chart("plane");
        let gp = ParamGrid::new(p.domain, 40, 40);
        for a in [0.5, 2.0, 7.0] {
            assert_eq!(hump_count(p.clone(), Vec3::new(1.0, 1.0, 0.0), a, &gp).unwrap().count, 2);
        }
        // The neck joins each half-space below the critical value 1; past it the count is stable.
        assert_eq!(hump_count(c.clone(), Vec3::x(), 0.5, &g).unwrap().count, 2);
        let counts: Vec<usize> =
            [1.5, 2.0, 4.0, 9.0].iter().map(|&a| hump_count(c.clone(), Vec3::x(), a, &g).unwrap().count).collect();
        assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
    }

    #[test]
    fn main_inequality_on_tracts() {
        let p = Arc::new(catalog_surface("plane").unwrap().truncated_to_radius(10.0));
        let g = ParamGrid::new(p.domain, 160, 160);
        let f = ScalarField::coordinate(p.clone(), Vec3::x());
        let h = ScalarField::norm(p.clone());
        let forest = build_tract_forest(&f, &[1.0], &g).unwrap();
        let id = forest.tracts[0].chain[0];
        let r = main_inequality_check(&forest.levels[0], id, &f, &h, 2.0, 2.0, 8.0, 48).unwrap();
        assert!(r.check.satisfied, "{r:?}");
        assert!(r.check.rhs >= r.check.lhs);
        assert!(r.lambda_integral > 0.0);

        let c = Arc::new(catalog_surface("catenoid").unwrap().truncated_to_radius(12.0));
        let gc = ParamGrid::new(c.domain, 192, 160);
        let fc = ScalarField::coordinate(c.clone(), Vec3::x());
        let hc = ScalarField::norm(c.clone());
        let forest = build_tract_forest(&fc, &[2.0], &gc).unwrap();
        for t in &forest.tracts {
            let r = main_inequality_check(&forest.levels[0], t.chain[0], &fc, &hc, 2.0, 3.0, 10.0, 48).unwrap();
            assert!(r.check.satisfied, "{r:?}");
        }
        let cc = tract_count_check(&forest, &fc, &hc, 2.0, 3.0, 10.0, 24).unwrap();
        assert!(cc.satisfied, "{cc:?}");
    }

    #[test]
    fn denjoy_ahlfors_plane() {
        let p = Arc::new(catalog_surface("plane").unwrap().truncated_to_radius(40.0));
        let g = ParamGrid::new(p.domain, 200, 200);
        let f = ScalarField::coordinate(p.clone(), Vec3::x());
        let h = ScalarField::norm(p.clone());
        let sched = geometric_schedule(2.0, 18.0, 8, 2.0);
        let three = denjoy_ahlfors_bound(&f, &h, 2.0, 3, 1.0, &sched, &g).unwrap();
        assert!(three.decays, "{:?}", three.trend);
        assert_eq!(three.implied_max_tracts, Some(2));
        // sharp exponent: M ~ ξ, cap^{1/2} ~ const, exp(−∫3/(2s)) ~ t^{−3/2}
        assert!((three.trend + 0.5).abs() < 0.1, "{}", three.trend);
        let one = denjoy_ahlfors_bound(&f, &h, 2.0, 1, 1.0, &sched, &g).unwrap();
        assert!(!one.decays);
        assert_eq!(one.implied_max_tracts, None);
    }
}
