use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{default_resolution, tubular_axis, RunConfig, Suite};
use super::report::{Report, SuiteRecord};
use crate::bound::{BoundCheck, Relation};
use crate::energy::{
    capacity_closed_form, capacity_variational, dirichlet_capacity_check, dirichlet_flow_check, energy_profile,
    full_flow, normalized_flow, Region,
};
use crate::geometry::{
    alpha_minimality_residual, gauss_map_distortion, write_obj, Domain, FieldSamples, ParamGrid, ScalarField,
    SurfaceChart, SurfaceSpec, Vec3,
};
use crate::invariants::{
    index_theorem_check, multiplicity_csv, projected_reach, projection_multiplicity_integral, projective_volume,
    tubular_growth_check, ProjectionPlane, ProjectiveVolumeEstimate,
};
use crate::levelset::{extract_from_samples, superlevel_components, Polyline};
use crate::spectra::{fundamental_frequency, n_mean_lower_bound, rayleigh_oracle, FrequencySpec};
use crate::tracts::{
    build_tract_forest, classify_all, cofinal_samples, denjoy_ahlfors_bound, geometric_schedule, hump_count,
    main_inequality_pairs, tract_count_pairs, Regularity,
};
use crate::{Error, Result};

/// Mesh size of the eigenvalue oracle.
pub const ORACLE_ELEMENTS: usize = 256;
/// Agreement required between closed-form and oracle frequencies.
pub const ORACLE_TOLERANCE: f64 = 1e-3;
/// Agreement required between the variational and closed-form capacities.
pub const CAPACITY_TOLERANCE: f64 = 0.02;
/// Randomised oracle cases per run.
pub const RANDOM_CASES: usize = 10;

/// A file produced next to the report.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

impl Artifact {
    fn text(name: impl Into<String>, contents: String) -> Self {
        Artifact { name: name.into(), contents: contents.into_bytes() }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: Report,
    pub artifacts: Vec<Artifact>,
}

impl RunOutput {
    /// Writes `report.json`, `checks.csv` and every artifact into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.report.to_json())?;
        fs::write(dir.join("checks.csv"), self.report.checks_csv())?;
        for a in &self.artifacts {
            fs::write(dir.join(&a.name), &a.contents)?;
        }
        Ok(())
    }
}

const APPROXIMATIONS: [&str; 4] = [
    "non-compact closures are detected by contact with the truncation box that persists on a box enlarged twice",
    "tract regularity is decided on 8 sampled cofinal windows of the exhaustion",
    "level-curve arcs ending on the truncation box are treated as open arcs",
    "limits in the projective volume are least-squares slopes over the top decade of radii",
];

struct Ctx<'a> {
    cfg: &'a RunConfig,
    chart: Arc<SurfaceChart>,
    grid: ParamGrid,
    e: Vec3,
    f: ScalarField,
    h: ScalarField,
    /// Configured resolution relative to the surface default.
    refine: f64,
    volume: Option<std::result::Result<ProjectiveVolumeEstimate, String>>,
}

impl Ctx<'_> {
    fn v2(&self) -> std::result::Result<Option<f64>, String> {
        match &self.volume {
            Some(Ok(v)) => Ok(v.v2()),
            Some(Err(e)) => Err(e.clone()),
            None => Err("projective volume not computed".into()),
        }
    }
}

fn chart_for(spec: &SurfaceSpec, radius: f64) -> SurfaceChart {
    SurfaceChart::from_spec(spec).truncated_to_radius(radius)
}

/// Chart on which `|⟨x, axis⟩| < reach` is covered by complete cycles.
///
/// `refine` scales the sampling density along with the configured resolution.
fn tubular_chart(spec: &SurfaceSpec, reach: f64, refine: f64) -> Option<(SurfaceChart, [usize; 2])> {
    let base = SurfaceChart::from_spec(spec);
    let per_unit = 40.0 * refine;
    let around = ((96.0 * refine) as usize).clamp(16, 4096);
    // odd cell count keeps round levels off the nodes
    let n_axis = ((2.0 * reach * per_unit) as usize).clamp(32, 4094) | 1;
    match spec {
        SurfaceSpec::Catenoid => {
            let d = Domain::new([0.0, 2.0 * PI], [-reach, reach]).periodic_in_u();
            Some((base.with_domain(d), [around, n_axis]))
        }
        SurfaceSpec::PlaneStrip { .. } => {
            let d = Domain { u: [-reach, reach], ..base.domain };
            Some((base.with_domain(d), [n_axis, (around / 6).max(8)]))
        }
        _ => None,
    }
}

/// Runs every configured suite and collects the report with its artifacts.
pub fn run_with_artifacts(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let chart = Arc::new(chart_for(&cfg.surface, cfg.truncation_radius));
    let [nu, nv] = cfg.resolution();
    let grid = ParamGrid::new(chart.domain, nu, nv);
    let e = cfg.direction();
    let volume = cfg.suites().iter().any(|s| s.needs_volume()).then(|| {
        let vchart = Arc::new(chart_for(&cfg.surface, cfg.volume_radius));
        let [a, b] = cfg.volume_resolution();
        projective_volume(&vchart, &cfg.volume_t_grid().values(), &ParamGrid::new(vchart.domain, a, b))
            .map_err(|e| e.to_string())
    });
    let ctx = Ctx {
        cfg,
        f: ScalarField::coordinate(chart.clone(), e),
        h: ScalarField::norm(chart.clone()),
        chart,
        grid,
        e,
        refine: nu as f64 / default_resolution(&cfg.surface)[0] as f64,
        volume,
    };
    let results: Vec<(SuiteRecord, Vec<Artifact>)> = cfg
        .suites()
        .par_iter()
        .map(|&suite| {
            let start = Instant::now();
            let mut rec = SuiteRecord::new(suite);
            let mut out = Vec::new();
            if let Err(err) = dispatch(&ctx, suite, &mut rec, &mut out) {
                rec.error(suite.name(), err);
            }
            let csv = format!("{}.csv", suite.name());
            if !out.iter().any(|a| a.name == csv) {
                let table = Report::new(String::new(), cfg.alpha, cfg.seed, vec![rec.clone()], vec![]).checks_csv();
                out.push(Artifact::text(csv, table));
            }
            info!("suite {suite} finished in {:.2?}", start.elapsed());
            (rec, out)
        })
        .collect();
    let mut artifacts = Vec::new();
    let mut records = Vec::new();
    for (rec, out) in results {
        records.push(rec);
        artifacts.extend(out);
    }
    if cfg.export_obj {
        let mut buf = Vec::new();
        write_obj(&ctx.chart, &ctx.grid, &mut buf)?;
        artifacts.push(Artifact { name: "surface.obj".into(), contents: buf });
    }
    let notes = APPROXIMATIONS.iter().map(|s| s.to_string()).collect();
    Ok(RunOutput { report: Report::new(cfg.surface.to_string(), cfg.alpha, cfg.seed, records, notes), artifacts })
}

/// Runs every configured suite; deterministic for a given configuration.
pub fn run_suite(cfg: &RunConfig) -> Result<Report> {
    Ok(run_with_artifacts(cfg)?.report)
}

fn dispatch(ctx: &Ctx, suite: Suite, rec: &mut SuiteRecord, out: &mut Vec<Artifact>) -> Result<()> {
    match suite {
        Suite::Frequency => frequency(ctx, rec, out),
        Suite::Energy => energy(ctx, rec, out),
        Suite::Tracts => tracts(ctx, rec, out),
        Suite::MainInequality => main_inequality(ctx, rec, out),
        Suite::Tubular => tubular(ctx, rec, out),
        Suite::ProjectiveVolume => volume(ctx, rec, out),
        Suite::Humps => humps(ctx, rec),
        Suite::Index => index(ctx, rec, out),
        Suite::Bernstein => bernstein(ctx, rec, out),
        Suite::Distortion => distortion(ctx, rec),
    }
}

fn frequency(ctx: &Ctx, rec: &mut SuiteRecord, out: &mut Vec<Artifact>) -> Result<()> {
    let cfg = ctx.cfg;
    rec.input("t_grid", cfg.t_grid.to_string());
    rec.input("exhaustion", "|x|");
    rec.input("oracle_elements", ORACLE_ELEMENTS);
    if cfg.alpha != 2.0 {
        rec.note("closed-form frequencies need alpha = 2; suite skipped");
        return Ok(());
    }
    let ts = cfg.t_grid.values();
    let samples = FieldSamples::new(&ctx.h, &ctx.grid);
    type Row = (f64, Vec<(bool, f64, f64, f64)>, f64, f64, Vec<f64>);
    let rows: Vec<Result<Row>> = ts
        .par_iter()
        .map(|&t| {
            let ls = extract_from_samples(&ctx.h, t, &samples)?;
            let plain = fundamental_frequency(&ls, &FrequencySpec::plain(2.0))?;
            let reduced = fundamental_frequency(&ls, &FrequencySpec::reduced(2.0))?;
            let comps = ls
                .components
                .iter()
                .zip(&plain.per_component)
                .map(|(p, &(_, lam))| Ok((p.closed, p.theta_mass(), lam, rayleigh_oracle(p, ORACLE_ELEMENTS)?)))
                .collect::<Result<Vec<_>>>()?;
            let means = (1..=4).map(|n| n_mean_lower_bound(&ls, n)).collect();
            Ok((t, comps, plain.lambda, reduced.lambda, means))
        })
        .collect();
    let mut csv = String::from("t,component,closed,theta_mass,lambda,oracle\n");
    let (mut lam, mut lam_star, mut means) = (Vec::new(), Vec::new(), Vec::new());
    for row in rows {
        match row {
            Ok((t, comps, l, ls, m)) => {
                for (k, (closed, mass, closed_form, oracle)) in comps.iter().enumerate() {
                    csv.push_str(&format!("{t},{k},{closed},{mass},{closed_form},{oracle}\n"));
                    rec.check(BoundCheck::new(
                        format!("oracle@t={t}#{k}"),
                        *oracle,
                        *closed_form,
                        Relation::Approx,
                        ORACLE_TOLERANCE,
                    ));
                }
                lam.push((t, l));
                lam_star.push((t, ls));
                means.push((t, m));
            }
            Err(e) => rec.error("level frequency", e),
        }
    }
    rec.quantity("lambda", lam);
    rec.quantity("lambda_star", lam_star);
    rec.quantity("n_mean_bounds_1_to_4", means);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for k in 0..RANDOM_CASES {
        let len: f64 = rng.random_range(0.5..10.0);
        let theta: f64 = rng.random_range(0.1..5.0);
        let closed = k % 2 == 1;
        let p = if closed {
            let pts = vec![Vec3::zeros(), Vec3::new(len / 2.0, 0.0, 0.0), Vec3::zeros()];
            Polyline::synthetic(pts, vec![theta; 3], true)
        } else {
            Polyline::synthetic(vec![Vec3::zeros(), Vec3::new(len, 0.0, 0.0)], vec![theta; 2], false)
        };
        let exact = if closed { 2.0 * PI / (len * theta) } else { PI / (len * theta) };
        let oracle = rayleigh_oracle(&p, ORACLE_ELEMENTS)?;
        rec.check(BoundCheck::new(format!("random_oracle#{k}"), oracle, exact, Relation::Approx, ORACLE_TOLERANCE));
    }
    out.push(Artifact::text("frequency.csv", csv));
    Ok(())
}

fn energy(ctx: &Ctx, rec: &mut SuiteRecord, out: &mut Vec<Artifact>) -> Result<()> {
    let cfg = ctx.cfg;
    let ts = cfg.t_grid.values();
    let (t1, t2) = (ts[0], ts[ts.len() - 1]);
    rec.input("t_grid", cfg.t_grid.to_string());
    rec.input("alpha", cfg.alpha);
    rec.input("direction", ctx.e.as_slice());
    match energy_profile(&ctx.f, &ctx.h, cfg.alpha, &ts, &ctx.grid) {
        Ok(p) => {
            let min_step = p.j.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            let scale = p.j.iter().copied().fold(0.0, f64::max);
            rec.check(BoundCheck::with_slack("j_monotone", min_step, 0.0, Relation::Ge, 0.0, 1e-12 * scale));
            rec.quantity("j", &p.j);
            rec.quantity("max_modulus", &p.m);
            rec.quantity("full_flow", p.s_h);
            out.push(Artifact::text("energy.csv", p.to_csv()));
        }
        Err(e) => rec.error("energy profile", e),
    }
    if t1 < t2 {
        match dirichlet_flow_check(&ctx.f, &ctx.h, t1, t2, cfg.alpha, 32, &ctx.grid) {
            Ok(c) => rec.check(c),
            Err(e) => rec.error("flow bound", e),
        }
        let tau = cfg.tau_grid.values()[0];
        let comps = superlevel_components(&ctx.f, tau, &ctx.grid);
        let first = comps.non_compact().next().map(|c| c.id);
        match first {
            Some(id) => {
                let region = Region::Component { comps: &comps, id };
                match dirichlet_capacity_check(&ctx.f, &ctx.h, region, tau, t1, t2, cfg.alpha, &ctx.grid) {
                    Ok(c) => rec.check(c),
                    Err(e) => rec.error("capacity bound", e),
                }
            }
            None => rec.note(format!("no unbounded component of {{f > {tau}}}; capacity bound skipped")),
        }
    }
    if let Some(axis) = tubular_axis(&cfg.surface) {
        if cfg.alpha != 2.0 {
            rec.note("closed-form capacity is validated for the harmonic exhaustion only (alpha = 2)");
        } else if let Some((chart, [a, b])) = tubular_chart(&cfg.surface, t2 * 1.1 + 0.5, ctx.refine) {
            let chart = Arc::new(chart);
            let grid = ParamGrid::new(chart.domain, a, b);
            let h = ScalarField::abs_coordinate(chart, axis);
            let res = full_flow(&h, 2.0, &ts, &grid).and_then(|s| {
                let closed = capacity_closed_form(normalized_flow(s, 2.0), t1, t2, 2.0)?;
                let var = capacity_variational(&h, Region::Whole, t1, t2, 2.0, &grid)?;
                Ok((s, closed, var))
            });
            match res {
                Ok((s, closed, var)) => {
                    rec.quantity("tubular_full_flow", s);
                    rec.check(BoundCheck::new(
                        "capacity_closed_form",
                        var,
                        closed,
                        Relation::Approx,
                        CAPACITY_TOLERANCE,
                    ));
                }
                Err(e) => rec.error("capacity", e),
            }
        }
    }
    Ok(())
}

fn tracts(ctx: &Ctx, rec: &mut SuiteRecord, out: &mut Vec<Artifact>) -> Result<()> {
    let cfg = ctx.cfg;
    let taus = cfg.tau_grid.values();
    let ts = cfg.t_grid.values();
    rec.input("tau_grid", cfg.tau_grid.to_string());
    rec.input("t_grid", cfg.t_grid.to_string());
    let mut forest = build_tract_forest(&ctx.f, &taus, &ctx.grid)?;
    let (t_lo, t_hi) = (ts[0], ts[ts.len() - 1]);
    if t_lo < t_hi {
        classify_all(&mut forest, &ctx.h, &cofinal_samples(t_lo, t_hi, 3));
    }
    let regularity: Vec<Option<Regularity>> =
        forest.tracts.iter().map(|t| t.classification.as_ref().map(|c| c.regularity)).collect();
    rec.quantity("tracts", forest.tract_count());
    rec.quantity("regular_tracts", forest.regular_count());
    rec.quantity("regularity", regularity);
    rec.quantity("persists_enlarged", forest.tracts.iter().map(|t| t.persists_enlarged).collect::<Vec<_>>());
    let violations = if forest.nesting_holds() { 0.0 } else { 1.0 };
    rec.check(BoundCheck::new("tract_nesting", violations, 0.0, Relation::Le, 0.0));

    let n = cfg.tract_test_n.unwrap_or(forest.tract_count() + 1);
    if t_lo < t_hi && 2.0 * t_lo < t_hi {
        let sched = geometric_schedule(t_lo, t_hi / 2.0, 8, 2.0);
        match denjoy_ahlfors_bound(&ctx.f, &ctx.h, cfg.alpha, n, 0.9 * t_lo, &sched, &ctx.grid) {
            Ok(da) => {
                rec.quantity("denjoy_ahlfors", &da);
                match da.implied_max_tracts {
                    Some(max) => rec.check(BoundCheck::new(
                        "regular_tracts_vs_decay",
                        forest.regular_count() as f64,
                        max as f64,
                        Relation::Le,
                        0.0,
                    )),
                    None => rec.note(format!("N = {n}: proxy does not decay, no bound certified")),
                }
            }
            Err(e) => rec.error("denjoy-ahlfors proxy", e),
        }
    }
    let mut csv = String::from("tau,component,parent,size,touches_boundary,max_value\n");
    for (k, row) in forest.nodes.iter().enumerate() {
        for node in row {
            let parent = node.parent.map(|p| p.to_string()).unwrap_or_default();
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                forest.tau_grid[k], node.component, parent, node.size, node.touches_boundary, node.max_value
            ));
        }
    }
    out.push(Artifact::text("tracts.csv", csv));
    out.push(Artifact::text("tracts_forest.json", serde_json::to_string_pretty(&forest)?));
    Ok(())
}

fn main_inequality(ctx: &Ctx, rec: &mut SuiteRecord, out: &mut Vec<Artifact>) -> Result<()> {
    let cfg = ctx.cfg;
    let tau = cfg.tau_grid.values()[0];
    let ts = cfg.t_grid.values();
    rec.input("tau0", tau);
    rec.input("t_grid", cfg.t_grid.to_string());
    let pairs: Vec<(f64, f64)> =
        (0..ts.len()).flat_map(|i| (i + 1..ts.len()).map(move |j| (i, j))).map(|(i, j)| (ts[i], ts[j])).collect();
    if pairs.is_empty() {
        return Err(Error::InvalidConfig("t_grid needs at least two levels".into()));
    }
    let mut forest = build_tract_forest(&ctx.f, &[tau], &ctx.grid)?;
    classify_all(&mut forest, &ctx.h, &cofinal_samples(ts[0], ts[ts.len() - 1], 3));
    let mut csv = String::from("tract,t1,t2,lhs,rhs,rhs_sharp,lambda_integral\n");
    let mut tested = 0;
    for (k, tract) in forest.tracts.iter().enumerate() {
        let reg = tract.classification.as_ref().map(|c| c.regularity);
        if reg != Some(Regularity::Regular) {
            rec.note(format!("tract {k} is {reg:?}; main inequality needs a regular element"));
            continue;
        }
        match main_inequality_pairs(&forest.levels[0], tract.chain[0], &ctx.f, &ctx.h, cfg.alpha, &pairs, 96) {
            Ok(rows) => {
                for r in rows {
                    csv.push_str(&format!(
                        "{k},{},{},{},{},{},{}\n",
                        r.t1, r.t2, r.check.lhs, r.check.rhs, r.rhs_sharp, r.lambda_integral
                    ));
                    let mut c = r.check;
                    c.name = format!("main_inequality#{k}@({},{})", r.t1, r.t2);
                    rec.check(c);
                    tested += 1;
                }
            }
            Err(e) => rec.error(&format!("tract {k}"), e),
        }
    }
    rec.quantity("tracts", forest.tract_count());
    rec.quantity("pairs_checked", tested);
    if forest.tract_count() > 0 && forest.regular_count() == forest.tract_count() {
        match tract_count_pairs(&forest, &ctx.f, &ctx.h, cfg.alpha, &pairs, 96) {
            Ok(checks) => {
                for (c, (t1, t2)) in checks.into_iter().zip(&pairs) {
                    rec.check(BoundCheck { name: format!("tract_count@({t1},{t2})"), ..c });
                }
            }
            Err(e) => rec.error("tract count", e),
        }
    }
    out.push(Artifact::text("main_inequality.csv", csv));
    Ok(())
}

fn tubular(ctx: &Ctx, rec: &mut SuiteRecord, out: &mut Vec<Artifact>) -> Result<()> {
    let cfg = ctx.cfg;
    let Some(axis) = tubular_axis(&cfg.surface) else {
        rec.note(format!("{} has no tubular exhaustion; suite skipped", cfg.surface));
        return Ok(());
    };
    let ts = cfg.t_grid.values();
    let t_max = ts[ts.len() - 1];
    let (chart, [a, b]) = tubular_chart(&cfg.surface, t_max * 1.1 + 0.5, ctx.refine).expect("axis implies chart");
    let chart = Arc::new(chart);
    let grid = ParamGrid::new(chart.domain, a, b);
    rec.input("axis", axis.as_slice());
    rec.input("t_grid", cfg.t_grid.to_string());
    if cfg.alpha != 2.0 {
        rec.note("growth bound is stated for harmonic functions; computed with alpha = 2");
    }
    let f = ScalarField::coordinate(chart.clone(), ctx.e);
    let h = ScalarField::abs_coordinate(chart, axis);
    let r = tubular_growth_check(&f, &h, &ts, &grid)?;
    rec.quantity("full_flow", r.s_h);
    rec.quantity("bound", r.bound);
    rec.quantity("ln_j_over_t", r.ln_j_over_t);
    rec.quantity("q_over_j", &r.q_over_j);
    rec.quantity("condition_holds", r.condition_holds);
    rec.quantity("lambda_h", &r.lambda_h);
    match &r.growth {
        Some(c) => rec.check(c.clone()),
        None => rec.note("vanishing Q/J hypothesis fails; growth bound not applicable"),
    }
    for c in &r.frequency_checks {
        rec.check(c.clone());
    }
    out.push(Artifact::text("tubular.csv", r.to_csv()));
    Ok(())
}

fn volume(ctx: &Ctx, rec: &mut SuiteRecord, out: &mut Vec<Artifact>) -> Result<()> {
    let cfg = ctx.cfg;
    rec.input("radius", cfg.volume_radius);
    rec.input("t_grid", cfg.volume_t_grid().to_string());
    rec.input("resolution", cfg.volume_resolution());
    let est = match &ctx.volume {
        Some(Ok(v)) => v,
        Some(Err(e)) => return Err(Error::InvalidArgument(e.clone())),
        None => return Err(Error::InvalidArgument("projective volume not computed".into())),
    };
    rec.quantity("v2", est.v2_log);
    rec.quantity("v2_area", est.v2_area);
    rec.quantity("decade_slopes", &est.decade_slopes);
    rec.quantity("diverged", est.diverged);
    if est.diverged {
        rec.note("projective volume diverges");
    } else {
        rec.check(BoundCheck::with_slack("estimator_agreement", est.v2_area, est.v2_log, Relation::Approx, 0.05, 0.01));
    }
    out.push(Artifact::text("projective_volume.csv", est.to_csv()));
    Ok(())
}

/// `V₂` when finite; a diverged volume ends the suite with a note.
fn finite_v2(ctx: &Ctx, rec: &mut SuiteRecord) -> Result<Option<f64>> {
    let v2 = ctx.v2().map_err(Error::InvalidArgument)?;
    if v2.is_none() {
        rec.note("projective volume is infinite; bound not applicable");
    }
    Ok(v2)
}

/// Hypotheses of the bound fail; recorded as a note rather than a failure.
fn not_regular(rec: &mut SuiteRecord, e: Error) -> Result<()> {
    rec.note(format!("bound not applicable: {e}"));
    Ok(())
}

fn humps(ctx: &Ctx, rec: &mut SuiteRecord) -> Result<()> {
    rec.input("slab", ctx.cfg.slab);
    rec.input("direction", ctx.e.as_slice());
    let n = match hump_count(ctx.chart.clone(), ctx.e, ctx.cfg.slab, &ctx.grid) {
        Err(e @ Error::NotRegular { .. }) => return not_regular(rec, e),
        r => r?,
    };
    rec.quantity("humps", &n);
    if let Some(v2) = finite_v2(ctx, rec)? {
        rec.quantity("v2", v2);
        rec.check(BoundCheck::with_slack("hump_bound", n.count as f64, 2.0 * v2, Relation::Le, 0.0, 0.05));
    }
    Ok(())
}

fn index(ctx: &Ctx, rec: &mut SuiteRecord, out: &mut Vec<Artifact>) -> Result<()> {
    rec.input("direction", ctx.e.as_slice());
    let Some(v2) = finite_v2(ctx, rec)? else { return Ok(()) };
    let chk = match index_theorem_check(&ctx.chart, ctx.e, Some(v2), &ctx.grid) {
        Err(e @ (Error::NotRegular { .. } | Error::UnknownEulerCharacteristic)) => return not_regular(rec, e),
        r => r?,
    };
    rec.quantity("critical_points", chk.points.len());
    rec.quantity("index_sum", chk.index_sum);
    rec.quantity("v2", v2);
    rec.quantity("euler_characteristic", chk.euler_char);
    let invalid = chk.points.iter().filter(|p| !p.valid).count();
    rec.check(BoundCheck::new("index_positive_sigma_even", invalid as f64, 0.0, Relation::Le, 0.0));
    rec.check(chk.check.clone());
    let mut csv = String::from("u,v,value,sigma,index\n");
    for p in &chk.points {
        csv.push_str(&format!("{},{},{},{},{}\n", p.u, p.v, p.value, p.sigma, p.index));
    }
    out.push(Artifact::text("index.csv", csv));
    out.push(Artifact::text("index_critical_points.json", serde_json::to_string_pretty(&chk.points)?));
    Ok(())
}

fn bernstein(ctx: &Ctx, rec: &mut SuiteRecord, out: &mut Vec<Artifact>) -> Result<()> {
    let cfg = ctx.cfg;
    let plane = match cfg.projection_plane {
        Some([a, b]) => ProjectionPlane::spanned(Vec3::from(a), Vec3::from(b))?,
        None => ProjectionPlane::horizontal(),
    };
    let r = cfg.multiplicity_radius;
    let [a, b] = cfg.multiplicity_resolution;
    rec.input("radius", r);
    rec.input("plane", [plane.e1.as_slice(), plane.e2.as_slice()]);
    let mut chosen = None;
    for k in [1.05, 1.2, 1.5, 2.0, 3.0] {
        let chart = Arc::new(chart_for(&cfg.surface, k * r));
        let grid = ParamGrid::new(chart.domain, a, b);
        if projected_reach(&chart, &plane, &grid) > r {
            chosen = Some((chart, grid));
            break;
        }
    }
    let (chart, grid) = match chosen {
        Some(c) => c,
        None => {
            let chart = chart_for(&cfg.surface, 3.0 * r);
            let grid = ParamGrid::new(chart.domain, a, b);
            return Err(Error::NotProper { radius: r, reach: projected_reach(&chart, &plane, &grid) });
        }
    };
    let radii = [r / 10.0, r / 10f64.sqrt(), r];
    let points = projection_multiplicity_integral(&chart, &plane, &radii, 256, 64, &grid)?;
    let top = points[points.len() - 1].integral;
    rec.quantity("integral", top);
    rec.quantity("profile", &points);
    rec.quantity("consistent_with_plane", top < 8.0);
    let planar = matches!(gauss_map_distortion(&ctx.chart, &ctx.grid), Err(Error::DistortionUndefined));
    rec.quantity("planar", planar);
    if let Some(v2) = finite_v2(ctx, rec)? {
        rec.quantity("v2", v2);
        rec.check(BoundCheck::new("multiplicity_vs_volume", top / 4.0, v2, Relation::Ge, 0.05));
    }
    if !planar && chart.is_minimal_by_construction() {
        rec.check(BoundCheck::new("non_planar_multiplicity", top, 8.0, Relation::Ge, 0.0));
    }
    out.push(Artifact::text("bernstein.csv", multiplicity_csv(&points)));
    Ok(())
}

fn distortion(ctx: &Ctx, rec: &mut SuiteRecord) -> Result<()> {
    let alpha = ctx.cfg.alpha;
    rec.input("alpha", alpha);
    rec.input("direction", ctx.e.as_slice());
    let residual = match alpha_minimality_residual(&ctx.chart, ctx.e, alpha, &ctx.grid) {
        Ok(r) => {
            rec.quantity("alpha_minimality_residual", r);
            Some(r)
        }
        Err(e) => {
            rec.error("alpha-minimality residual", e);
            None
        }
    };
    let k = match gauss_map_distortion(&ctx.chart, &ctx.grid) {
        Ok(k) => k,
        Err(Error::DistortionUndefined) => {
            rec.note("every sample is flat; distortion undefined");
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    rec.quantity("distortion", k);
    if alpha == 2.0 && ctx.chart.is_minimal_by_construction() {
        if let Some(r) = residual {
            rec.check(BoundCheck::with_slack("minimality_residual", r, 0.0, Relation::Le, 0.0, 1e-8));
        }
        rec.check(BoundCheck::with_slack("conformal_gauss_map", k, 1.0, Relation::Le, 0.0, 1e-6));
    } else if residual.is_some_and(|r| r > 1e-8) {
        rec.note("surface is not alpha-minimal for this direction; distortion reported only");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(surface: &str, suites: &[Suite]) -> RunConfig {
        RunConfig {
            surface: surface.parse().unwrap(),
            suites: Some(suites.to_vec()),
            resolution: Some([64, 64]),
            volume_resolution: Some([128, 128]),
            multiplicity_resolution: [96, 96],
            multiplicity_radius: 20.0,
            ..RunConfig::default()
        }
    }

    #[test]
    fn failing_suite_does_not_abort_others() {
        let cfg = quick("helicoid", &[Suite::Distortion, Suite::Humps]);
        let r = run_suite(&cfg).unwrap();
        assert_eq!(r.suites.len(), 2);
        let d = r.suite(Suite::Distortion).unwrap();
        assert!(d.errors.is_empty(), "{:?}", d.errors);
    }

    #[test]
    fn deterministic_json() {
        let cfg = quick("catenoid", &[Suite::Frequency, Suite::Humps, Suite::Index]);
        let a = run_with_artifacts(&cfg).unwrap();
        let b = run_with_artifacts(&cfg).unwrap();
        assert_eq!(a.report.to_json(), b.report.to_json());
        let names: Vec<&str> = a.artifacts.iter().map(|x| x.name.as_str()).collect();
        for s in ["frequency.csv", "humps.csv", "index.csv"] {
            assert!(names.contains(&s), "{names:?}");
        }
    }
}
