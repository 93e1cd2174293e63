//! Property checks shared by the proptest suites and the acceptance runner.
//!
//! Each check returns the number of violations; inputs the library rejects with an error
//! (critical thresholds, empty levels) return `None` and are skipped by the callers.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use tractlab_core::energy::{energy_profile, singular_terms};
use tractlab_core::geometry::{Domain, ParamGrid, ScalarField, SurfaceChart, SurfaceSpec, Vec3};
use tractlab_core::invariants::find_critical_points;
use tractlab_core::levelset::extract_level_set;
use tractlab_core::spectra::{fundamental_frequency, n_mean_lower_bound, FrequencySpec};
use tractlab_core::tracts::build_tract_forest;

pub const CATALOG: [&str; 6] = ["plane", "plane_strip:1.5", "catenoid", "helicoid", "enneper", "graph:2,0,0.5;0,2,0.5"];
pub const MINIMAL: [&str; 4] = ["plane", "catenoid", "helicoid", "enneper"];
pub const TUBULAR: [&str; 2] = ["catenoid", "plane_strip:1.5"];

/// Working radius of the property charts.
pub const RADIUS: f64 = 8.0;

pub fn chart(name: &str) -> Arc<SurfaceChart> {
    let spec: SurfaceSpec = name.parse().unwrap();
    Arc::new(SurfaceChart::from_spec(&spec).truncated_to_radius(RADIUS))
}

pub fn grid(c: &SurfaceChart, n: usize) -> ParamGrid {
    ParamGrid::new(c.domain, n, n)
}

/// Unit vector from spherical angles.
pub fn direction(theta: f64, phi: f64) -> Vec3 {
    Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// Parent links contain their children and every component peaks next to its rim.
pub fn tract_nesting(name: &str, e: Vec3, taus: &[f64]) -> Option<usize> {
    let c = chart(name);
    let f = ScalarField::coordinate(c.clone(), e);
    let forest = build_tract_forest(&f, taus, &grid(&c, 64)).ok()?;
    Some(usize::from(!forest.nesting_holds()))
}

/// `J(t)` is non-decreasing along the exhaustion `|x|`.
pub fn j_monotone(name: &str, e: Vec3, alpha: f64) -> Option<usize> {
    let c = chart(name);
    let f = ScalarField::coordinate(c.clone(), e);
    let h = ScalarField::norm(c.clone());
    let ts: Vec<f64> = (0..8).map(|k| 1.05 + 0.6 * k as f64).collect();
    let p = energy_profile(&f, &h, alpha, &ts, &grid(&c, 64)).ok()?;
    let scale = p.j.iter().copied().fold(0.0, f64::max);
    Some(p.j.windows(2).filter(|w| w[1] < w[0] - 1e-12 * scale).count())
}

/// Chart on which `|⟨x, axis⟩|` is a tubular exhaustion up to `reach`.
pub fn tubular(name: &str, reach: f64) -> (Arc<SurfaceChart>, Vec3, ParamGrid) {
    let spec: SurfaceSpec = name.parse().unwrap();
    let base = SurfaceChart::from_spec(&spec);
    match spec {
        SurfaceSpec::Catenoid => {
            let c = Arc::new(base.with_domain(Domain::new([0.0, 2.0 * PI], [-reach, reach]).periodic_in_u()));
            let g = ParamGrid::new(c.domain, 64, 161);
            (c, Vec3::z(), g)
        }
        SurfaceSpec::PlaneStrip { .. } => {
            let d = Domain { u: [-reach, reach], ..base.domain };
            let c = Arc::new(base.with_domain(d));
            let g = ParamGrid::new(c.domain, 161, 12);
            (c, Vec3::x(), g)
        }
        _ => panic!("{name} has no tubular exhaustion"),
    }
}

/// `ω(t) = Σ S(f,Γ)²/S(h,Γ)` dominates `S(f)²/S(h)` summed over the cycles.
pub fn omega_dominates(name: &str, e: Vec3) -> Option<usize> {
    let (c, axis, g) = tubular(name, 6.0);
    let f = ScalarField::coordinate(c.clone(), e);
    let h = ScalarField::abs_coordinate(c, axis);
    let ts: Vec<f64> = (0..6).map(|k| 1.03 + 0.8 * k as f64).collect();
    let terms = singular_terms(&f, &h, &ts, &g).ok()?;
    Some(
        terms
            .levels
            .iter()
            .filter(|l| {
                let (sf, sh) = (l.total_s_f(), l.total_s_h());
                l.omega < sf * sf / sh - 1e-9 * (1.0 + l.omega)
            })
            .count(),
    )
}

/// Critical points of a coordinate function on a minimal surface are saddles: `σ` even and at least 4.
pub fn index_positive(name: &str, e: Vec3) -> Option<usize> {
    let c = chart(name);
    let pts = find_critical_points(&c, e, &grid(&c, 64)).ok()?;
    Some(pts.iter().filter(|p| !p.valid || p.sigma % 2 != 0 || p.sigma < 4 || p.index < 1).count())
}

/// Restricting a level set to a superlevel region never lowers its reduced frequency.
pub fn lambda_star_inclusion(name: &str, t: f64, e: Vec3, tau: f64) -> Option<usize> {
    let c = chart(name);
    let h = ScalarField::norm(c.clone());
    let f = ScalarField::coordinate(c.clone(), e);
    let full = extract_level_set(&h, t, &grid(&c, 96)).ok()?;
    let part = full.restrict(&f, tau, None);
    if full.is_empty() || part.is_empty() {
        return None;
    }
    let spec = FrequencySpec::reduced(2.0);
    let a = fundamental_frequency(&full, &spec).ok()?.lambda;
    let b = fundamental_frequency(&part, &spec).ok()?.lambda;
    Some(usize::from(b < a * (1.0 - 1e-9)))
}

/// The certified `N`-mean bound is non-decreasing in `N`.
pub fn n_mean_monotone(name: &str, t: f64) -> Option<usize> {
    let c = chart(name);
    let h = ScalarField::norm(c.clone());
    let ls = extract_level_set(&h, t, &grid(&c, 96)).ok()?;
    if ls.is_empty() {
        return None;
    }
    let b: Vec<f64> = (1..=8).map(|n| n_mean_lower_bound(&ls, n)).collect();
    Some(b.windows(2).filter(|w| w[1] < w[0] * (1.0 - 1e-12)).count())
}
