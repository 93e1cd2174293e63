use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::gridspec::GridSpec;
use crate::geometry::{SurfaceSpec, Vec3};
use crate::{Error, Result};

/// Checks the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Frequency,
    Energy,
    Tracts,
    MainInequality,
    Tubular,
    ProjectiveVolume,
    Humps,
    Index,
    Bernstein,
    Distortion,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Frequency,
        Suite::Energy,
        Suite::Tracts,
        Suite::MainInequality,
        Suite::Tubular,
        Suite::ProjectiveVolume,
        Suite::Humps,
        Suite::Index,
        Suite::Bernstein,
        Suite::Distortion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Frequency => "frequency",
            Suite::Energy => "energy",
            Suite::Tracts => "tracts",
            Suite::MainInequality => "main_inequality",
            Suite::Tubular => "tubular",
            Suite::ProjectiveVolume => "projective_volume",
            Suite::Humps => "humps",
            Suite::Index => "index",
            Suite::Bernstein => "bernstein",
            Suite::Distortion => "distortion",
        }
    }

    /// Suites that read the projective volume.
    pub fn needs_volume(self) -> bool {
        matches!(self, Suite::ProjectiveVolume | Suite::Humps | Suite::Index | Suite::Bernstein)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == key)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown suite {s:?}")))
    }
}

/// Direction whose absolute coordinate is a tubular exhaustion of the surface.
pub fn tubular_axis(spec: &SurfaceSpec) -> Option<Vec3> {
    match spec {
        SurfaceSpec::Catenoid => Some(Vec3::z()),
        SurfaceSpec::PlaneStrip { .. } => Some(Vec3::x()),
        _ => None,
    }
}

/// Default parameter resolution `(nu, nv)` of the working chart.
pub fn default_resolution(spec: &SurfaceSpec) -> [usize; 2] {
    match spec {
        SurfaceSpec::PlaneStrip { .. } => [192, 32],
        SurfaceSpec::Catenoid | SurfaceSpec::Helicoid => [192, 160],
        _ => [160, 160],
    }
}

/// Default resolution of the large chart used for the projective volume.
pub fn default_volume_resolution(spec: &SurfaceSpec) -> [usize; 2] {
    match spec {
        SurfaceSpec::Catenoid => [128, 400],
        SurfaceSpec::Helicoid => [400, 200],
        SurfaceSpec::PlaneStrip { .. } => [400, 16],
        _ => [400, 400],
    }
}

/// One run of the harness. Every field has a default; CLI flags override JSON values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceSpec,
    /// Working charts cover `|x| <= truncation_radius`.
    pub truncation_radius: f64,
    pub direction: [f64; 3],
    pub alpha: f64,
    pub resolution: Option<[usize; 2]>,
    pub t_grid: GridSpec,
    pub tau_grid: GridSpec,
    /// Half-width `a` of the slab `|⟨x, e⟩| <= a`.
    pub slab: f64,
    pub volume_radius: f64,
    pub volume_t_grid: Option<GridSpec>,
    pub volume_resolution: Option<[usize; 2]>,
    pub multiplicity_radius: f64,
    pub multiplicity_resolution: [usize; 2],
    /// Basis of the projection plane; the `(x₁, x₂)` plane when absent.
    pub projection_plane: Option<[[f64; 3]; 2]>,
    /// `N` tested by the tract-count bound; one more than the detected tracts when absent.
    pub tract_test_n: Option<usize>,
    /// Suites to run; every suite applicable to the surface when absent.
    pub suites: Option<Vec<Suite>>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub export_obj: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            surface: SurfaceSpec::Catenoid,
            truncation_radius: 12.0,
            direction: [1.0, 0.0, 0.0],
            alpha: 2.0,
            resolution: None,
            t_grid: GridSpec::Lin { a: 3.0, b: 10.0, n: 15 },
            tau_grid: GridSpec::List(vec![2.0, 4.0, 8.0]),
            slab: 2.0,
            volume_radius: 1e4,
            volume_t_grid: None,
            volume_resolution: None,
            multiplicity_radius: 100.0,
            multiplicity_resolution: [400, 400],
            projection_plane: None,
            tract_test_n: None,
            suites: None,
            output_dir: PathBuf::from("tractlab-out"),
            seed: 0,
            export_obj: false,
        }
    }
}

fn check_res(name: &str, r: [usize; 2]) -> Result<()> {
    if r.iter().all(|&n| (4..=4096).contains(&n)) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must lie in 4..=4096 per axis, got {r:?}")))
    }
}

fn check_grid(name: &str, g: &GridSpec, positive: bool) -> Result<()> {
    if g.is_empty() || !g.is_increasing() {
        return Err(Error::InvalidConfig(format!("{name} must be non-empty and increasing")));
    }
    if positive && g.values()[0] <= 0.0 {
        return Err(Error::InvalidConfig(format!("{name} must be positive")));
    }
    Ok(())
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {x}")))
    }
}

impl RunConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        let e = Vec3::from(self.direction);
        if !(e.iter().all(|x| x.is_finite()) && e.norm() > 1e-12) {
            return Err(Error::InvalidConfig("direction must be a finite non-zero vector".into()));
        }
        positive("truncation_radius", self.truncation_radius)?;
        positive("slab", self.slab)?;
        positive("volume_radius", self.volume_radius)?;
        positive("multiplicity_radius", self.multiplicity_radius)?;
        if self.multiplicity_radius <= 1.0 {
            return Err(Error::InvalidConfig("multiplicity_radius must exceed 1".into()));
        }
        check_res("resolution", self.resolution())?;
        check_res("volume_resolution", self.volume_resolution())?;
        check_res("multiplicity_resolution", self.multiplicity_resolution)?;
        check_grid("t_grid", &self.t_grid, true)?;
        check_grid("tau_grid", &self.tau_grid, false)?;
        check_grid("volume_t_grid", &self.volume_t_grid(), true)?;
        if let Some([a, b]) = self.projection_plane {
            crate::invariants::ProjectionPlane::spanned(Vec3::from(a), Vec3::from(b))
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        }
        if self.tract_test_n == Some(0) {
            return Err(Error::InvalidConfig("tract_test_n must be at least 1".into()));
        }
        if let Some(suites) = &self.suites {
            if suites.is_empty() {
                return Err(Error::InvalidConfig("no suites requested".into()));
            }
            let unique: BTreeSet<Suite> = suites.iter().copied().collect();
            if unique.len() != suites.len() {
                return Err(Error::InvalidConfig("suites listed twice".into()));
            }
            if unique.contains(&Suite::Tubular) && tubular_axis(&self.surface).is_none() {
                return Err(Error::InvalidConfig(format!("surface {} has no tubular direction", self.surface)));
            }
        }
        Ok(())
    }

    pub fn direction(&self) -> Vec3 {
        Vec3::from(self.direction).normalize()
    }

    pub fn suites(&self) -> Vec<Suite> {
        match &self.suites {
            Some(s) => s.clone(),
            None => Suite::ALL
                .into_iter()
                .filter(|&s| s != Suite::Tubular || tubular_axis(&self.surface).is_some())
                .collect(),
        }
    }

    pub fn resolution(&self) -> [usize; 2] {
        self.resolution.unwrap_or_else(|| default_resolution(&self.surface))
    }

    pub fn volume_resolution(&self) -> [usize; 2] {
        self.volume_resolution.unwrap_or_else(|| default_volume_resolution(&self.surface))
    }

    /// Two decades of log-spaced radii ending at the volume radius.
    pub fn volume_t_grid(&self) -> GridSpec {
        self.volume_t_grid.clone().unwrap_or(GridSpec::Log {
            a: self.volume_radius / 100.0,
            b: self.volume_radius,
            n: 41,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
    }

    #[test]
    fn partial_documents_use_defaults() {
        let c = RunConfig::from_json(r#"{"surface": "plane", "suites": ["bernstein"], "alpha": 3}"#).unwrap();
        assert_eq!(c.surface, SurfaceSpec::Plane);
        assert_eq!(c.suites(), vec![Suite::Bernstein]);
        let plane = RunConfig { surface: SurfaceSpec::Plane, ..RunConfig::default() };
        assert!(!plane.suites().contains(&Suite::Tubular));
        assert_eq!(RunConfig::default().suites(), Suite::ALL.to_vec());
        assert_eq!(c.resolution(), [160, 160]);
    }

    #[test]
    fn invalid_documents() {
        for text in [
            r#"{"alpha": 1.0}"#,
            r#"{"surface": "torus"}"#,
            r#"{"surface": "plane", "suites": ["tubular"]}"#,
            r#"{"suites": []}"#,
            r#"{"suites": ["humps", "humps"]}"#,
            r#"{"t_grid": "lin:5:1:3"}"#,
            r#"{"resolution": [2, 100]}"#,
            r#"{"direction": [0, 0, 0]}"#,
            r#"{"colour": "red"}"#,
        ] {
            assert!(RunConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn suite_names() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!("main-inequality".parse::<Suite>().unwrap(), Suite::MainInequality);
    }
}
