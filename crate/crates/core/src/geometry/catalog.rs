use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Domain, Jet, Vec3};
use crate::{Error, Result};

/// One term `coeff · u^pu · v^pv` of a height function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub pu: u32,
    pub pv: u32,
    pub coeff: f64,
}

/// Polynomial height function with exact derivatives.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Polynomial { terms }
    }

    /// `u² + v²`.
    pub fn paraboloid() -> Self {
        Polynomial::new(vec![Monomial { pu: 2, pv: 0, coeff: 1.0 }, Monomial { pu: 0, pv: 2, coeff: 1.0 }])
    }

    /// Returns `[φ, φ_u, φ_v, φ_uu, φ_uv, φ_vv]`.
    pub fn eval(&self, u: f64, v: f64) -> [f64; 6] {
        fn pow_d(x: f64, p: u32, d: u32) -> f64 {
            if d > p {
                return 0.0;
            }
            let mut c = 1.0;
            for k in 0..d {
                c *= (p - k) as f64;
            }
            c * x.powi((p - d) as i32)
        }
        let mut out = [0.0; 6];
        for m in &self.terms {
            let (a, b, c) = (m.pu, m.pv, m.coeff);
            out[0] += c * pow_d(u, a, 0) * pow_d(v, b, 0);
            out[1] += c * pow_d(u, a, 1) * pow_d(v, b, 0);
            out[2] += c * pow_d(u, a, 0) * pow_d(v, b, 1);
            out[3] += c * pow_d(u, a, 2) * pow_d(v, b, 0);
            out[4] += c * pow_d(u, a, 1) * pow_d(v, b, 1);
            out[5] += c * pow_d(u, a, 0) * pow_d(v, b, 2);
        }
        out
    }
}

/// Surface named in configuration files and on the command line.
///
/// Textual forms: `plane`, `plane_strip[:W]`, `catenoid`, `helicoid`, `enneper`,
/// `graph:pu,pv,c;pu,pv,c;...` (polynomial height function).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SurfaceSpec {
    Plane,
    PlaneStrip { width: f64 },
    Catenoid,
    Helicoid,
    Enneper,
    Graph(Polynomial),
}

impl FromStr for SurfaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h.trim(), Some(r.trim())),
            None => (s, None),
        };
        let unknown = || Error::UnknownSurface(s.to_string());
        match (head.to_ascii_lowercase().as_str(), rest) {
            ("plane", None) => Ok(SurfaceSpec::Plane),
            ("catenoid", None) => Ok(SurfaceSpec::Catenoid),
            ("helicoid", None) => Ok(SurfaceSpec::Helicoid),
            ("enneper", None) => Ok(SurfaceSpec::Enneper),
            ("plane_strip", None) => Ok(SurfaceSpec::PlaneStrip { width: 1.0 }),
            ("plane_strip", Some(w)) => {
                let width: f64 = w.parse().map_err(|_| unknown())?;
                if !(width.is_finite() && width > 0.0) {
                    return Err(unknown());
                }
                Ok(SurfaceSpec::PlaneStrip { width })
            }
            ("graph", Some(body)) => {
                let mut terms = Vec::new();
                for t in body.split(';').map(str::trim).filter(|t| !t.is_empty()) {
                    let parts: Vec<&str> = t.split(',').map(str::trim).collect();
                    if parts.len() != 3 {
                        return Err(unknown());
                    }
                    let pu: u32 = parts[0].parse().map_err(|_| unknown())?;
                    let pv: u32 = parts[1].parse().map_err(|_| unknown())?;
                    let coeff: f64 = parts[2].parse().map_err(|_| unknown())?;
                    if pu > 16 || pv > 16 || !coeff.is_finite() {
                        return Err(unknown());
                    }
                    terms.push(Monomial { pu, pv, coeff });
                }
                Ok(SurfaceSpec::Graph(Polynomial::new(terms)))
            }
            _ => Err(unknown()),
        }
    }
}

impl TryFrom<String> for SurfaceSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SurfaceSpec> for String {
    fn from(s: SurfaceSpec) -> String {
        s.to_string()
    }
}

impl fmt::Display for SurfaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceSpec::Plane => write!(f, "plane"),
            SurfaceSpec::PlaneStrip { width } => write!(f, "plane_strip:{width}"),
            SurfaceSpec::Catenoid => write!(f, "catenoid"),
            SurfaceSpec::Helicoid => write!(f, "helicoid"),
            SurfaceSpec::Enneper => write!(f, "enneper"),
            SurfaceSpec::Graph(p) => {
                write!(f, "graph:")?;
                for (k, m) in p.terms.iter().enumerate() {
                    if k > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{},{},{}", m.pu, m.pv, m.coeff)?;
                }
                Ok(())
            }
        }
    }
}

type HeightFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Immersion formula of a chart.
#[derive(Clone)]
pub enum Shape {
    Plane,
    Catenoid,
    Helicoid,
    Enneper,
    PolyGraph(Polynomial),
    /// Graph of an arbitrary height function, differentiated numerically.
    FnGraph(HeightFn),
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Plane => write!(f, "Plane"),
            Shape::Catenoid => write!(f, "Catenoid"),
            Shape::Helicoid => write!(f, "Helicoid"),
            Shape::Enneper => write!(f, "Enneper"),
            Shape::PolyGraph(p) => write!(f, "PolyGraph({p:?})"),
            Shape::FnGraph(_) => write!(f, "FnGraph(..)"),
        }
    }
}

/// Parametric immersion of a rectangle into ℝ³.
#[derive(Clone, Debug)]
pub struct SurfaceChart {
    pub name: String,
    pub shape: Shape,
    pub domain: Domain,
    /// `None` when the topology is not known.
    pub euler_char: Option<i32>,
    pub ends: Option<u32>,
    pub genus: Option<u32>,
}

/// Builds a catalog chart by name with its default truncation box.
pub fn catalog_surface(name: &str) -> Result<SurfaceChart> {
    let spec: SurfaceSpec = name.parse()?;
    Ok(SurfaceChart::from_spec(&spec))
}

/// Graph `(u, v, φ(u, v))` of a user height function over `domain`.
pub fn graph_surface<F>(phi: F, domain: Domain) -> SurfaceChart
where
    F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
{
    SurfaceChart {
        name: "graph".into(),
        shape: Shape::FnGraph(Arc::new(phi)),
        domain,
        euler_char: Some(1),
        ends: Some(1),
        genus: Some(0),
    }
}

impl SurfaceChart {
    pub fn from_spec(spec: &SurfaceSpec) -> SurfaceChart {
        use std::f64::consts::PI;
        let (shape, domain, chi, ends) = match spec {
            SurfaceSpec::Plane => (Shape::Plane, Domain::new([-10.0, 10.0], [-10.0, 10.0]), 1, 1),
            SurfaceSpec::PlaneStrip { width } => {
                (Shape::Plane, Domain::new([-10.0, 10.0], [0.0, *width]).periodic_in_v(), 0, 2)
            }
            SurfaceSpec::Catenoid => (Shape::Catenoid, Domain::new([0.0, 2.0 * PI], [-3.0, 3.0]).periodic_in_u(), 0, 2),
            SurfaceSpec::Helicoid => (Shape::Helicoid, Domain::new([-5.0, 5.0], [-2.0, 2.0]), 1, 1),
            SurfaceSpec::Enneper => (Shape::Enneper, Domain::new([-2.0, 2.0], [-2.0, 2.0]), 1, 1),
            SurfaceSpec::Graph(p) => (Shape::PolyGraph(p.clone()), Domain::new([-1.0, 1.0], [-1.0, 1.0]), 1, 1),
        };
        SurfaceChart { name: spec.to_string(), shape, domain, euler_char: Some(chi), ends: Some(ends), genus: Some(0) }
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    /// Replaces the truncation box by one covering `{|x| <= radius}`.
    ///
    /// Periodic axes keep their period.
    pub fn truncated_to_radius(mut self, radius: f64) -> Self {
        let r = radius.max(1e-6);
        let d = self.domain;
        self.domain = match &self.shape {
            Shape::Plane => {
                let u = [-1.02 * r, 1.02 * r];
                if d.periodic_v {
                    Domain { u, ..d }
                } else if d.periodic_u {
                    Domain { v: u, ..d }
                } else {
                    Domain::new(u, u)
                }
            }
            // |x| >= cosh v
            Shape::Catenoid => Domain { v: [-r.max(1.0).acosh(), r.max(1.0).acosh()], ..d },
            // |x|^2 = sinh^2 v + u^2
            Shape::Helicoid => Domain::new([-r, r], [-r.asinh(), r.asinh()]),
            Shape::Enneper => {
                // |x| >= rho^3/3 - rho on the parameter circle of radius rho.
                let mut lo = 0.0;
                let mut hi = 2.0 + (3.0 * r).cbrt() * 2.0;
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if mid * mid * mid / 3.0 - mid >= r {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Domain::new([-hi, hi], [-hi, hi])
            }
            Shape::PolyGraph(_) | Shape::FnGraph(_) => Domain::new([-r, r], [-r, r]),
        };
        self
    }

    pub fn point(&self, u: f64, v: f64) -> Vec3 {
        self.jet(u, v).pos
    }

    /// Immersion value and parameter derivatives up to second order.
    pub fn jet(&self, u: f64, v: f64) -> Jet {
        match &self.shape {
            Shape::Plane => Jet {
                pos: Vec3::new(u, v, 0.0),
                du: Vec3::x(),
                dv: Vec3::y(),
                duu: Vec3::zeros(),
                duv: Vec3::zeros(),
                dvv: Vec3::zeros(),
            },
            Shape::Catenoid => {
                let (su, cu) = u.sin_cos();
                let (ch, sh) = (v.cosh(), v.sinh());
                Jet {
                    pos: Vec3::new(ch * cu, ch * su, v),
                    du: Vec3::new(-ch * su, ch * cu, 0.0),
                    dv: Vec3::new(sh * cu, sh * su, 1.0),
                    duu: Vec3::new(-ch * cu, -ch * su, 0.0),
                    duv: Vec3::new(-sh * su, sh * cu, 0.0),
                    dvv: Vec3::new(ch * cu, ch * su, 0.0),
                }
            }
            Shape::Helicoid => {
                let (su, cu) = u.sin_cos();
                let (ch, sh) = (v.cosh(), v.sinh());
                Jet {
                    pos: Vec3::new(sh * cu, sh * su, u),
                    du: Vec3::new(-sh * su, sh * cu, 1.0),
                    dv: Vec3::new(ch * cu, ch * su, 0.0),
                    duu: Vec3::new(-sh * cu, -sh * su, 0.0),
                    duv: Vec3::new(-ch * su, ch * cu, 0.0),
                    dvv: Vec3::new(sh * cu, sh * su, 0.0),
                }
            }
            Shape::Enneper => Jet {
                pos: Vec3::new(u - u * u * u / 3.0 + u * v * v, -(v - v * v * v / 3.0 + v * u * u), u * u - v * v),
                du: Vec3::new(1.0 - u * u + v * v, -2.0 * u * v, 2.0 * u),
                dv: Vec3::new(2.0 * u * v, -(1.0 - v * v + u * u), -2.0 * v),
                duu: Vec3::new(-2.0 * u, -2.0 * v, 2.0),
                duv: Vec3::new(2.0 * v, -2.0 * u, 0.0),
                dvv: Vec3::new(2.0 * u, 2.0 * v, -2.0),
            },
            Shape::PolyGraph(p) => graph_jet(u, v, p.eval(u, v)),
            Shape::FnGraph(phi) => {
                let h = 1e-5 * self.domain.extent();
                let h2 = 1e-3 * self.domain.extent();
                let f = |a: f64, b: f64| phi(a, b);
                let d = [
                    f(u, v),
                    (f(u + h, v) - f(u - h, v)) / (2.0 * h),
                    (f(u, v + h) - f(u, v - h)) / (2.0 * h),
                    (f(u + h2, v) - 2.0 * f(u, v) + f(u - h2, v)) / (h2 * h2),
                    (f(u + h2, v + h2) - f(u + h2, v - h2) - f(u - h2, v + h2) + f(u - h2, v - h2)) / (4.0 * h2 * h2),
                    (f(u, v + h2) - 2.0 * f(u, v) + f(u, v - h2)) / (h2 * h2),
                ];
                graph_jet(u, v, d)
            }
        }
    }

    /// Whether every catalog formula describes a minimal immersion.
    pub fn is_minimal_by_construction(&self) -> bool {
        matches!(self.shape, Shape::Plane | Shape::Catenoid | Shape::Helicoid | Shape::Enneper)
    }
}

fn graph_jet(u: f64, v: f64, d: [f64; 6]) -> Jet {
    Jet {
        pos: Vec3::new(u, v, d[0]),
        du: Vec3::new(1.0, 0.0, d[1]),
        dv: Vec3::new(0.0, 1.0, d[2]),
        duu: Vec3::new(0.0, 0.0, d[3]),
        duv: Vec3::new(0.0, 0.0, d[4]),
        dvv: Vec3::new(0.0, 0.0, d[5]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd_jet(chart: &SurfaceChart, u: f64, v: f64, h: f64) -> [Vec3; 5] {
        let p = |a, b| chart.point(a, b);
        [
            (p(u + h, v) - p(u - h, v)) / (2.0 * h),
            (p(u, v + h) - p(u, v - h)) / (2.0 * h),
            (p(u + h, v) - p(u, v) * 2.0 + p(u - h, v)) / (h * h),
            (p(u + h, v + h) - p(u + h, v - h) - p(u - h, v + h) + p(u - h, v - h)) / (4.0 * h * h),
            (p(u, v + h) - p(u, v) * 2.0 + p(u, v - h)) / (h * h),
        ]
    }

    #[test]
    fn catenoid_origin_and_metric() {
        let c = catalog_surface("catenoid").unwrap();
        let j = c.jet(0.0, 0.0);
        assert_relative_eq!(j.pos, Vec3::new(1.0, 0.0, 0.0));
        for &(u, v) in &[(0.3, -1.2), (2.0, 0.7), (5.5, 2.5)] {
            let [e, f, g] = c.jet(u, v).metric();
            let ch2 = f64::cosh(v).powi(2);
            assert_relative_eq!(e, ch2, max_relative = 1e-14);
            assert_relative_eq!(g, ch2, max_relative = 1e-14);
            assert!(f.abs() < 1e-14);
            // finite-difference cross-check of the metric
            let d = fd_jet(&c, u, v, 1e-5);
            assert_relative_eq!(d[0].dot(&d[0]), ch2, max_relative = 1e-8);
        }
    }

    #[test]
    fn plane_is_identity() {
        let p = catalog_surface("plane").unwrap();
        assert_eq!(p.point(1.5, -2.0), Vec3::new(1.5, -2.0, 0.0));
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        for name in ["plane", "catenoid", "helicoid", "enneper", "graph:2,0,1;0,2,1;1,1,0.5"] {
            let c = catalog_surface(name).unwrap();
            for &(u, v) in &[(0.2, 0.4), (-0.7, 1.1), (1.3, -0.6)] {
                let j = c.jet(u, v);
                let d = fd_jet(&c, u, v, 1e-4);
                for (a, b) in [j.du, j.dv, j.duu, j.duv, j.dvv].iter().zip(d.iter()) {
                    assert!((a - b).norm() <= 1e-5 * (1.0 + a.norm()), "{name}: {a:?} vs {b:?}");
                }
            }
        }
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("Catenoid".parse::<SurfaceSpec>().unwrap(), SurfaceSpec::Catenoid);
        assert_eq!("plane_strip:2.5".parse::<SurfaceSpec>().unwrap(), SurfaceSpec::PlaneStrip { width: 2.5 });
        let g: SurfaceSpec = "graph:2,0,1;0,2,1".parse().unwrap();
        assert_eq!(g, SurfaceSpec::Graph(Polynomial::paraboloid()));
        assert_eq!(g.to_string().parse::<SurfaceSpec>().unwrap(), g);
        for bad in ["torus", "graph:1,2", "plane_strip:-1", "catenoid:3", "graph:99,0,1"] {
            assert!(matches!(bad.parse::<SurfaceSpec>(), Err(Error::UnknownSurface(_))), "{bad}");
        }
    }

    #[test]
    fn euler_characteristics() {
        let chi = |n: &str| catalog_surface(n).unwrap().euler_char;
        assert_eq!(chi("plane"), Some(1));
        assert_eq!(chi("enneper"), Some(1));
        assert_eq!(chi("catenoid"), Some(0));
        assert_eq!(chi("helicoid"), Some(1));
    }

    #[test]
    fn truncation_box_covers_ball() {
        for name in ["plane", "catenoid", "helicoid", "enneper"] {
            let c = catalog_surface(name).unwrap().truncated_to_radius(50.0);
            let d = c.domain;
            // every non-periodic boundary point lies outside the ball
            let n = 400;
            for k in 0..=n {
                let s = k as f64 / n as f64;
                let u = d.u[0] + s * d.width_u();
                let v = d.v[0] + s * d.width_v();
                let mut pts = Vec::new();
                if !d.periodic_v {
                    pts.push((u, d.v[0]));
                    pts.push((u, d.v[1]));
                }
                if !d.periodic_u {
                    pts.push((d.u[0], v));
                    pts.push((d.u[1], v));
                }
                for (a, b) in pts {
                    assert!(c.point(a, b).norm() >= 50.0 * (1.0 - 1e-9), "{name} at ({a},{b})");
                }
            }
        }
    }
}
