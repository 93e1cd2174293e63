use std::fmt;
use std::sync::Arc;

use super::{Jet, SurfaceChart, Vec3};
use crate::{Error, Result};

type ParamFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum FieldKind {
    /// `⟨x, e⟩`
    Coordinate(Vec3),
    /// `|⟨x, e⟩|`
    AbsCoordinate(Vec3),
    /// `|x|`
    Norm,
    /// Arbitrary function of the parameters, differentiated numerically.
    Custom(ParamFn),
}

impl fmt::Debug for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldKind::Coordinate(e) => write!(f, "Coordinate({}, {}, {})", e.x, e.y, e.z),
            FieldKind::AbsCoordinate(e) => write!(f, "AbsCoordinate({}, {}, {})", e.x, e.y, e.z),
            FieldKind::Norm => write!(f, "Norm"),
            FieldKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Scalar function on a surface chart.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub surface: Arc<SurfaceChart>,
    pub kind: FieldKind,
}

impl ScalarField {
    pub fn new(surface: impl Into<Arc<SurfaceChart>>, kind: FieldKind) -> Self {
        ScalarField { surface: surface.into(), kind }
    }

    pub fn coordinate(surface: impl Into<Arc<SurfaceChart>>, e: Vec3) -> Self {
        Self::new(surface, FieldKind::Coordinate(e))
    }

    pub fn abs_coordinate(surface: impl Into<Arc<SurfaceChart>>, e: Vec3) -> Self {
        Self::new(surface, FieldKind::AbsCoordinate(e))
    }

    pub fn norm(surface: impl Into<Arc<SurfaceChart>>) -> Self {
        Self::new(surface, FieldKind::Norm)
    }

    pub fn custom<F>(surface: impl Into<Arc<SurfaceChart>>, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(surface, FieldKind::Custom(Arc::new(f)))
    }

    /// Same field on a different chart.
    pub fn on(&self, surface: impl Into<Arc<SurfaceChart>>) -> Self {
        ScalarField { surface: surface.into(), kind: self.kind.clone() }
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match &self.kind {
            FieldKind::Custom(f) => f(u, v),
            _ => self.eval_pos(&self.surface.point(u, v)),
        }
    }

    fn eval_pos(&self, x: &Vec3) -> f64 {
        match &self.kind {
            FieldKind::Coordinate(e) => x.dot(e),
            FieldKind::AbsCoordinate(e) => x.dot(e).abs(),
            FieldKind::Norm => x.norm(),
            FieldKind::Custom(_) => unreachable!("custom fields are parametric"),
        }
    }

    /// Value and parameter partials `(f, f_u, f_v)` from a precomputed jet.
    pub fn param_grad_jet(&self, jet: &Jet, u: f64, v: f64) -> (f64, f64, f64) {
        let amb = |d: Vec3| (d.dot(&jet.du), d.dot(&jet.dv));
        match &self.kind {
            FieldKind::Coordinate(e) => {
                let (a, b) = amb(*e);
                (jet.pos.dot(e), a, b)
            }
            FieldKind::AbsCoordinate(e) => {
                let s = jet.pos.dot(e);
                let (a, b) = amb(*e * s.signum());
                (s.abs(), a, b)
            }
            FieldKind::Norm => {
                let r = jet.pos.norm();
                if r == 0.0 {
                    return (0.0, 0.0, 0.0);
                }
                let (a, b) = amb(jet.pos / r);
                (r, a, b)
            }
            FieldKind::Custom(f) => {
                let h = 1e-6 * self.surface.domain.extent().max(1e-300);
                (f(u, v), (f(u + h, v) - f(u - h, v)) / (2.0 * h), (f(u, v + h) - f(u, v - h)) / (2.0 * h))
            }
        }
    }

    pub fn param_grad(&self, u: f64, v: f64) -> (f64, f64, f64) {
        self.param_grad_jet(&self.surface.jet(u, v), u, v)
    }

    /// Tangential gradient from a precomputed jet.
    pub fn gradient_jet(&self, jet: &Jet, u: f64, v: f64) -> Result<Vec3> {
        let (_, fu, fv) = self.param_grad_jet(jet, u, v);
        let [e, f, g] = jet.metric();
        let det = e * g - f * f;
        if !(det > 0.0) || jet.normal().is_none() {
            return Err(Error::DegenerateMetric { u, v });
        }
        let a = (g * fu - f * fv) / det;
        let b = (e * fv - f * fu) / det;
        Ok(jet.tangent(a, b))
    }
}

/// Tangential gradient of `field` at `(u, v)` and its norm.
pub fn surface_gradient(field: &ScalarField, u: f64, v: f64) -> Result<(Vec3, f64)> {
    let g = field.gradient_jet(&field.surface.jet(u, v), u, v)?;
    Ok((g, g.norm()))
}
