//! Parametric surface charts and pointwise differential geometry.

mod catalog;
mod curvature;
mod field;
mod grid;
mod obj;

pub use catalog::{catalog_surface, graph_surface, Monomial, Polynomial, Shape, SurfaceChart, SurfaceSpec};
pub use curvature::{alpha_minimality_residual, curvature_at, gauss_map_distortion, CurvatureData};
pub use field::{surface_gradient, FieldKind, ScalarField};
pub use grid::{FieldSamples, ParamGrid};
pub use obj::write_obj;

use serde::{Deserialize, Serialize};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Immersion value with first and second parameter derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub pos: Vec3,
    pub du: Vec3,
    pub dv: Vec3,
    pub duu: Vec3,
    pub duv: Vec3,
    pub dvv: Vec3,
}

impl Jet {
    /// First fundamental form `(E, F, G)`.
    pub fn metric(&self) -> [f64; 3] {
        [self.du.dot(&self.du), self.du.dot(&self.dv), self.dv.dot(&self.dv)]
    }

    pub fn metric_det(&self) -> f64 {
        let [e, f, g] = self.metric();
        e * g - f * f
    }

    /// Area element `sqrt(EG - F^2)`.
    pub fn area_element(&self) -> f64 {
        self.metric_det().max(0.0).sqrt()
    }

    /// Unit normal `x_u × x_v / |x_u × x_v|`, `None` where the immersion degenerates.
    pub fn normal(&self) -> Option<Vec3> {
        let n = self.du.cross(&self.dv);
        let len = n.norm();
        let scale = self.du.norm() * self.dv.norm();
        if len <= 1e-14 * scale.max(1e-300) || len == 0.0 {
            None
        } else {
            Some(n / len)
        }
    }

    /// Tangent vector `a x_u + b x_v`.
    pub fn tangent(&self, a: f64, b: f64) -> Vec3 {
        self.du * a + self.dv * b
    }

    /// Parameter coordinates of the tangential part of an ambient vector.
    pub fn tangent_coords(&self, w: &Vec3) -> Option<(f64, f64)> {
        let [e, f, g] = self.metric();
        let det = e * g - f * f;
        if det <= 0.0 {
            return None;
        }
        let wu = w.dot(&self.du);
        let wv = w.dot(&self.dv);
        Some(((g * wu - f * wv) / det, (e * wv - f * wu) / det))
    }
}

/// Rectangle `[u0, u1] × [v0, v1]`; a periodic axis identifies its two ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub periodic_u: bool,
    pub periodic_v: bool,
}

impl Domain {
    pub fn new(u: [f64; 2], v: [f64; 2]) -> Self {
        Domain { u, v, periodic_u: false, periodic_v: false }
    }

    pub fn periodic_in_u(mut self) -> Self {
        self.periodic_u = true;
        self
    }

    pub fn periodic_in_v(mut self) -> Self {
        self.periodic_v = true;
        self
    }

    /// Scales the non-periodic axes by `k` about their midpoints.
    pub fn enlarged(&self, k: f64) -> Self {
        let grow = |[a, b]: [f64; 2], periodic: bool| {
            if periodic {
                [a, b]
            } else {
                let (m, r) = (0.5 * (a + b), 0.5 * (b - a) * k);
                [m - r, m + r]
            }
        };
        Domain { u: grow(self.u, self.periodic_u), v: grow(self.v, self.periodic_v), ..*self }
    }

    pub fn width_u(&self) -> f64 {
        self.u[1] - self.u[0]
    }

    pub fn width_v(&self) -> f64 {
        self.v[1] - self.v[0]
    }

    pub fn extent(&self) -> f64 {
        self.width_u().max(self.width_v())
    }

    /// Maps a parameter point into the fundamental rectangle along periodic axes.
    pub fn wrap(&self, u: f64, v: f64) -> (f64, f64) {
        let wrap1 = |x: f64, [a, b]: [f64; 2], periodic: bool| {
            if periodic {
                let p = b - a;
                a + (x - a).rem_euclid(p)
            } else {
                x
            }
        };
        (wrap1(u, self.u, self.periodic_u), wrap1(v, self.v, self.periodic_v))
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        let (u, v) = self.wrap(u, v);
        let tol = 1e-12 * self.extent();
        u >= self.u[0] - tol && u <= self.u[1] + tol && v >= self.v[0] - tol && v <= self.v[1] + tol
    }

    /// Parameter distance respecting periodic identification.
    pub fn distance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let d1 = |x: f64, y: f64, [lo, hi]: [f64; 2], periodic: bool| {
            if periodic {
                let p = hi - lo;
                let d = (x - y).rem_euclid(p);
                d.min(p - d)
            } else {
                (x - y).abs()
            }
        };
        let du = d1(a.0, b.0, self.u, self.periodic_u);
        let dv = d1(a.1, b.1, self.v, self.periodic_v);
        du.hypot(dv)
    }
}
