use nalgebra::{Matrix2, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use super::{Jet, ParamGrid, SurfaceChart, Vec3};
use crate::{Error, Result};

/// Pointwise first and second fundamental forms with principal data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureData {
    /// `(E, F, G)`
    pub metric: [f64; 3],
    /// `(e, f, g)` with respect to `normal`.
    pub second_form: [f64; 3],
    pub normal: [f64; 3],
    /// Trace of the shape operator, `κ1 + κ2`.
    pub mean_curvature: f64,
    /// Sorted so that `κ1 >= κ2`.
    pub principal_curvatures: (f64, f64),
    pub principal_directions: ([f64; 3], [f64; 3]),
}

impl CurvatureData {
    pub fn normal_vec(&self) -> Vec3 {
        Vec3::from(self.normal)
    }

    /// Normal curvature `II(w, w)/|w|²` along an ambient tangent vector.
    pub fn normal_curvature(&self, w: &Vec3) -> f64 {
        let (k1, k2) = self.principal_curvatures;
        let d1 = Vec3::from(self.principal_directions.0);
        let d2 = Vec3::from(self.principal_directions.1);
        let (a, b) = (w.dot(&d1), w.dot(&d2));
        let n2 = a * a + b * b;
        if n2 == 0.0 {
            0.0
        } else {
            (k1 * a * a + k2 * b * b) / n2
        }
    }
}

/// Second fundamental form coefficients along `nu`.
fn second_form(jet: &Jet, nu: &Vec3) -> [f64; 3] {
    [jet.duu.dot(nu), jet.duv.dot(nu), jet.dvv.dot(nu)]
}

pub(crate) fn curvature_from_jet(jet: &Jet, u: f64, v: f64) -> Result<CurvatureData> {
    let nu = jet.normal().ok_or(Error::DegenerateMetric { u, v })?;
    let [be, bf, bg] = second_form(jet, &nu);
    let e1 = jet.du.normalize();
    let e2 = nu.cross(&e1);
    let ii = |w: &Vec3| -> Result<f64> {
        let (a, b) = jet.tangent_coords(w).ok_or(Error::DegenerateMetric { u, v })?;
        Ok(a * a * be + 2.0 * a * b * bf + b * b * bg)
    };
    let s11 = ii(&e1)?;
    let s22 = ii(&e2)?;
    // polarization
    let s12 = 0.5 * (ii(&(e1 + e2))? - s11 - s22);
    let eig = SymmetricEigen::new(Matrix2::new(s11, s12, s12, s22));
    let (i1, i2) = if eig.eigenvalues[0] >= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let dir = |k: usize| {
        let c = eig.eigenvectors.column(k);
        let w = (e1 * c[0] + e2 * c[1]).normalize();
        [w.x, w.y, w.z]
    };
    Ok(CurvatureData {
        metric: jet.metric(),
        second_form: [be, bf, bg],
        normal: [nu.x, nu.y, nu.z],
        mean_curvature: s11 + s22,
        principal_curvatures: (eig.eigenvalues[i1], eig.eigenvalues[i2]),
        principal_directions: (dir(i1), dir(i2)),
    })
}

/// Curvature data of `surface` at parameter point `(u, v)`.
pub fn curvature_at(surface: &SurfaceChart, u: f64, v: f64) -> Result<CurvatureData> {
    curvature_from_jet(&surface.jet(u, v), u, v)
}

/// Largest ratio `max|κ|/min|κ|` over the grid nodes.
///
/// Flat points (both curvatures below `1e-12` relative to the grid maximum) are skipped.
/// A single curvature vanishing at a curved point yields `+∞`.
pub fn gauss_map_distortion(surface: &SurfaceChart, grid: &ParamGrid) -> Result<f64> {
    let nodes = grid.nodes();
    let ks: Vec<(f64, f64)> = nodes
        .par_iter()
        .filter_map(|&(u, v)| curvature_at(surface, u, v).ok())
        .map(|c| {
            let (a, b) = (c.principal_curvatures.0.abs(), c.principal_curvatures.1.abs());
            (a.max(b), a.min(b))
        })
        .collect();
    let scale = ks.iter().map(|k| k.0).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::DistortionUndefined);
    }
    let mut worst: Option<f64> = None;
    for &(big, small) in &ks {
        if big <= 1e-12 * scale {
            continue;
        }
        let r = if small == 0.0 { f64::INFINITY } else { big / small };
        worst = Some(worst.map_or(r, |w: f64| w.max(r)));
    }
    worst.ok_or(Error::DistortionUndefined)
}

/// `max |H + (α−2) k_ν(τ)|` over nodes where `e^⊤ ≠ 0`, with `τ = e^⊤/|e^⊤|`.
pub fn alpha_minimality_residual(surface: &SurfaceChart, e: Vec3, alpha: f64, grid: &ParamGrid) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must exceed 1, got {alpha}")));
    }
    let nodes = grid.nodes();
    let vals: Vec<Option<f64>> = nodes
        .par_iter()
        .map(|&(u, v)| {
            let c = curvature_at(surface, u, v).ok()?;
            let nu = c.normal_vec();
            let et = e - nu * e.dot(&nu);
            if et.norm() <= 1e-9 * e.norm() {
                return None;
            }
            let tau = et.normalize();
            Some((c.mean_curvature + (alpha - 2.0) * c.normal_curvature(&tau)).abs())
        })
        .collect();
    let mut out: Option<f64> = None;
    for r in vals.into_iter().flatten() {
        out = Some(out.map_or(r, |o: f64| o.max(r)));
    }
    out.ok_or(Error::NormalDirection)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{catalog_surface, Domain};
    use approx::assert_relative_eq;

    /// Shape operator from finite differences of the normal, `-dν = S dx`.
    fn fd_principal(surface: &SurfaceChart, u: f64, v: f64) -> (f64, f64) {
        let h = 1e-5;
        let n = |a, b| surface.jet(a, b).normal().unwrap();
        let j = surface.jet(u, v);
        let nu = (n(u + h, v) - n(u - h, v)) / (2.0 * h);
        let nv = (n(u, v + h) - n(u, v - h)) / (2.0 * h);
        // II_ij = -<n_i, x_j>, I_ij = <x_i, x_j>
        let ii = Matrix2::new(-nu.dot(&j.du), -nu.dot(&j.dv), -nv.dot(&j.du), -nv.dot(&j.dv));
        let ii = (ii + ii.transpose()) * 0.5;
        let [e, f, g] = j.metric();
        let gi = Matrix2::new(e, f, f, g).try_inverse().unwrap();
        let s = gi * ii;
        let tr = s.trace();
        let det = s.determinant();
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 + disc, tr / 2.0 - disc)
    }

    #[test]
    fn catenoid_neck_curvatures() {
        let c = catalog_surface("catenoid").unwrap();
        let k = curvature_at(&c, 0.0, 0.0).unwrap();
        assert_relative_eq!(k.principal_curvatures.0, 1.0, epsilon = 1e-12);
        assert_relative_eq!(k.principal_curvatures.1, -1.0, epsilon = 1e-12);
        assert!(k.mean_curvature.abs() < 1e-12);
        let (a, b) = fd_principal(&c, 0.0, 0.0);
        assert_relative_eq!(a, 1.0, epsilon = 1e-6);
        assert_relative_eq!(b, -1.0, epsilon = 1e-6);
    }

    #[test]
    fn plane_is_flat_and_distortion_undefined() {
        let p = catalog_surface("plane").unwrap();
        let k = curvature_at(&p, 3.0, -1.0).unwrap();
        assert_eq!(k.principal_curvatures, (0.0, 0.0));
        let g = ParamGrid::new(p.domain, 8, 8);
        assert_eq!(gauss_map_distortion(&p, &g), Err(Error::DistortionUndefined));
    }

    #[test]
    fn principal_data_matches_difference_oracle() {
        for name in ["helicoid", "enneper", "graph:2,0,1;0,2,1", "graph:3,0,0.3;1,2,-0.5"] {
            let s = catalog_surface(name).unwrap();
            for &(u, v) in &[(0.3, 0.2), (-0.5, 0.7), (0.9, -0.4)] {
                let k = curvature_at(&s, u, v).unwrap();
                let (a, b) = fd_principal(&s, u, v);
                assert_relative_eq!(k.principal_curvatures.0, a, epsilon = 1e-5);
                assert_relative_eq!(k.principal_curvatures.1, b, epsilon = 1e-5);
                let d1 = Vec3::from(k.principal_directions.0);
                let d2 = Vec3::from(k.principal_directions.1);
                assert!(d1.dot(&d2).abs() < 1e-9);
                assert_relative_eq!(d1.norm(), 1.0, epsilon = 1e-12);
                assert_relative_eq!(
                    k.mean_curvature,
                    k.principal_curvatures.0 + k.principal_curvatures.1,
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn minimal_catalog_distortion_is_one() {
        for name in ["catenoid", "enneper", "helicoid"] {
            let s = catalog_surface(name).unwrap();
            let g = ParamGrid::new(s.domain, 40, 40);
            let k = gauss_map_distortion(&s, &g).unwrap();
            assert!(k <= 1.0 + 1e-6, "{name}: {k}");
        }
    }

    #[test]
    fn paraboloid_distortion_exceeds_one() {
        let s = catalog_surface("graph:2,0,1;0,2,1").unwrap();
        let g = ParamGrid::new(s.domain, 20, 20);
        // principal curvatures 2/(1+4r²)^{3/2} and 2/(1+4r²)^{1/2}: ratio 1 + 4r², max at the corner
        let k = gauss_map_distortion(&s, &g).unwrap();
        assert_relative_eq!(k, 9.0, max_relative = 1e-9);
    }

    #[test]
    fn residuals() {
        let c = catalog_surface("catenoid").unwrap();
        let g = ParamGrid::new(c.domain, 30, 30);
        let e = Vec3::new(0.3, -0.4, 0.8).normalize();
        assert!(alpha_minimality_residual(&c, e, 2.0, &g).unwrap() < 1e-8);
        let p = catalog_surface("plane").unwrap();
        assert_eq!(alpha_minimality_residual(&p, Vec3::x(), 3.7, &ParamGrid::new(p.domain, 5, 5)).unwrap(), 0.0);
        assert_eq!(
            alpha_minimality_residual(&p, Vec3::z(), 2.0, &ParamGrid::new(p.domain, 5, 5)),
            Err(Error::NormalDirection)
        );
        // paraboloid: H = 2(1 + 2r²... ) by hand: H = (2 + 2(1+4r²))/(1+4r²)^{3/2} at radius r
        let s = catalog_surface("graph:2,0,1;0,2,1").unwrap().with_domain(Domain::new([0.2, 0.6], [0.0, 0.0]));
        let g = ParamGrid::new(s.domain, 4, 1);
        let r = alpha_minimality_residual(&s, Vec3::z(), 2.0, &g).unwrap();
        let hmax = (0..=4)
            .map(|i| {
                let r2 = (0.2 + 0.1 * i as f64).powi(2);
                (4.0 + 8.0 * r2) / (1.0 + 4.0 * r2).powf(1.5)
            })
            .fold(0.0, f64::max);
        assert_relative_eq!(r, hmax, max_relative = 1e-10);
    }
}
