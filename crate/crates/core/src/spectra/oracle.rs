use nalgebra::{DMatrix, SymmetricEigen};

use crate::levelset::Polyline;
use crate::{Error, Result};

/// Resamples `p` into `n` elements of equal arc length; returns element lengths and midpoint weights.
fn resample(p: &Polyline, n: usize) -> (Vec<f64>, Vec<f64>) {
    let s = p.arclength();
    let total = *s.last().unwrap_or(&0.0);
    let theta_at = |x: f64| {
        let k = s.partition_point(|&y| y <= x).clamp(1, s.len() - 1);
        let (s0, s1) = (s[k - 1], s[k]);
        let w = if s1 > s0 { (x - s0) / (s1 - s0) } else { 0.0 };
        p.theta[k - 1] * (1.0 - w) + p.theta[k] * w
    };
    let h = total / n as f64;
    let theta = (0..n).map(|e| theta_at((e as f64 + 0.5) * h)).collect();
    (vec![h; n], theta)
}

/// Square root of the smallest Rayleigh quotient `∫φ'²/θ / ∫φ²θ` over piecewise-linear `φ`.
///
/// Arcs vanish at both ends; on cycles constants are excluded by taking the second eigenvalue.
pub fn rayleigh_oracle(component: &Polyline, n: usize) -> Result<f64> {
    if n < 32 {
        return Err(Error::InvalidArgument(format!("mesh needs at least 32 elements, got {n}")));
    }
    if component.len() < 2 {
        return Err(Error::UndefinedFrequency("component has fewer than two vertices".into()));
    }
    let (h, theta) = resample(component, n);
    if theta.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::UndefinedFrequency("non-positive weight".into()));
    }
    let nodes = if component.closed { n } else { n + 1 };
    let mut k = DMatrix::<f64>::zeros(nodes, nodes);
    let mut m = DMatrix::<f64>::zeros(nodes, nodes);
    for e in 0..n {
        let (a, b) = (e, (e + 1) % nodes);
        let ke = 1.0 / (theta[e] * h[e]);
        let me = theta[e] * h[e] / 6.0;
        k[(a, a)] += ke;
        k[(b, b)] += ke;
        k[(a, b)] -= ke;
        k[(b, a)] -= ke;
        m[(a, a)] += 2.0 * me;
        m[(b, b)] += 2.0 * me;
        m[(a, b)] += me;
        m[(b, a)] += me;
    }
    let (k, m) = if component.closed {
        (k, m)
    } else {
        let inner = nodes - 2;
        (k.view((1, 1), (inner, inner)).into_owned(), m.view((1, 1), (inner, inner)).into_owned())
    };
    let l = m.cholesky().ok_or(Error::EigenSolver)?;
    let linv = l.l().try_inverse().ok_or(Error::EigenSolver)?;
    let c = &linv * k * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(c, 1e-14, 10_000).ok_or(Error::EigenSolver)?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    let mu = if component.closed { vals[1] } else { vals[0] };
    Ok(mu.max(0.0).sqrt())
}
