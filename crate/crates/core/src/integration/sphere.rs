use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Vec3;

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Product rule on the unit sphere: Gauss-Legendre in cos θ times a uniform
/// azimuthal grid with twice as many points. Weights sum to 4π.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereRule {
    pub polar_points: usize,
    pub nodes: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl Default for SphereRule {
    fn default() -> Self {
        Self::product(17)
    }
}

impl SphereRule {
    pub fn product(polar_points: usize) -> Self {
        let n = polar_points.max(1);
        let (ct, wt) = gauss_legendre(n);
        let naz = 2 * n;
        let dphi = 2.0 * PI / naz as f64;
        let mut nodes = Vec::with_capacity(n * naz);
        let mut weights = Vec::with_capacity(n * naz);
        for (c, w) in ct.iter().zip(&wt) {
            let s = (1.0 - c * c).max(0.0).sqrt();
            for k in 0..naz {
                let phi = k as f64 * dphi;
                nodes.push(Vec3::new(s * phi.cos(), s * phi.sin(), *c));
                weights.push(w * dphi);
            }
        }
        Self { polar_points: n, nodes, weights }
    }

    /// Highest spherical-harmonic degree integrated exactly.
    pub fn degree(&self) -> usize {
        2 * self.polar_points - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `∫_{S²} f(ω) dω` with the unnormalised measure.
pub fn sphere_average(f: impl Fn(Vec3) -> f64, rule: &SphereRule) -> Result<f64> {
    let mut acc = 0.0;
    for (w, n) in rule.weights.iter().zip(&rule.nodes) {
        let v = f(*n);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("sphere integrand at {n:?}")));
        }
        acc += w * v;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_nodes_integrate_polynomials() {
        let (x, w) = gauss_legendre(8);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert_abs_diff_eq!(i, 2.0 / 15.0, epsilon = 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn constant_and_odd_moments() {
        let rule = SphereRule::default();
        assert_abs_diff_eq!(sphere_average(|_| 1.0, &rule).unwrap(), 4.0 * PI, epsilon = 1e-12);
        let v = Vec3::new(0.3, -1.7, 0.4);
        assert_abs_diff_eq!(sphere_average(|w| w.dot(v), &rule).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            sphere_average(|w| w.z * w.z, &rule).unwrap(),
            4.0 * PI / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn nodes_are_unit() {
        let rule = SphereRule::product(9);
        assert!(rule.nodes.iter().all(|n| (n.norm() - 1.0).abs() < 1e-12));
        assert_eq!(rule.degree(), 17);
    }

    #[test]
    fn non_finite_integrand_rejected() {
        assert!(sphere_average(|_| f64::NAN, &SphereRule::product(2)).is_err());
    }
}
