use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Finite-difference weights on arbitrary nodes (Fornberg's recursion).
/// `w[k][j]` multiplies `f(x[j])` in the estimate of the k-th derivative at `z`.
pub fn fornberg_weights(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Weights of the interpolating polynomial through `x` evaluated at `z`.
pub fn lagrange_extrapolation_weights(z: f64, x: &[f64]) -> Vec<f64> {
    fornberg_weights(z, x, 0).swap_remove(0)
}

/// Least-squares polynomial `Σ c_k x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    pub coeffs: Vec<f64>,
    pub rms_residual: f64,
}

impl PolyFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<PolyFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("polyfit: x and y lengths differ".into()));
    }
    if x.len() <= degree {
        return Err(Error::Resolution(format!(
            "polyfit of degree {degree} needs more than {} points",
            x.len()
        )));
    }
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(x.len(), degree + 1, |i, k| (x[i] / scale).powi(k as i32));
    let b = DVector::from_column_slice(y);
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidInput(format!("polyfit: {e}")))?;
    let resid = &a * &sol - &b;
    let rms_residual = (resid.norm_squared() / x.len() as f64).sqrt();
    let coeffs = sol.iter().enumerate().map(|(k, c)| c / scale.powi(k as i32)).collect();
    Ok(PolyFit { coeffs, rms_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fornberg_reproduces_central_stencil() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_abs_diff_eq!(w[1][0], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1][2], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(w[2][0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[2][1], -2.0, epsilon = 1e-15);
    }

    #[test]
    fn fornberg_on_uneven_nodes_is_exact_for_polynomials() {
        let x = [0.0, 0.1, 0.25, 0.45, 0.7];
        let w = fornberg_weights(0.0, &x, 2);
        let f = |t: f64| 1.0 - 2.0 * t + 3.0 * t * t + 0.5 * t.powi(4);
        let d1: f64 = x.iter().zip(&w[1]).map(|(t, c)| c * f(*t)).sum();
        let d2: f64 = x.iter().zip(&w[2]).map(|(t, c)| c * f(*t)).sum();
        assert_abs_diff_eq!(d1, -2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(d2, 6.0, epsilon = 1e-8);
    }

    #[test]
    fn polyfit_recovers_cubic() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = x.iter().map(|t| 0.5 - t + 2.0 * t * t - 4.0 * t.powi(3)).collect();
        let p = polyfit(&x, &y, 3).unwrap();
        assert_abs_diff_eq!(p.coeffs[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.coeffs[1], -1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(p.coeffs[2], 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(p.eval(0.1), 0.5 - 0.1 + 0.02 - 0.004, epsilon = 1e-12);
    }

    #[test]
    fn polyfit_needs_enough_points() {
        assert!(polyfit(&[0.0, 1.0], &[1.0, 2.0], 2).is_err());
    }
}
