use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step and number of Richardson levels (step sizes h, h/2, ..., h/2^(L-1)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdScheme {
    pub base_step: f64,
    pub richardson_levels: usize,
}

impl Default for FdScheme {
    fn default() -> Self {
        Self { base_step: 1e-3, richardson_levels: 2 }
    }
}

impl FdScheme {
    pub fn new(base_step: f64, richardson_levels: usize) -> Result<Self> {
        let s = Self { base_step, richardson_levels };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_step > 0.0 && self.base_step.is_finite()) {
            return Err(Error::InvalidInput(format!("fd step must be > 0, got {}", self.base_step)));
        }
        if !(1..=4).contains(&self.richardson_levels) {
            return Err(Error::InvalidInput(format!(
                "richardson levels must be in 1..=4, got {}",
                self.richardson_levels
            )));
        }
        Ok(())
    }

    /// Largest displacement of a central stencil.
    pub fn reach(&self) -> f64 {
        self.base_step
    }

    fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.richardson_levels).map(move |k| self.base_step / f64::powi(2.0, k as i32))
    }
}

fn stencil_err(e: Error) -> Error {
    match e {
        Error::Singular { what, distance, .. } => {
            Error::StencilSingular(format!("{what} at distance {distance:e}"))
        }
        other => other,
    }
}

/// Richardson tableau for estimates at h, h/2, ...; `order(j)` is the power
/// of h removed at elimination level j.
fn richardson(estimates: &[f64], order: impl Fn(usize) -> i32) -> f64 {
    let mut row = estimates.to_vec();
    for j in 1..row.len() {
        let factor = f64::powi(2.0, order(j)) - 1.0;
        for k in 0..row.len() - j {
            row[k] = row[k + 1] + (row[k + 1] - row[k]) / factor;
        }
    }
    row[0]
}

/// Central first derivative, Richardson-extrapolated.
pub fn fd_derivative(f: impl Fn(f64) -> Result<f64>, x: f64, fd: &FdScheme) -> Result<f64> {
    fd.validate()?;
    let est = fd
        .steps()
        .map(|h| Ok((f(x + h).map_err(stencil_err)? - f(x - h).map_err(stencil_err)?) / (2.0 * h)))
        .collect::<Result<Vec<_>>>()?;
    Ok(richardson(&est, |j| 2 * j as i32))
}

/// One-sided 3-point forward derivative (stencil x, x+h, x+2h).
pub fn fd_derivative_forward(f: impl Fn(f64) -> Result<f64>, x: f64, fd: &FdScheme) -> Result<f64> {
    fd.validate()?;
    let f0 = f(x).map_err(stencil_err)?;
    let est = fd
        .steps()
        .map(|h| {
            let f1 = f(x + h).map_err(stencil_err)?;
            let f2 = f(x + 2.0 * h).map_err(stencil_err)?;
            Ok((-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(richardson(&est, |j| j as i32 + 1))
}

/// First derivative on `[lower, ∞)`: forward at the boundary, central inside.
pub fn fd_derivative_in(
    f: impl Fn(f64) -> Result<f64>,
    x: f64,
    lower: f64,
    fd: &FdScheme,
) -> Result<f64> {
    if x < lower {
        return Err(Error::StencilOutsideDomain(format!("x = {x} is below the lower bound {lower}")));
    }
    if x == lower {
        return fd_derivative_forward(f, x, fd);
    }
    if x - fd.reach() < lower {
        return Err(Error::StencilOutsideDomain(format!(
            "central stencil at {x} with step {} crosses {lower}",
            fd.reach()
        )));
    }
    fd_derivative(f, x, fd)
}

pub fn fd_second_derivative(f: impl Fn(f64) -> Result<f64>, x: f64, fd: &FdScheme) -> Result<f64> {
    fd.validate()?;
    let f0 = f(x).map_err(stencil_err)?;
    let est = fd
        .steps()
        .map(|h| {
            let fp = f(x + h).map_err(stencil_err)?;
            let fm = f(x - h).map_err(stencil_err)?;
            Ok((fp - 2.0 * f0 + fm) / (h * h))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(richardson(&est, |j| 2 * j as i32))
}

fn shifted(point: &[f64], i: usize, delta: f64) -> Vec<f64> {
    let mut p = point.to_vec();
    p[i] += delta;
    p
}

pub fn fd_gradient(
    f: impl Fn(&[f64]) -> Result<f64>,
    point: &[f64],
    fd: &FdScheme,
) -> Result<Vec<f64>> {
    (0..point.len())
        .map(|i| fd_derivative(|t| f(&shifted(point, i, t - point[i])), point[i], fd))
        .collect()
}

/// Sum of second central differences over all coordinates.
pub fn fd_laplacian(f: impl Fn(&[f64]) -> Result<f64>, point: &[f64], fd: &FdScheme) -> Result<f64> {
    fd.validate()?;
    let f0 = f(point).map_err(stencil_err)?;
    let est = fd
        .steps()
        .map(|h| {
            let mut acc = 0.0;
            for i in 0..point.len() {
                let fp = f(&shifted(point, i, h)).map_err(stencil_err)?;
                let fm = f(&shifted(point, i, -h)).map_err(stencil_err)?;
                acc += fp - 2.0 * f0 + fm;
            }
            Ok(acc / (h * h))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(richardson(&est, |j| 2 * j as i32))
}

/// `f'' + (2/r) f'` for a radial profile; the stencil must stay in r > 0.
pub fn fd_radial_laplacian(f: impl Fn(f64) -> Result<f64>, r: f64, fd: &FdScheme) -> Result<f64> {
    if r - fd.reach() <= 0.0 {
        return Err(Error::StencilOutsideDomain(format!(
            "radial stencil at r = {r} with step {} reaches the origin",
            fd.reach()
        )));
    }
    let d2 = fd_second_derivative(&f, r, fd)?;
    let d1 = fd_derivative(&f, r, fd)?;
    Ok(d2 + 2.0 * d1 / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ok(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Result<f64> {
        move |x| Ok(f(x))
    }

    #[test]
    fn sine_slope_at_zero() {
        let d = fd_derivative(ok(f64::sin), 0.0, &FdScheme::default()).unwrap();
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn one_sided_exponential_at_boundary() {
        let d = fd_derivative_in(ok(|r| (-r).exp()), 0.0, 0.0, &FdScheme::default()).unwrap();
        assert_abs_diff_eq!(d, -1.0, epsilon = 1e-6);
    }

    #[test]
    fn abs_from_the_right_is_plus_one() {
        let d = fd_derivative_in(ok(f64::abs), 0.0, 0.0, &FdScheme::default()).unwrap();
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn stencil_crossing_lower_bound_is_error() {
        let e = fd_derivative_in(ok(f64::abs), 5e-4, 0.0, &FdScheme::default()).unwrap_err();
        assert!(matches!(e, Error::StencilOutsideDomain(_)));
        assert!(fd_derivative_in(ok(f64::abs), -1.0, 0.0, &FdScheme::default()).is_err());
    }

    #[test]
    fn quadratic_laplacian_in_r3() {
        let f = |p: &[f64]| Ok(p.iter().map(|x| x * x).sum::<f64>());
        let l = fd_laplacian(f, &[0.1, -0.2, 0.3], &FdScheme::default()).unwrap();
        assert_abs_diff_eq!(l, 6.0, epsilon = 1e-8);
    }

    #[test]
    fn radial_laplacian_of_exponential() {
        let l = fd_radial_laplacian(ok(|r| (-r).exp()), 2.0, &FdScheme::default()).unwrap();
        assert_abs_diff_eq!(l, 0.0, epsilon = 1e-7);
    }

    #[test]
    fn coulomb_is_harmonic() {
        let f = |p: &[f64]| Ok(1.0 / (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt());
        let l = fd_laplacian(f, &[0.0, 0.6, 0.8], &FdScheme::default()).unwrap();
        assert_abs_diff_eq!(l, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn richardson_levels_reduce_error() {
        let exact = 1.0f64.cos();
        let mut errs = vec![];
        for levels in 1..=3 {
            let fd = FdScheme::new(0.1, levels).unwrap();
            let d = fd_derivative(ok(f64::sin), 1.0, &fd).unwrap();
            errs.push((d - exact).abs());
        }
        // each level should gain at least two orders in h = 0.1
        assert!(errs[1] < errs[0] * 0.05, "{errs:?}");
        assert!(errs[2] < errs[1] * 0.05, "{errs:?}");
    }

    #[test]
    fn invalid_scheme() {
        assert!(FdScheme::new(0.0, 2).is_err());
        assert!(FdScheme::new(1e-3, 0).is_err());
        assert!(FdScheme::new(1e-3, 5).is_err());
    }
}
