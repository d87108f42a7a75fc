//! The exponential factor `F` that carries the Coulomb cusps, its smoothed
//! companion `F₁`, and the factorizations `ψ = e^F φ = e^{F-F₁} ψ₁`.
//!
//! For a molecule `F` sums `-(Z_l/2)|x_j - R_l|` over every nucleus; the
//! defining property `ΔF = V` is what the checks below test.

use crate::error::{Error, Result};
use crate::integration::{fd_gradient, fd_laplacian, FdScheme};
use crate::model::{potential_v, Configuration, JastrowPrefactor, SystemSpec, Vec3, WavefunctionModel};

/// Largest exponent passed to `exp` by [`eval_phi`] and [`eval_psi1`].
pub const EXPONENT_CAP: f64 = 700.0;

/// `F + log P`, its gradient and Laplacian for the Jastrow-type two-electron
/// trial `e^{F} e^{-b(r₁²+r₂²) - c r₁₂²}` around a nucleus of charge `z`.
pub fn jastrow_log_parts(z: f64, p: JastrowPrefactor, x1: Vec3, x2: Vec3) -> (f64, Vec<f64>, f64) {
    let (r1, r2) = (x1.norm(), x2.norm());
    let d = x1 - x2;
    let r12 = d.norm();
    let value = -0.5 * z * (r1 + r2) + 0.25 * r12 - p.b * (r1 * r1 + r2 * r2) - p.c * r12 * r12;
    let u12 = d * (1.0 / r12);
    let g1 = x1 * (-0.5 * z / r1) + u12 * 0.25 - x1 * (2.0 * p.b) - d * (2.0 * p.c);
    let g2 = x2 * (-0.5 * z / r2) - u12 * 0.25 - x2 * (2.0 * p.b) + d * (2.0 * p.c);
    let mut grad = g1.to_array().to_vec();
    grad.extend(g2.to_array());
    let lap = -z * (1.0 / r1 + 1.0 / r2) + 1.0 / r12 - 12.0 * p.b - 12.0 * p.c;
    (value, grad, lap)
}

pub fn eval_f(spec: &SystemSpec, c: &Configuration) -> Result<f64> {
    spec.check_arity(c)?;
    let p = c.positions();
    let mut f = 0.0;
    for (j, xj) in p.iter().enumerate() {
        for n in spec.nuclei() {
            f -= 0.5 * n.charge * (*xj - n.position).norm();
        }
        for xk in &p[j + 1..] {
            f += 0.25 * (*xj - *xk).norm();
        }
    }
    Ok(f)
}

fn coalescence_guard(spec: &SystemSpec, c: &Configuration) -> Result<()> {
    let d = spec.min_singular_distance(c);
    let floor = spec.singular_floor();
    if d < floor {
        return Err(Error::Singular { what: "coalescence in grad F".into(), distance: d, floor });
    }
    Ok(())
}

pub fn eval_grad_f(spec: &SystemSpec, c: &Configuration) -> Result<Vec<f64>> {
    spec.check_arity(c)?;
    coalescence_guard(spec, c)?;
    let p = c.positions();
    let mut grad = Vec::with_capacity(3 * p.len());
    for (j, xj) in p.iter().enumerate() {
        let mut g = Vec3::ZERO;
        for n in spec.nuclei() {
            let d = *xj - n.position;
            g += d * (-0.5 * n.charge / d.norm());
        }
        for (k, xk) in p.iter().enumerate() {
            if k != j {
                let d = *xj - *xk;
                g += d * (0.25 / d.norm());
            }
        }
        grad.extend(g.to_array());
    }
    Ok(grad)
}

pub fn eval_f1_and_grad(spec: &SystemSpec, c: &Configuration) -> Result<(f64, Vec<f64>)> {
    spec.check_arity(c)?;
    let p = c.positions();
    let mut f = 0.0;
    let mut grad = vec![Vec3::ZERO; p.len()];
    for (j, xj) in p.iter().enumerate() {
        for n in spec.nuclei() {
            let d = *xj - n.position;
            let s = (d.norm_sq() + 1.0).sqrt();
            f -= 0.5 * n.charge * s;
            grad[j] += d * (-0.5 * n.charge / s);
        }
        for k in j + 1..p.len() {
            let d = *xj - p[k];
            let s = (d.norm_sq() + 1.0).sqrt();
            f += 0.25 * s;
            grad[j] += d * (0.25 / s);
            grad[k] += d * (-0.25 / s);
        }
    }
    Ok((f, grad.into_iter().flat_map(Vec3::to_array).collect()))
}

/// Analytic `ΔF₁` over all `3N` coordinates.
pub fn laplacian_f1(spec: &SystemSpec, c: &Configuration) -> Result<f64> {
    spec.check_arity(c)?;
    // Δ√(r²+1) = (2r²+3)/(r²+1)^{3/2} in R³
    let lap = |r2: f64| (2.0 * r2 + 3.0) / (r2 + 1.0).powf(1.5);
    let p = c.positions();
    let mut l = 0.0;
    for (j, xj) in p.iter().enumerate() {
        for n in spec.nuclei() {
            l -= 0.5 * n.charge * lap((*xj - n.position).norm_sq());
        }
        for xk in &p[j + 1..] {
            // the pair term depends on both x_j and x_k
            l += 0.5 * lap((*xj - *xk).norm_sq());
        }
    }
    Ok(l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzFactors {
    pub f_value: f64,
    pub f1_value: f64,
    pub grad_f: Vec<f64>,
    pub grad_f1: Vec<f64>,
}

impl AnsatzFactors {
    pub fn at(spec: &SystemSpec, c: &Configuration) -> Result<Self> {
        let f_value = eval_f(spec, c)?;
        let grad_f = eval_grad_f(spec, c)?;
        let (f1_value, grad_f1) = eval_f1_and_grad(spec, c)?;
        Ok(Self { f_value, f1_value, grad_f, grad_f1 })
    }

    /// `F - F₁`.
    pub fn difference(&self) -> f64 {
        self.f_value - self.f1_value
    }

    /// `|∇(F - F₁)|`.
    pub fn difference_grad_norm(&self) -> f64 {
        self.grad_f.iter().zip(&self.grad_f1).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }
}

fn capped_exp(exponent: f64) -> Result<f64> {
    if exponent > EXPONENT_CAP {
        return Err(Error::ExponentCap { exponent, cap: EXPONENT_CAP });
    }
    Ok(exponent.exp())
}

fn check_model(m: &WavefunctionModel, spec: &SystemSpec, c: &Configuration) -> Result<()> {
    spec.check_arity(c)?;
    if m.electron_count() != c.len() {
        return Err(Error::ArityMismatch { expected: m.electron_count(), found: c.len() });
    }
    Ok(())
}

/// `ψ e^{exponent}` computed in log form when the model allows it.
fn psi_times_exp(m: &WavefunctionModel, c: &Configuration, exponent: f64) -> Result<f64> {
    if -exponent > EXPONENT_CAP || exponent > EXPONENT_CAP {
        return Err(Error::ExponentCap { exponent: exponent.abs(), cap: EXPONENT_CAP });
    }
    match m.log_value(c) {
        Some(l) => Ok(m.normalization * (l + exponent).exp()),
        None => Ok(m.psi(c)? * capped_exp(exponent)?),
    }
}

/// `φ = e^{-F} ψ`.
pub fn eval_phi(m: &WavefunctionModel, spec: &SystemSpec, c: &Configuration) -> Result<f64> {
    check_model(m, spec, c)?;
    psi_times_exp(m, c, -eval_f(spec, c)?)
}

/// Analytic `∇φ = e^{-F}(∇ψ - ψ∇F)`, away from coalescences.
pub fn eval_grad_phi(m: &WavefunctionModel, spec: &SystemSpec, c: &Configuration) -> Result<Vec<f64>> {
    check_model(m, spec, c)?;
    let gf = eval_grad_f(spec, c)?;
    let d = m.derivs(c)?;
    let phi = eval_phi(m, spec, c)?;
    if d.value != 0.0 {
        // ∇φ = φ (∇ψ/ψ - ∇F) keeps the exponential scale out of the subtraction
        return Ok(d.grad.iter().zip(&gf).map(|(g, f)| phi * (g / d.value - f)).collect());
    }
    let e = capped_exp(-eval_f(spec, c)?)?;
    Ok(d.grad.iter().map(|g| e * g).collect())
}

/// `ψ₁ = e^{F₁-F} ψ`.
pub fn eval_psi1(m: &WavefunctionModel, spec: &SystemSpec, c: &Configuration) -> Result<f64> {
    check_model(m, spec, c)?;
    let (f1, _) = eval_f1_and_grad(spec, c)?;
    psi_times_exp(m, c, f1 - eval_f(spec, c)?)
}

fn stencil_clearance(spec: &SystemSpec, c: &Configuration, fd: &FdScheme) -> Result<()> {
    fd.validate()?;
    let d = spec.min_singular_distance(c);
    // one coordinate moves by at most `reach`; keep a factor 2 of headroom
    let need = 2.0 * fd.reach();
    if d <= need {
        return Err(Error::StencilSingular(format!(
            "stencil of reach {} comes within {} of a coalescence",
            fd.reach(),
            d
        )));
    }
    Ok(())
}


/// `|Δ_FD F - V| / max(1, |V|)`.
pub fn check_delta_f_equals_v(spec: &SystemSpec, c: &Configuration, fd: &FdScheme) -> Result<f64> {
    spec.check_arity(c)?;
    stencil_clearance(spec, c, fd)?;
    let v = potential_v(spec, c)?;
    let f = |x: &[f64]| eval_f(spec, &Configuration::from_flat(x)?);
    let lap = fd_laplacian(f, &c.to_flat(), fd)?;
    Ok((lap - v).abs() / v.abs().max(1.0))
}

/// Left side of the elliptic equation for `ψ₁`:
/// `Δψ₁ + 2∇(F-F₁)·∇ψ₁ + (|∇(F-F₁)|² - ΔF₁ + E) ψ₁`, with finite-difference
/// derivatives of `ψ₁` and analytic coefficients.
pub fn elliptic_residual_psi1(
    m: &WavefunctionModel,
    spec: &SystemSpec,
    energy: f64,
    c: &Configuration,
    fd: &FdScheme,
) -> Result<f64> {
    check_model(m, spec, c)?;
    stencil_clearance(spec, c, fd)?;
    let a = AnsatzFactors::at(spec, c)?;
    let psi1 = |x: &[f64]| eval_psi1(m, spec, &Configuration::from_flat(x)?);
    let flat = c.to_flat();
    let lap = fd_laplacian(psi1, &flat, fd)?;
    let grad = fd_gradient(psi1, &flat, fd)?;
    let mut drift = 0.0;
    let mut gsq = 0.0;
    for i in 0..flat.len() {
        let g = a.grad_f[i] - a.grad_f1[i];
        drift += g * grad[i];
        gsq += g * g;
    }
    let value = eval_psi1(m, spec, c)?;
    Ok(lap + 2.0 * drift + (gsq - laplacian_f1(spec, c)? + energy) * value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Nucleus;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn cfg(p: &[[f64; 3]]) -> Configuration {
        Configuration::new(p.iter().map(|a| Vec3::new(a[0], a[1], a[2])).collect()).unwrap()
    }

    #[test]
    fn f_examples() {
        let he = SystemSpec::atom(2.0, 2).unwrap();
        assert_abs_diff_eq!(eval_f(&he, &cfg(&[[1., 0., 0.], [-1., 0., 0.]])).unwrap(), -1.5);
        let h = SystemSpec::atom(3.0, 1).unwrap();
        assert_eq!(eval_f(&h, &cfg(&[[0., 0., 0.]])).unwrap(), 0.0);
        let s = SystemSpec::atom(1.0, 2).unwrap();
        assert_abs_diff_eq!(eval_f(&s, &cfg(&[[0., 0., 0.], [0., 0., 2.]])).unwrap(), -0.5);
    }

    #[test]
    fn grad_f_examples() {
        let he = SystemSpec::atom(2.0, 2).unwrap();
        let c = cfg(&[[1., 0., 0.], [-1., 0., 0.]]);
        let g = eval_grad_f(&he, &c).unwrap();
        assert_abs_diff_eq!(g[0], -0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], 0.0);
        assert_abs_diff_eq!(g.iter().map(|x| x * x).sum::<f64>(), 1.125, epsilon = 1e-14);
        let h = SystemSpec::atom(3.0, 1).unwrap();
        let g = eval_grad_f(&h, &cfg(&[[0.3, -2.0, 0.7]])).unwrap();
        assert_abs_diff_eq!(g.iter().map(|x| x * x).sum::<f64>().sqrt(), 1.5, epsilon = 1e-14);
        assert!(matches!(
            eval_grad_f(&he, &cfg(&[[1., 0., 0.], [1., 0., 0.]])),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn f1_examples() {
        let he = SystemSpec::atom(2.0, 2).unwrap();
        let (f1, _) = eval_f1_and_grad(&he, &cfg(&[[1., 0., 0.], [-1., 0., 0.]])).unwrap();
        assert_abs_diff_eq!(f1, -2.0 * 2f64.sqrt() + 5f64.sqrt() / 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f1, -2.269410, epsilon = 1e-6);
        let h = SystemSpec::atom(1.5, 1).unwrap();
        let (f1, g) = eval_f1_and_grad(&h, &cfg(&[[0., 0., 0.]])).unwrap();
        assert_eq!(f1, -0.75);
        assert!(g.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn f1_gradient_and_laplacian_match_fd() {
        let spec = SystemSpec::atom(2.0, 3).unwrap();
        let c = cfg(&[[0.3, -0.2, 0.1], [-0.5, 0.4, 1.0], [0.0, 0.1, -0.3]]);
        let fd = FdScheme::default();
        let f1 = |x: &[f64]| Ok(eval_f1_and_grad(&spec, &Configuration::from_flat(x)?)?.0);
        let g = fd_gradient(f1, &c.to_flat(), &fd).unwrap();
        let (_, ga) = eval_f1_and_grad(&spec, &c).unwrap();
        for (a, b) in g.iter().zip(&ga) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
        let l = fd_laplacian(f1, &c.to_flat(), &fd).unwrap();
        assert_abs_diff_eq!(l, laplacian_f1(&spec, &c).unwrap(), epsilon = 1e-7);
    }

    #[test]
    fn phi_examples() {
        let m = WavefunctionModel::hydrogenic_ground(1.0).unwrap();
        let spec = m.system();
        for p in [[0.0, 0.0, 0.0], [1.0, 2.0, -0.5], [30.0, 0.0, 0.0]] {
            assert_relative_eq!(
                eval_phi(&m, &spec, &cfg(&[p])).unwrap(),
                (1.0 / (8.0 * PI)).sqrt(),
                max_relative = 1e-14
            );
        }
        let j = WavefunctionModel::jastrow(2.0, JastrowPrefactor::ONE).unwrap().with_normalization(1.0);
        let c = cfg(&[[0.2, 0.3, 0.1], [-1.0, 0.5, 2.0]]);
        assert_relative_eq!(eval_phi(&j, &j.system(), &c).unwrap(), 1.0, max_relative = 1e-14);
        let far = cfg(&[[2000.0, 0.0, 0.0]]);
        assert!(matches!(eval_phi(&m, &spec, &far), Err(Error::ExponentCap { .. })));
    }

    #[test]
    fn product_phi_kinks_at_coalescence() {
        let m = WavefunctionModel::product(2.0, 1.0).unwrap().with_normalization(1.0);
        let spec = m.system();
        let x2 = Vec3::new(0.4, 0.3, -0.2);
        let along = |d: f64| {
            let c = Configuration::new(vec![x2 + Vec3::new(d, 0.0, 0.0), x2]).unwrap();
            eval_grad_phi(&m, &spec, &c).unwrap()[0]
        };
        let (plus, minus) = (along(1e-7), along(-1e-7));
        let phi = eval_phi(&m, &spec, &cfg(&[x2.to_array(), x2.to_array()])).unwrap();
        assert_relative_eq!(minus - plus, 0.5 * phi, max_relative = 1e-5);
    }

    #[test]
    fn psi1_examples() {
        let m = WavefunctionModel::hydrogenic_ground(1.0).unwrap();
        let spec = m.system();
        let v = eval_psi1(&m, &spec, &cfg(&[[0.0, 0.0, 0.0]])).unwrap();
        assert_relative_eq!(v, (1.0 / (8.0 * PI)).sqrt() * (-0.5f64).exp(), max_relative = 1e-14);
        assert_abs_diff_eq!(v, 0.120985, epsilon = 1e-6);
        let m3 = WavefunctionModel::hydrogenic_ground(3.0).unwrap();
        let x = cfg(&[[1.0, -2.0, 0.5]]);
        let r2 = 5.25f64;
        assert_relative_eq!(
            eval_psi1(&m3, &m3.system(), &x).unwrap(),
            m3.normalization * (-1.5 * (r2 + 1.0).sqrt()).exp(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn delta_f_examples() {
        let fd = FdScheme::default();
        let he = SystemSpec::atom(2.0, 2).unwrap();
        assert!(check_delta_f_equals_v(&he, &cfg(&[[1., 0., 0.], [-1., 0., 0.]]), &fd).unwrap() < 1e-8);
        let h = SystemSpec::atom(1.0, 1).unwrap();
        assert!(check_delta_f_equals_v(&h, &cfg(&[[0., 0., 2.]]), &fd).unwrap() < 1e-9);
        let r = check_delta_f_equals_v(&he, &cfg(&[[1., 0., 0.], [1.0005, 0., 0.]]), &fd);
        assert!(matches!(r, Err(Error::StencilSingular(_))));
    }

    #[test]
    fn delta_f_molecule() {
        let spec = SystemSpec::new(
            2,
            vec![
                Nucleus { charge: 1.0, position: Vec3::new(0.0, 0.0, -0.7) },
                Nucleus { charge: 1.0, position: Vec3::new(0.0, 0.0, 0.7) },
            ],
        )
        .unwrap();
        let c = cfg(&[[0.3, 0.2, 0.1], [-0.6, 0.4, 1.2]]);
        assert!(check_delta_f_equals_v(&spec, &c, &FdScheme::default()).unwrap() < 1e-8);
    }

    #[test]
    fn elliptic_examples() {
        let fd = FdScheme::default();
        let m = WavefunctionModel::hydrogenic_ground(1.0).unwrap();
        let r = elliptic_residual_psi1(&m, &m.system(), -0.25, &cfg(&[[1., 0., 0.]]), &fd).unwrap();
        assert!(r.abs() < 1e-6, "{r}");
        let m = WavefunctionModel::hydrogenic_ground(2.0).unwrap();
        let r = elliptic_residual_psi1(&m, &m.system(), -1.0, &cfg(&[[0., 0., 1.5]]), &fd).unwrap();
        assert!(r.abs() < 1e-6, "{r}");
        let m = WavefunctionModel::hydrogenic_2s(1.0).unwrap();
        let r = elliptic_residual_psi1(&m, &m.system(), -1.0 / 16.0, &cfg(&[[0.3, 1.0, 2.0]]), &fd)
            .unwrap();
        assert!(r.abs() < 1e-6, "{r}");
    }

    #[test]
    fn elliptic_residual_of_product_trial_is_large_near_coalescence() {
        let fd = FdScheme::default();
        let m = WavefunctionModel::product(2.0, 27.0 / 32.0).unwrap().with_normalization(1.0);
        let c = cfg(&[[0.5, 0.0, 0.0], [0.5, 0.05, 0.0]]);
        let r = elliptic_residual_psi1(&m, &m.system(), -1.423828, &c, &fd).unwrap();
        let psi1 = eval_psi1(&m, &m.system(), &c).unwrap();
        assert!((r / psi1).abs() > 1.0, "{}", r / psi1);
    }
}
