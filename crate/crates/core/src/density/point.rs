//! Integrals over `x' = (x₂, …, x_N)` at a fixed `x₁`.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integration::{
    importance_integrate, reduced_two_electron_integral, reduced_two_electron_integral_vec,
    EstimateWithError, ReducedPoint, ReducedQuadrature,
};
use crate::model::{Configuration, ModelKind, SystemSpec, Vec3, WavefunctionModel};

/// Gradients are undefined at the nucleus itself; quantities "at r = 0" that
/// need `∇₁ψ` are evaluated at this distance along the approach direction.
pub const APPROACH_RADIUS: f64 = 1e-10;

/// Default sample count for the importance-sampled density.
pub const MC_DENSITY_SAMPLES: usize = 200_000;

/// Integrands over `x'` at fixed `x₁`, before spherical averaging.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointObservables {
    /// `∫ψ² dx'`.
    pub rho: EstimateWithError,
    /// `∫|∇₁ψ|² dx'`.
    pub kinetic: EstimateWithError,
    /// `∫ψ(H^{N-1} - E)ψ dx'`, in quadratic form `∫|∇'ψ|² + (V^{N-1} - E)ψ²`.
    pub quadratic_form: EstimateWithError,
    /// `Σ_j ∫ψ²/|x₁ - x_j| dx'`.
    pub repulsion: EstimateWithError,
    /// `∫ψ²(E_L - E) dx'`; vanishes for an eigenfunction with eigenvalue `E`.
    pub systematic: EstimateWithError,
}

impl PointObservables {
    pub fn h(&self) -> EstimateWithError {
        self.kinetic.plus(self.quadratic_form).plus(self.repulsion)
    }

    pub fn scaled(self, s: f64) -> Self {
        Self {
            rho: self.rho.scaled(s),
            kinetic: self.kinetic.scaled(s),
            quadratic_form: self.quadratic_form.scaled(s),
            repulsion: self.repulsion.scaled(s),
            systematic: self.systematic.scaled(s),
        }
    }
}

/// `h(x₁)` and its three parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub kinetic: EstimateWithError,
    pub quadratic_form: EstimateWithError,
    pub repulsion: EstimateWithError,
    pub total: EstimateWithError,
}

/// Decay rate of `ψ²` in `r₂` at fixed `x₁`; sets the reduced-quadrature panels.
pub fn pair_decay_rate(m: &WavefunctionModel) -> f64 {
    match m.kind {
        ModelKind::HydrogenicGround { z } => z,
        ModelKind::Hydrogenic2s { z } => 0.5 * z,
        ModelKind::TwoElectronProduct { alpha, .. } => 2.0 * alpha,
        ModelKind::TwoElectronJastrow { z, .. } => z - 0.5,
    }
}

fn quadrature_for(m: &WavefunctionModel) -> Result<ReducedQuadrature> {
    let k = pair_decay_rate(m);
    if !(k > 0.0) {
        return Err(Error::InvalidInput(format!(
            "{} with Z = {} is not square integrable",
            m.kind.label(),
            m.charge()
        )));
    }
    Ok(ReducedQuadrature::default().with_decay_rate(k))
}

fn atomic_charge(m: &WavefunctionModel, spec: &SystemSpec) -> Result<f64> {
    if spec.electron_count() != m.electron_count() {
        return Err(Error::ArityMismatch { expected: m.electron_count(), found: spec.electron_count() });
    }
    spec.atomic_charge()
        .ok_or_else(|| Error::Unsupported("density observables need a single nucleus at the origin".into()))
}

/// Unit vector of `x`, or `e_z` at the origin.
fn direction(x: Vec3) -> Vec3 {
    let r = x.norm();
    if r > 0.0 {
        x * (1.0 / r)
    } else {
        Vec3::EZ
    }
}

/// Places `x₂` at radius `r₂` with `cosθ` relative to `ω`.
fn partner(omega: Vec3, e1: Vec3, p: &ReducedPoint) -> Vec3 {
    let c = p.cos_theta.clamp(-1.0, 1.0);
    let s = (1.0 - c * c).max(0.0).sqrt();
    (e1 * s + omega * c) * p.r2
}

/// `ρ(x₁) = ∫|ψ(x₁, x')|² dx'`; unnormalised when the model is.
pub fn rho_point(m: &WavefunctionModel, x1: Vec3) -> Result<EstimateWithError> {
    match m.electron_count() {
        1 => {
            let psi = m.psi(&Configuration::new(vec![x1])?)?;
            Ok(EstimateWithError::closed_form(psi * psi))
        }
        2 if m.is_s_symmetric() => {
            let q = quadrature_for(m)?;
            let omega = direction(x1);
            let e1 = omega.any_orthogonal();
            let failure = RefCell::new(None);
            let est = reduced_two_electron_integral(
                |p| {
                    let c = Configuration::new(vec![x1, partner(omega, e1, p)]);
                    match c.and_then(|c| m.psi(&c)) {
                        Ok(v) => v * v,
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e);
                            0.0
                        }
                    }
                },
                x1.norm(),
                &q,
            )?;
            match failure.into_inner() {
                Some(e) => Err(e),
                None => Ok(est),
            }
        }
        _ => rho_point_mc(m, x1, MC_DENSITY_SAMPLES, 0),
    }
}

/// `ρ(x₁)` by importance sampling every other electron from an exponential
/// proposal; serves as the general-N path and as an oracle for the reduced
/// quadrature.
pub fn rho_point_mc(m: &WavefunctionModel, x1: Vec3, samples: usize, seed: u64) -> Result<EstimateWithError> {
    let n = m.electron_count();
    if n == 1 {
        return rho_point(m, x1);
    }
    let rate = pair_decay_rate(m);
    let failure = RefCell::new(None);
    let est = importance_integrate(
        |rest| {
            let mut pos = Vec::with_capacity(n);
            pos.push(x1);
            pos.extend_from_slice(rest);
            match Configuration::new(pos).and_then(|c| m.psi(&c)) {
                Ok(v) => v * v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        },
        n - 1,
        rate,
        samples,
        seed,
    )?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(est),
    }
}

/// Kernel values at one configuration: `[ψ², |∇₁ψ|², quadratic form, repulsion, systematic]`.
fn pair_kernel(m: &WavefunctionModel, z: f64, energy: f64, x1: Vec3, x2: Vec3) -> Result<[f64; 5]> {
    let c = Configuration::new(vec![x1, x2])?;
    let d = m.derivs(&c)?;
    let psi = d.value;
    let psi2 = psi * psi;
    let (r1, r2, r12) = (x1.norm(), x2.norm(), (x1 - x2).norm());
    let g1: f64 = d.grad[..3].iter().map(|g| g * g).sum();
    let g2: f64 = d.grad[3..].iter().map(|g| g * g).sum();
    let v = -z / r1 - z / r2 + 1.0 / r12;
    Ok([
        psi2,
        g1,
        g2 + (-z / r2 - energy) * psi2,
        psi2 / r12,
        -psi * d.laplacian + (v - energy) * psi2,
    ])
}

fn single_kernel(m: &WavefunctionModel, z: f64, energy: f64, x: Vec3) -> Result<[f64; 5]> {
    let d = m.derivs(&Configuration::new(vec![x])?)?;
    let psi2 = d.value * d.value;
    let g: f64 = d.grad.iter().map(|g| g * g).sum();
    let v = -z / x.norm();
    Ok([psi2, g, -energy * psi2, 0.0, -d.value * d.laplacian + (v - energy) * psi2])
}

fn assemble(rho: EstimateWithError, rest: [EstimateWithError; 5]) -> PointObservables {
    PointObservables {
        rho,
        kinetic: rest[1],
        quadratic_form: rest[2],
        repulsion: rest[3],
        systematic: rest[4],
    }
}

/// All integrands of [`PointObservables`] at `x₁`. At the nucleus the density
/// is evaluated exactly there and the gradient terms at [`APPROACH_RADIUS`]
/// along the direction of `x₁` (`e_z` if `x₁ = 0`).
pub fn observables_at(
    m: &WavefunctionModel,
    spec: &SystemSpec,
    energy: f64,
    x1: Vec3,
) -> Result<PointObservables> {
    let z = atomic_charge(m, spec)?;
    let omega = direction(x1);
    let r = x1.norm();
    let xg = if r < APPROACH_RADIUS { omega * APPROACH_RADIUS } else { x1 };
    match m.electron_count() {
        1 => {
            let k = single_kernel(m, z, energy, xg)?;
            let rho = rho_point(m, x1)?;
            Ok(assemble(rho, k.map(EstimateWithError::closed_form)))
        }
        2 if m.is_s_symmetric() => {
            let q = quadrature_for(m)?;
            let e1 = omega.any_orthogonal();
            let failure = RefCell::new(None);
            let rest = reduced_two_electron_integral_vec(
                |p| match pair_kernel(m, z, energy, xg, partner(omega, e1, p)) {
                    Ok(k) => k,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        [0.0; 5]
                    }
                },
                if r < APPROACH_RADIUS { 0.0 } else { r },
                &q,
            )?;
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            let rho = if r < APPROACH_RADIUS { rho_point(m, x1)? } else { rest[0] };
            Ok(assemble(rho, rest))
        }
        n => Err(Error::Unsupported(format!("h and t1 integrals for N = {n}"))),
    }
}

/// `h(x₁) = ∫ψ(H^{N-1} - E)ψ dx' + Σ_j ∫ψ²/|x₁ - x_j| dx' + ∫|∇₁ψ|² dx'`.
pub fn h_point(m: &WavefunctionModel, spec: &SystemSpec, energy: f64, x1: Vec3) -> Result<HPoint> {
    let o = observables_at(m, spec, energy, x1)?;
    Ok(HPoint { kinetic: o.kinetic, quadratic_form: o.quadratic_form, repulsion: o.repulsion, total: o.h() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::JastrowPrefactor;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    #[test]
    fn density_examples() {
        let h = WavefunctionModel::hydrogenic_ground(1.0).unwrap();
        let r = rho_point(&h, Vec3::ZERO).unwrap();
        assert_relative_eq!(r.value, 1.0 / (8.0 * PI), max_relative = 1e-14);
        assert_abs_diff_eq!(r.value, 0.039789, epsilon = 1e-6);

        let j = WavefunctionModel::jastrow(2.0, JastrowPrefactor::ONE).unwrap();
        let r = rho_point(&j, Vec3::ZERO).unwrap();
        assert_relative_eq!(r.value, 64.0 * PI / 27.0, max_relative = 1e-12);

        let p = WavefunctionModel::product(2.0, 1.0).unwrap();
        let r = rho_point(&p, Vec3::ZERO).unwrap();
        assert_relative_eq!(r.value, PI, max_relative = 1e-12);
    }

    #[test]
    fn product_density_is_separable() {
        // ρ(x) = e^{-2α r} ∫e^{-2α r₂} = e^{-2α r} π/α³
        let a = 0.84375;
        let p = WavefunctionModel::product(2.0, a).unwrap();
        for x in [Vec3::new(0.3, 0.0, 0.0), Vec3::new(-1.0, 2.0, 0.5)] {
            let r = rho_point(&p, x).unwrap();
            let want = (-2.0 * a * x.norm()).exp() * PI / a.powi(3);
            assert_relative_eq!(r.value, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn reduced_density_agrees_with_importance_sampling() {
        let j = WavefunctionModel::jastrow(2.0, JastrowPrefactor::ONE).unwrap();
        let x = Vec3::new(0.2, -0.4, 0.6);
        let q = rho_point(&j, x).unwrap();
        let mc = rho_point_mc(&j, x, 200_000, 11).unwrap();
        assert!((q.value - mc.value).abs() < 3.0 * (q.stderr + mc.stderr), "{q:?} {mc:?}");
    }

    #[test]
    fn hydrogen_h_is_half_z_squared_rho() {
        for z in [1.0, 2.0] {
            let m = WavefunctionModel::hydrogenic_ground(z).unwrap();
            let spec = m.system();
            let e = -z * z / 4.0;
            for x in [Vec3::ZERO, Vec3::new(0.0, 0.5, 0.0), Vec3::new(1.0, 1.0, 1.0)] {
                let h = h_point(&m, &spec, e, x).unwrap();
                let rho = rho_point(&m, x).unwrap().value;
                assert_relative_eq!(h.total.value, 0.5 * z * z * rho, max_relative = 1e-7);
                assert_eq!(h.repulsion.value, 0.0);
            }
        }
        let m = WavefunctionModel::hydrogenic_ground(1.0).unwrap();
        let h = h_point(&m, &m.system(), -0.25, Vec3::ZERO).unwrap();
        assert_abs_diff_eq!(h.total.value, 0.019894, epsilon = 1e-6);
    }

    #[test]
    fn quadratic_form_matches_second_derivative_form_for_one_electron() {
        // |∇ψ|² and -ψΔψ differ by the total derivative ½Δ(ψ²)
        use crate::integration::{fd_laplacian, FdScheme};
        let m = WavefunctionModel::hydrogenic_2s(1.0).unwrap();
        let x = [0.4, -0.9, 1.3];
        let sq = |p: &[f64]| {
            let v = m.psi(&Configuration::from_flat(p)?)?;
            Ok(v * v)
        };
        let lap_sq = fd_laplacian(sq, &x, &FdScheme::default()).unwrap();
        let c = Configuration::from_flat(&x).unwrap();
        let d = m.derivs(&c).unwrap();
        let g: f64 = d.grad.iter().map(|g| g * g).sum();
        assert_relative_eq!(g, 0.5 * lap_sq - d.value * d.laplacian, max_relative = 1e-7);
    }

    #[test]
    fn jastrow_observables_are_finite_at_the_nucleus() {
        let j = WavefunctionModel::jastrow(2.0, JastrowPrefactor::ONE).unwrap();
        let spec = j.system();
        let o = observables_at(&j, &spec, -1.423828125, Vec3::ZERO).unwrap();
        for e in [o.rho, o.kinetic, o.quadratic_form, o.repulsion, o.systematic] {
            assert!(e.value.is_finite() && e.stderr < 1e-6 * (1.0 + e.value.abs()), "{e:?}");
        }
        let near = observables_at(&j, &spec, -1.423828125, Vec3::new(0.0, 0.0, 1e-5)).unwrap();
        assert_relative_eq!(near.h().value, o.h().value, max_relative = 1e-4);
    }

    #[test]
    fn eigenfunction_systematic_vanishes() {
        let m = WavefunctionModel::hydrogenic_2s(2.0).unwrap();
        let o = observables_at(&m, &m.system(), -0.25, Vec3::new(0.3, 0.2, 0.1)).unwrap();
        assert!(o.systematic.value.abs() < 1e-12);
    }

    #[test]
    fn molecule_is_rejected() {
        use crate::model::Nucleus;
        let m = WavefunctionModel::product(1.0, 1.0).unwrap();
        let spec = SystemSpec::new(
            2,
            vec![
                Nucleus { charge: 1.0, position: Vec3::new(0.0, 0.0, 0.7) },
                Nucleus { charge: 1.0, position: Vec3::new(0.0, 0.0, -0.7) },
            ],
        )
        .unwrap();
        assert!(matches!(h_point(&m, &spec, -1.0, Vec3::EZ), Err(Error::Unsupported(_))));
    }
}
