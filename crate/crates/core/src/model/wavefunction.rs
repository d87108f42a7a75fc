use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::system::{potential_v, Configuration, SystemSpec, Vec3, DEFAULT_SINGULAR_FLOOR};
use crate::ansatz::jastrow_log_parts;
use crate::error::{Error, Result};

/// |ψ| below this makes ratios such as the local energy meaningless.
pub const NODE_FLOOR: f64 = 1e-250;

/// Smooth, exchange-symmetric prefactor `exp(-b(r1² + r2²) - c r12²)`.
/// `b = c = 0` is the constant prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JastrowPrefactor {
    pub b: f64,
    pub c: f64,
}

impl JastrowPrefactor {
    pub const ONE: JastrowPrefactor = JastrowPrefactor { b: 0.0, c: 0.0 };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelKind {
    /// `c0 exp(-Z r/2)`, exact with `E = -Z²/4`.
    HydrogenicGround { z: f64 },
    /// `c0 (1 - Z r/4) exp(-Z r/4)`, exact with `E = -Z²/16`; has a radial node.
    Hydrogenic2s { z: f64 },
    /// `exp(-alpha (r1 + r2))`.
    TwoElectronProduct { z: f64, alpha: f64 },
    /// `exp(F) P` with the cusp factor `F` and a smooth prefactor `P`.
    TwoElectronJastrow { z: f64, prefactor: JastrowPrefactor },
}

/// A concrete real-valued wavefunction. Ground-state variants are positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavefunctionModel {
    pub kind: ModelKind,
    /// Multiplies the bare closed form; 1 for unnormalised trials.
    pub normalization: f64,
}

/// Value, 3N-gradient and 3N-Laplacian at one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiDerivs {
    pub value: f64,
    pub grad: Vec<f64>,
    pub laplacian: f64,
}

impl WavefunctionModel {
    fn checked(kind: ModelKind, normalization: f64) -> Result<Self> {
        let z = kind.charge();
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::InvalidInput(format!("Z must be positive, got {z}")));
        }
        match kind {
            ModelKind::TwoElectronProduct { alpha, .. } if !(alpha > 0.0 && alpha.is_finite()) => {
                return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
            }
            ModelKind::TwoElectronJastrow { prefactor, .. }
                if !(prefactor.b >= 0.0 && prefactor.c >= 0.0) =>
            {
                return Err(Error::InvalidInput(format!(
                    "prefactor parameters must be nonnegative, got b={} c={}",
                    prefactor.b, prefactor.c
                )));
            }
            _ => {}
        }
        Ok(Self { kind, normalization })
    }

    /// Normalised: `c0 = sqrt(Z³ / 8π)`.
    pub fn hydrogenic_ground(z: f64) -> Result<Self> {
        Self::checked(ModelKind::HydrogenicGround { z }, (z.powi(3) / (8.0 * PI)).sqrt())
    }

    /// Normalised: `c0 = sqrt(Z³ / 64π)`.
    pub fn hydrogenic_2s(z: f64) -> Result<Self> {
        Self::checked(ModelKind::Hydrogenic2s { z }, (z.powi(3) / (64.0 * PI)).sqrt())
    }

    pub fn product(z: f64, alpha: f64) -> Result<Self> {
        Self::checked(ModelKind::TwoElectronProduct { z, alpha }, 1.0)
    }

    pub fn jastrow(z: f64, prefactor: JastrowPrefactor) -> Result<Self> {
        Self::checked(ModelKind::TwoElectronJastrow { z, prefactor }, 1.0)
    }

    pub fn with_normalization(mut self, normalization: f64) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn electron_count(&self) -> usize {
        match self.kind {
            ModelKind::HydrogenicGround { .. } | ModelKind::Hydrogenic2s { .. } => 1,
            ModelKind::TwoElectronProduct { .. } | ModelKind::TwoElectronJastrow { .. } => 2,
        }
    }

    pub fn charge(&self) -> f64 {
        self.kind.charge()
    }

    /// Every variant depends on the electrons only through `r_j` and `r12`.
    pub fn is_s_symmetric(&self) -> bool {
        true
    }

    /// Eigenvalue when the model is an exact eigenfunction of the atomic Hamiltonian.
    pub fn exact_energy(&self) -> Option<f64> {
        match self.kind {
            ModelKind::HydrogenicGround { z } => Some(-z * z / 4.0),
            ModelKind::Hydrogenic2s { z } => Some(-z * z / 16.0),
            _ => None,
        }
    }

    /// The atom this model is written for.
    pub fn system(&self) -> SystemSpec {
        SystemSpec::atom(self.charge(), self.electron_count()).expect("model parameters validated")
    }

    fn check_arity(&self, c: &Configuration) -> Result<()> {
        let n = self.electron_count();
        if c.len() != n {
            return Err(Error::ArityMismatch { expected: n, found: c.len() });
        }
        Ok(())
    }

    fn check_coalescence(&self, c: &Configuration) -> Result<()> {
        let floor = DEFAULT_SINGULAR_FLOOR;
        for (j, x) in c.positions().iter().enumerate() {
            let r = x.norm();
            if r < floor {
                return Err(Error::Singular {
                    what: format!("electron {j} at the nucleus"),
                    distance: r,
                    floor,
                });
            }
        }
        if let ModelKind::TwoElectronJastrow { .. } = self.kind {
            let r12 = (c[0] - c[1]).norm();
            if r12 < floor {
                return Err(Error::Singular {
                    what: "electrons 0 - 1".into(),
                    distance: r12,
                    floor,
                });
            }
        }
        Ok(())
    }

    /// `log|ψ/norm|`, its gradient and Laplacian for the pure-exponential variants.
    fn log_parts(&self, c: &Configuration) -> Option<(f64, Vec<f64>, f64)> {
        match self.kind {
            ModelKind::HydrogenicGround { z } => {
                let x = c[0];
                let r = x.norm();
                let g = x * (-0.5 * z / r);
                Some((-0.5 * z * r, g.to_array().to_vec(), -z / r))
            }
            ModelKind::TwoElectronProduct { alpha, .. } => {
                let mut grad = Vec::with_capacity(6);
                let mut lap = 0.0;
                let mut val = 0.0;
                for x in c.positions() {
                    let r = x.norm();
                    val -= alpha * r;
                    grad.extend((*x * (-alpha / r)).to_array());
                    lap -= 2.0 * alpha / r;
                }
                Some((val, grad, lap))
            }
            ModelKind::TwoElectronJastrow { z, prefactor } => {
                Some(jastrow_log_parts(z, prefactor, c[0], c[1]))
            }
            ModelKind::Hydrogenic2s { .. } => None,
        }
    }

    /// Bare log value, defined at coalescence points too.
    pub(crate) fn log_value(&self, c: &Configuration) -> Option<f64> {
        match self.kind {
            ModelKind::HydrogenicGround { z } => Some(-0.5 * z * c[0].norm()),
            ModelKind::TwoElectronProduct { alpha, .. } => {
                Some(-alpha * (c[0].norm() + c[1].norm()))
            }
            ModelKind::TwoElectronJastrow { z, prefactor } => {
                let (r1, r2, r12) = (c[0].norm(), c[1].norm(), (c[0] - c[1]).norm());
                Some(
                    -0.5 * z * (r1 + r2) + 0.25 * r12
                        - prefactor.b * (r1 * r1 + r2 * r2)
                        - prefactor.c * r12 * r12,
                )
            }
            ModelKind::Hydrogenic2s { .. } => None,
        }
    }

    pub fn psi(&self, c: &Configuration) -> Result<f64> {
        self.check_arity(c)?;
        if let Some(l) = self.log_value(c) {
            return Ok(self.normalization * l.exp());
        }
        let ModelKind::Hydrogenic2s { z } = self.kind else { unreachable!() };
        let r = c[0].norm();
        let a = 0.25 * z;
        Ok(self.normalization * (1.0 - a * r) * (-a * r).exp())
    }

    pub fn derivs(&self, c: &Configuration) -> Result<PsiDerivs> {
        self.check_arity(c)?;
        self.check_coalescence(c)?;
        if let Some((l, gl, lap_l)) = self.log_parts(c) {
            let value = self.normalization * l.exp();
            let gsq: f64 = gl.iter().map(|g| g * g).sum();
            return Ok(PsiDerivs {
                value,
                grad: gl.iter().map(|g| g * value).collect(),
                laplacian: value * (lap_l + gsq),
            });
        }
        let ModelKind::Hydrogenic2s { z } = self.kind else { unreachable!() };
        let x = c[0];
        let r = x.norm();
        let a = 0.25 * z;
        let e = self.normalization * (-a * r).exp();
        let value = (1.0 - a * r) * e;
        // f' = (-2a + a² r) e,  Δf = (5a² - a³ r - 4a/r) e   (a = λ = Z/4)
        let fp = (-2.0 * a + a * a * r) * e;
        let lap = (5.0 * a * a - a * a * a * r - 4.0 * a / r) * e;
        Ok(PsiDerivs { value, grad: (x * (fp / r)).to_array().to_vec(), laplacian: lap })
    }

    /// `(-Δψ + Vψ)/ψ`.
    pub fn local_energy(&self, spec: &SystemSpec, c: &Configuration) -> Result<f64> {
        if spec.electron_count() != self.electron_count() {
            return Err(Error::ArityMismatch {
                expected: self.electron_count(),
                found: spec.electron_count(),
            });
        }
        let v = potential_v(spec, c)?;
        self.check_arity(c)?;
        self.check_coalescence(c)?;
        let value = self.psi(c)?;
        if value.abs() < NODE_FLOOR {
            return Err(Error::Node { value });
        }
        if let Some((_, gl, lap_l)) = self.log_parts(c) {
            let gsq: f64 = gl.iter().map(|g| g * g).sum();
            return Ok(-(lap_l + gsq) + v);
        }
        let d = self.derivs(c)?;
        Ok(-d.laplacian / d.value + v)
    }
}

impl ModelKind {
    pub fn charge(&self) -> f64 {
        match *self {
            ModelKind::HydrogenicGround { z }
            | ModelKind::Hydrogenic2s { z }
            | ModelKind::TwoElectronProduct { z, .. }
            | ModelKind::TwoElectronJastrow { z, .. } => z,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::HydrogenicGround { .. } => "hydrogenic-ground",
            ModelKind::Hydrogenic2s { .. } => "hydrogenic-2s",
            ModelKind::TwoElectronProduct { .. } => "two-electron-product",
            ModelKind::TwoElectronJastrow { .. } => "two-electron-jastrow",
        }
    }
}

pub fn evaluate_psi(m: &WavefunctionModel, c: &Configuration) -> Result<f64> {
    m.psi(c)
}

pub fn evaluate_grad_psi(m: &WavefunctionModel, c: &Configuration) -> Result<Vec<f64>> {
    Ok(m.derivs(c)?.grad)
}

pub fn evaluate_laplacian_psi(m: &WavefunctionModel, c: &Configuration) -> Result<f64> {
    Ok(m.derivs(c)?.laplacian)
}

pub fn local_energy(m: &WavefunctionModel, spec: &SystemSpec, c: &Configuration) -> Result<f64> {
    m.local_energy(spec, c)
}

/// An energy together with the ground energy of the singly ionised system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenEstimate {
    pub energy: f64,
    pub ion_energy: f64,
    pub epsilon: f64,
}

impl EigenEstimate {
    pub fn new(energy: f64, ion_energy: f64) -> Self {
        Self { energy, ion_energy, epsilon: ion_energy - energy }
    }

    /// The gap is positive below the essential spectrum.
    pub fn is_bound(&self) -> bool {
        self.epsilon > 0.0
    }
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn check<T: Send + Sync>() {}
    check::<WavefunctionModel>();
    check::<Vec3>();
}
