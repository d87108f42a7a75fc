use serde::{Deserialize, Serialize};

use super::point::{observables_at, rho_point, PointObservables};
use crate::error::{Error, Result};
use crate::integration::{sphere_average, EstimateWithError, RadialGrid, SphereRule};
use crate::model::{SystemSpec, Vec3, WavefunctionModel};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub grid: RadialGrid,
    pub rho_tilde: Vec<EstimateWithError>,
    /// From the `r₁ = 0` integral, not extrapolated.
    pub rho_tilde_0: EstimateWithError,
    /// `∫ρ̃ r² dr` over the grid.
    pub norm_estimate: EstimateWithError,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HComponents {
    pub kinetic: EstimateWithError,
    pub quadratic_form: EstimateWithError,
    pub repulsion: EstimateWithError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HProfile {
    pub grid: RadialGrid,
    pub energy: f64,
    pub h_tilde: Vec<EstimateWithError>,
    pub h_tilde_0: EstimateWithError,
    pub components: Vec<HComponents>,
    /// Spherical average of `∫ψ²(E_L - E) dx'`; zero for eigenfunctions.
    pub systematic: Vec<EstimateWithError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct T1Profile {
    pub grid: RadialGrid,
    pub t1: Vec<EstimateWithError>,
}

/// Everything computed from one pass over the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialObservables {
    pub density: DensityProfile,
    pub h: HProfile,
    pub t1: T1Profile,
}

fn norm_of(grid: &RadialGrid, values: &[EstimateWithError]) -> EstimateWithError {
    let w = grid.integration_weights();
    let mut v = 0.0;
    let mut e = 0.0;
    for ((r, w), x) in grid.nodes.iter().zip(&w).zip(values) {
        v += w * r * r * x.value;
        e += (w * r * r).abs() * x.stderr;
    }
    EstimateWithError::quadrature(v, e)
}

impl DensityProfile {
    fn new(grid: RadialGrid, rho_tilde: Vec<EstimateWithError>, rho_tilde_0: EstimateWithError) -> Self {
        let norm_estimate = norm_of(&grid, &rho_tilde);
        Self { grid, rho_tilde, rho_tilde_0, norm_estimate }
    }

    pub fn values(&self) -> Vec<f64> {
        self.rho_tilde.iter().map(|e| e.value).collect()
    }

    pub fn to_csv(&self) -> String {
        csv(&self.grid, &self.rho_tilde)
    }
}

impl HProfile {
    pub fn values(&self) -> Vec<f64> {
        self.h_tilde.iter().map(|e| e.value).collect()
    }

    pub fn to_csv(&self) -> String {
        csv(&self.grid, &self.h_tilde)
    }
}

impl T1Profile {
    pub fn values(&self) -> Vec<f64> {
        self.t1.iter().map(|e| e.value).collect()
    }

    pub fn to_csv(&self) -> String {
        csv(&self.grid, &self.t1)
    }
}

/// `r,value,stderr` rows with round-trip precision.
pub fn csv(grid: &RadialGrid, values: &[EstimateWithError]) -> String {
    let mut out = String::from("r,value,stderr\n");
    for (r, e) in grid.nodes.iter().zip(values) {
        out.push_str(&format!("{r:.17e},{:.17e},{:.17e}\n", e.value, e.stderr));
    }
    out
}

fn map_nodes<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(&f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

fn shortcut_nodes(grid: &RadialGrid) -> [usize; 3] {
    let n = grid.len();
    [n / 4, n / 2, (3 * n) / 4]
}

/// Checks `∫_{S²} ρ(rω) dω = 4π ρ(r e_z)` on three grid nodes with the full
/// rule. Returns `false` if any node disagrees beyond its error bars.
fn shortcut_holds(m: &WavefunctionModel, grid: &RadialGrid, rule: &SphereRule, axis: &[EstimateWithError]) -> Result<bool> {
    for i in shortcut_nodes(grid) {
        let r = grid.nodes[i];
        let failure = std::cell::RefCell::new(None);
        let full = sphere_average(
            |w| match rho_point(m, w * r) {
                Ok(e) => e.value,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            },
            rule,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let full = full?;
        let a = axis[i];
        let tol = 3.0 * a.stderr + 1e-10 * a.value.abs() + f64::MIN_POSITIVE;
        if (full - a.value).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

fn full_rule_rho(m: &WavefunctionModel, grid: &RadialGrid, rule: &SphereRule) -> Result<Vec<EstimateWithError>> {
    map_nodes(grid.len(), |i| {
        let r = grid.nodes[i];
        let mut v = 0.0;
        let mut e = 0.0;
        for (w, x) in rule.weights.iter().zip(&rule.nodes) {
            let p = rho_point(m, *x * r)?;
            v += w * p.value;
            e += w * p.stderr;
        }
        Ok(EstimateWithError { value: v, stderr: e, method: crate::integration::EstimateMethod::Quadrature })
    })
}

/// `ρ̃(r_i) = ∫_{S²} ρ(r_i ω) dω`.
pub fn rho_tilde_profile(m: &WavefunctionModel, grid: &RadialGrid, rule: &SphereRule) -> Result<DensityProfile> {
    let mut rho = map_nodes(grid.len(), |i| Ok(rho_point(m, Vec3::EZ * grid.nodes[i])?.scaled(FOUR_PI)))?;
    if !(m.is_s_symmetric() && shortcut_holds(m, grid, rule, &rho)?) {
        rho = full_rule_rho(m, grid, rule)?;
    }
    let rho0 = rho_point(m, Vec3::ZERO)?.scaled(FOUR_PI);
    Ok(DensityProfile::new(grid.clone(), rho, rho0))
}

/// `ρ̃`, `h̃`, `t₁` and the trial systematic from one pass over the grid.
pub fn radial_observables(
    m: &WavefunctionModel,
    spec: &SystemSpec,
    energy: f64,
    grid: &RadialGrid,
    rule: &SphereRule,
) -> Result<RadialObservables> {
    if !m.is_s_symmetric() {
        return Err(Error::Unsupported("h and t1 profiles need an S-symmetric model".into()));
    }
    let pts: Vec<PointObservables> =
        map_nodes(grid.len(), |i| Ok(observables_at(m, spec, energy, Vec3::EZ * grid.nodes[i])?.scaled(FOUR_PI)))?;
    let rho: Vec<_> = pts.iter().map(|p| p.rho).collect();
    if !shortcut_holds(m, grid, rule, &rho)? {
        return Err(Error::Resolution("spherical shortcut disagrees with the full sphere rule".into()));
    }
    let at0 = if grid.nodes[0] == 0.0 { pts[0] } else { observables_at(m, spec, energy, Vec3::ZERO)?.scaled(FOUR_PI) };
    let density = DensityProfile::new(grid.clone(), rho, at0.rho);
    let h = HProfile {
        grid: grid.clone(),
        energy,
        h_tilde: pts.iter().map(|p| p.h()).collect(),
        h_tilde_0: at0.h(),
        components: pts
            .iter()
            .map(|p| HComponents { kinetic: p.kinetic, quadratic_form: p.quadratic_form, repulsion: p.repulsion })
            .collect(),
        systematic: pts.iter().map(|p| p.systematic).collect(),
    };
    let t1 = T1Profile { grid: grid.clone(), t1: pts.iter().map(|p| p.kinetic).collect() };
    Ok(RadialObservables { density, h, t1 })
}

/// `h̃(r) = ∫_{S²} h(rω) dω`.
pub fn h_tilde_profile(
    m: &WavefunctionModel,
    spec: &SystemSpec,
    energy: f64,
    grid: &RadialGrid,
    rule: &SphereRule,
) -> Result<HProfile> {
    Ok(radial_observables(m, spec, energy, grid, rule)?.h)
}

/// `t₁(r) = ∫_{S²} ∫|∇₁ψ(rω, x')|² dx' dω`.
pub fn t1_profile(m: &WavefunctionModel, grid: &RadialGrid, rule: &SphereRule) -> Result<T1Profile> {
    Ok(radial_observables(m, &m.system(), 0.0, grid, rule)?.t1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::JastrowPrefactor;
    use approx::assert_relative_eq;

    fn small_grid(z: f64) -> RadialGrid {
        RadialGrid::mapped_geometric(1e-3, 20.0 / z, 60).unwrap()
    }

    #[test]
    fn hydrogen_profiles() {
        for (z, rho0) in [(1.0, 0.5), (2.0, 4.0)] {
            let m = WavefunctionModel::hydrogenic_ground(z).unwrap();
            let g = RadialGrid::default_for(z).unwrap();
            let obs = radial_observables(&m, &m.system(), -z * z / 4.0, &g, &SphereRule::default()).unwrap();
            let d = &obs.density;
            assert_relative_eq!(d.rho_tilde_0.value, rho0, max_relative = 1e-13);
            assert_relative_eq!(d.norm_estimate.value, 1.0, max_relative = 1e-6);
            assert_relative_eq!(obs.h.h_tilde_0.value, 0.5 * z * z * rho0, max_relative = 1e-7);
            assert_relative_eq!(obs.t1.t1[0].value, 0.25 * z * z * rho0, max_relative = 1e-7);
            for i in 0..g.len() {
                let r = g.nodes[i];
                assert_relative_eq!(d.rho_tilde[i].value, 0.5 * z.powi(3) * (-z * r).exp(), max_relative = 1e-12);
                assert_relative_eq!(obs.h.h_tilde[i].value, 0.5 * z * z * d.rho_tilde[i].value, max_relative = 1e-8);
            }
        }
        let m = WavefunctionModel::hydrogenic_ground(1.0).unwrap();
        let g = RadialGrid::from_nodes(vec![0.0, 1.0, 2.0]).unwrap();
        let d = rho_tilde_profile(&m, &g, &SphereRule::default()).unwrap();
        approx::assert_abs_diff_eq!(d.rho_tilde[1].value, 0.183940, epsilon = 1e-6);
    }

    #[test]
    fn components_sum_to_total() {
        let m = WavefunctionModel::jastrow(2.0, JastrowPrefactor::ONE).unwrap();
        let g = small_grid(2.0);
        let h = h_tilde_profile(&m, &m.system(), -1.423828125, &g, &SphereRule::product(4)).unwrap();
        for (t, c) in h.h_tilde.iter().zip(&h.components) {
            let s = c.kinetic.value + c.quadratic_form.value + c.repulsion.value;
            assert!((s - t.value).abs() <= 1e-10 * t.value.abs());
        }
        assert!(h.h_tilde.iter().all(|e| e.value > 0.0));
    }

    #[test]
    fn product_profile_normalises() {
        let a: f64 = 0.84375;
        let norm = a.powi(3) / std::f64::consts::PI;
        let m = WavefunctionModel::product(2.0, a).unwrap().with_normalization(norm);
        let g = RadialGrid::mapped_geometric(1e-3, 20.0 / (2.0 * a), 120).unwrap();
        let d = rho_tilde_profile(&m, &g, &SphereRule::product(4)).unwrap();
        assert_relative_eq!(d.norm_estimate.value, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn csv_is_stable() {
        let m = WavefunctionModel::hydrogenic_ground(1.0).unwrap();
        let g = RadialGrid::from_nodes(vec![0.0, 0.5]).unwrap();
        let d = rho_tilde_profile(&m, &g, &SphereRule::default()).unwrap();
        let text = d.to_csv();
        assert!(text.starts_with("r,value,stderr\n0.00000000000000000e0,5.00000000000000000e-1,"));
        assert_eq!(text, rho_tilde_profile(&m, &g, &SphereRule::default()).unwrap().to_csv());
    }
}
