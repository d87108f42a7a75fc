//! Rayleigh-quotient minimisation over small trial families, and the
//! ionisation gap `ε = E₀^{N-1} - E`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integration::{mc_expectation, metropolis_sample, EstimateWithError, McConfig};
use crate::model::{Configuration, JastrowPrefactor, SystemSpec, Vec3, WavefunctionModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilyKind {
    /// No parameters.
    Hydrogenic { z: f64 },
    /// `e^{-α(r₁+r₂)}`, parameter `alpha`.
    Product { z: f64 },
    /// Jastrow factor times `e^{-b(r₁²+r₂²) - c r₁₂²}`, parameters `b`, `c`.
    Jastrow { z: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFamily {
    pub kind: FamilyKind,
    pub param_names: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl TrialFamily {
    pub fn hydrogenic(z: f64) -> Self {
        Self { kind: FamilyKind::Hydrogenic { z }, param_names: vec![], lower: vec![], upper: vec![] }
    }

    pub fn product(z: f64) -> Self {
        Self {
            kind: FamilyKind::Product { z },
            param_names: vec!["alpha".into()],
            lower: vec![0.01],
            upper: vec![2.0 * z + 1.0],
        }
    }

    pub fn jastrow(z: f64) -> Self {
        Self {
            kind: FamilyKind::Jastrow { z },
            param_names: vec!["b".into(), "c".into()],
            lower: vec![0.0, 0.0],
            upper: vec![2.0, 2.0],
        }
    }

    pub fn dimension(&self) -> usize {
        self.param_names.len()
    }

    pub fn charge(&self) -> f64 {
        match self.kind {
            FamilyKind::Hydrogenic { z } | FamilyKind::Product { z } | FamilyKind::Jastrow { z } => z,
        }
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dimension() {
            return Err(Error::ArityMismatch { expected: self.dimension(), found: theta.len() });
        }
        for (k, t) in theta.iter().enumerate() {
            if !(*t >= self.lower[k] && *t <= self.upper[k]) {
                return Err(Error::InvalidInput(format!(
                    "{} = {t} outside [{}, {}]",
                    self.param_names[k], self.lower[k], self.upper[k]
                )));
            }
        }
        Ok(())
    }

    pub fn build(&self, theta: &[f64]) -> Result<WavefunctionModel> {
        self.check(theta)?;
        match self.kind {
            FamilyKind::Hydrogenic { z } => WavefunctionModel::hydrogenic_ground(z),
            FamilyKind::Product { z } => WavefunctionModel::product(z, theta[0]),
            FamilyKind::Jastrow { z } => {
                WavefunctionModel::jastrow(z, JastrowPrefactor { b: theta[0], c: theta[1] })
            }
        }
    }

    /// `E(α) = 2α² - (2Z - 5/8)α` for the product family.
    pub fn closed_form_energy(&self, theta: &[f64]) -> Option<f64> {
        match self.kind {
            FamilyKind::Product { z } => {
                let a = theta[0];
                Some(2.0 * a * a - (2.0 * z - 0.625) * a)
            }
            _ => None,
        }
    }

    pub fn system(&self) -> Result<SystemSpec> {
        let n = match self.kind {
            FamilyKind::Hydrogenic { .. } => 1,
            _ => 2,
        };
        SystemSpec::atom(self.charge(), n)
    }
}

/// How Rayleigh quotients are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "path", rename_all = "kebab-case")]
pub enum EnergyPath {
    /// Closed form when the family has one, otherwise Monte Carlo.
    Auto { mc: McConfig },
    MonteCarlo { mc: McConfig },
}

impl EnergyPath {
    fn mc(&self) -> &McConfig {
        match self {
            EnergyPath::Auto { mc } | EnergyPath::MonteCarlo { mc } => mc,
        }
    }
}

fn start_configuration(n: usize, z: f64) -> Configuration {
    let s = 1.0 / z;
    let p = [Vec3::new(0.5 * s, 0.3 * s, 0.2 * s), Vec3::new(-0.4 * s, 0.6 * s, -0.3 * s)];
    Configuration::new(p[..n].to_vec()).expect("finite start")
}

/// `⟨ψ,Hψ⟩/⟨ψ,ψ⟩` as the mean local energy under `|ψ|²`.
pub fn rayleigh_quotient_mc(fam: &TrialFamily, theta: &[f64], mc: &McConfig) -> Result<EstimateWithError> {
    let m = fam.build(theta)?;
    let spec = fam.system()?;
    let start = start_configuration(spec.electron_count(), fam.charge());
    let samples = metropolis_sample(|c| Ok(2.0 * m.psi(c)?.abs().ln()), &start, mc)?;
    mc_expectation(|c| m.local_energy(&spec, c), &samples)
}

pub fn rayleigh_quotient(fam: &TrialFamily, theta: &[f64], path: &EnergyPath) -> Result<EstimateWithError> {
    fam.check(theta)?;
    match (path, fam.closed_form_energy(theta)) {
        (EnergyPath::Auto { .. }, Some(e)) => Ok(EstimateWithError::closed_form(e)),
        _ => rayleigh_quotient_mc(fam, theta, path.mc()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub theta: Vec<f64>,
    pub energy: EstimateWithError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub family: TrialFamily,
    pub theta_star: Vec<f64>,
    pub energy_star: EstimateWithError,
    pub trace: Vec<TraceEntry>,
    pub converged: bool,
    pub evaluations: usize,
}

impl OptResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serialises")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptSettings {
    /// Maximum number of energy evaluations.
    pub budget: usize,
    /// Converged once the bracket (or simplex) is narrower than this.
    pub x_tol: f64,
}

impl Default for OptSettings {
    fn default() -> Self {
        Self { budget: 200, x_tol: 1e-9 }
    }
}

struct Evaluator<'a> {
    lower: &'a [f64],
    upper: &'a [f64],
    objective: Box<dyn FnMut(&[f64]) -> Result<EstimateWithError> + 'a>,
    trace: Vec<TraceEntry>,
    budget: usize,
}

impl Evaluator<'_> {
    fn exhausted(&self) -> bool {
        self.trace.len() >= self.budget
    }

    fn eval(&mut self, theta: &[f64]) -> Result<f64> {
        let e = (self.objective)(theta)?;
        self.trace.push(TraceEntry { theta: theta.to_vec(), energy: e });
        Ok(e.value)
    }

    fn finish(self, fam: &TrialFamily, converged: bool) -> OptResult {
        let best = self
            .trace
            .iter()
            .min_by(|a, b| a.energy.value.total_cmp(&b.energy.value))
            .cloned()
            .expect("at least one evaluation");
        OptResult {
            family: fam.clone(),
            theta_star: best.theta,
            energy_star: best.energy,
            evaluations: self.trace.len(),
            trace: self.trace,
            converged,
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn golden_section(ev: &mut Evaluator, lo: f64, hi: f64, tol: f64) -> Result<bool> {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    if ev.exhausted() {
        return Ok(false);
    }
    let mut fc = ev.eval(&[c])?;
    if ev.exhausted() {
        return Ok(false);
    }
    let mut fd = ev.eval(&[d])?;
    while b - a > tol * (1.0 + c.abs()) {
        if ev.exhausted() {
            return Ok(false);
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = ev.eval(&[c])?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = ev.eval(&[d])?;
        }
    }
    Ok(true)
}

fn clamp_into(lower: &[f64], upper: &[f64], x: &mut [f64]) {
    for (k, v) in x.iter_mut().enumerate() {
        *v = v.clamp(lower[k], upper[k]);
    }
}

fn nelder_mead(ev: &mut Evaluator, theta0: &[f64], tol: f64) -> Result<bool> {
    let n = theta0.len();
    let (lower, upper) = (ev.lower, ev.upper);
    let mut simplex: Vec<Vec<f64>> = vec![theta0.to_vec()];
    for k in 0..n {
        let mut p = theta0.to_vec();
        let step = 0.1 * (upper[k] - lower[k]);
        p[k] = if p[k] + step <= upper[k] { p[k] + step } else { p[k] - step };
        simplex.push(p);
    }
    let mut f = Vec::with_capacity(n + 1);
    for p in &simplex {
        if ev.exhausted() {
            return Ok(false);
        }
        f.push(ev.eval(p)?);
    }
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| f[i].total_cmp(&f[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        f = order.iter().map(|&i| f[i]).collect();
        let size = simplex[1..]
            .iter()
            .map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if size < tol {
            return Ok(true);
        }
        if ev.exhausted() {
            return Ok(false);
        }
        let centroid: Vec<f64> =
            (0..n).map(|k| simplex[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> = (0..n).map(|k| centroid[k] + t * (simplex[n][k] - centroid[k])).collect();
            clamp_into(lower, upper, &mut x);
            x
        };
        let xr = along(-1.0);
        let fr = ev.eval(&xr)?;
        if fr < f[0] {
            if ev.exhausted() {
                return Ok(false);
            }
            let xe = along(-2.0);
            let fe = ev.eval(&xe)?;
            if fe < fr {
                simplex[n] = xe;
                f[n] = fe;
            } else {
                simplex[n] = xr;
                f[n] = fr;
            }
        } else if fr < f[n - 1] {
            simplex[n] = xr;
            f[n] = fr;
        } else {
            if ev.exhausted() {
                return Ok(false);
            }
            let t = if fr < f[n] { -0.5 } else { 0.5 };
            let xc = along(t);
            let fc = ev.eval(&xc)?;
            if fc < f[n].min(fr) {
                simplex[n] = xc;
                f[n] = fc;
            } else {
                for i in 1..=n {
                    if ev.exhausted() {
                        return Ok(false);
                    }
                    let p: Vec<f64> = (0..n).map(|k| 0.5 * (simplex[0][k] + simplex[i][k])).collect();
                    f[i] = ev.eval(&p)?;
                    simplex[i] = p;
                }
            }
        }
    }
}

/// Golden-section search over the parameter box for one parameter, a
/// bounded Nelder-Mead simplex for several. Runs out of budget with
/// `converged = false` and the best point seen so far.
pub fn minimize_energy(
    fam: &TrialFamily,
    theta0: &[f64],
    settings: &OptSettings,
    path: &EnergyPath,
) -> Result<OptResult> {
    fam.check(theta0)?;
    if settings.budget == 0 {
        return Err(Error::InvalidInput("optimisation budget must be positive".into()));
    }
    let mut ev = Evaluator {
        lower: &fam.lower,
        upper: &fam.upper,
        objective: Box::new(|t: &[f64]| rayleigh_quotient(fam, t, path)),
        trace: Vec::new(),
        budget: settings.budget,
    };
    let converged = match fam.dimension() {
        0 => {
            ev.eval(theta0)?;
            true
        }
        1 => golden_section(&mut ev, fam.lower[0], fam.upper[0], settings.x_tol)?,
        _ => nelder_mead(&mut ev, theta0, settings.x_tol)?,
    };
    if ev.trace.is_empty() {
        ev.eval(theta0)?;
    }
    Ok(ev.finish(fam, converged))
}

/// `ε = E₀^{N-1} - E` with the hydrogen-like ion energy `-Z²/4` for two
/// electrons and `0` for one. Other cases need [`ionization_gap_with`].
pub fn ionization_gap(energy: f64, spec: &SystemSpec) -> Result<f64> {
    match spec.electron_count() {
        1 => Ok(-energy),
        2 => {
            let z = spec
                .atomic_charge()
                .ok_or_else(|| Error::Unsupported("ionisation gap for molecules needs an explicit E0".into()))?;
            Ok(-z * z / 4.0 - energy)
        }
        n => Err(Error::Unsupported(format!("ionisation gap for N = {n} needs an explicit E0"))),
    }
}

pub fn ionization_gap_with(energy: f64, ion_energy: f64) -> f64 {
    ion_energy - energy
}
