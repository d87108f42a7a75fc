//! The three commands. Each returns its artifacts; file writing happens here
//! too so tests can drive everything without spawning the binary.

use std::fs;
use std::path::Path;

use densitylab_core::density::{radial_observables, RadialObservables};
use densitylab_core::model::ModelKind;
use densitylab_core::variational::{
    ionization_gap_with, minimize_energy, EnergyPath, OptResult, OptSettings, TrialFamily,
};
use densitylab_core::verify::{
    check_curvature, check_cusp, check_delta_f, check_h_bounds, check_pde_residual, check_t1_continuity,
    check_tail_monotonicity, gradient_ratio_refinement, gradient_ratio_scan, h_sample_points, halton_ball,
    holder_panel, log_separations, HolderExpectation, Outcome, PdeReference, PdeWindow, SuiteReport,
};
use densitylab_core::{Error, FdScheme, SystemSpec, WavefunctionModel};
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, FamilyChoice, RunConfig};

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) | Failure::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(s) => write!(f, "config error: {s}"),
            Failure::Numeric(s) => write!(f, "numerical failure: {s}"),
            Failure::Io(s) => write!(f, "i/o error: {s}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::Unsupported(_) | Error::ArityMismatch { .. } => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Run<T> = Result<T, Failure>;

/// Where a file came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    /// The same config in the flat file format.
    pub config_kv: String,
}

impl Provenance {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        Self {
            tool: "densitylab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: cfg.clone(),
            config_kv: cfg.to_kv(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub provenance: Provenance,
    pub model: WavefunctionModel,
    pub energy: f64,
    pub epsilon: f64,
    pub grid_points: usize,
    pub grid_max: f64,
    pub rho_tilde_0: f64,
    pub h_tilde_0: f64,
    pub t1_0: f64,
    pub norm: f64,
    pub files: Vec<String>,
}

fn require_model(cfg: &RunConfig, what: &str) -> Run<WavefunctionModel> {
    cfg.model()?.ok_or_else(|| Failure::Config(format!("{what} needs a wavefunction model, the config has model = none")))
}

fn energy(cfg: &RunConfig) -> Run<f64> {
    cfg.energy_or_default().ok_or_else(|| Failure::Config("no energy for this model; set 'energy'".into()))
}

fn observables(cfg: &RunConfig, m: &WavefunctionModel, spec: &SystemSpec) -> Run<RadialObservables> {
    Ok(radial_observables(m, spec, energy(cfg)?, &cfg.grid()?, &cfg.sphere_rule()?)?)
}

fn write(dir: &Path, name: &str, contents: &str) -> Run<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

/// `rho_tilde.csv`, `h_tilde.csv`, `t1.csv` and `profile.json` in `cfg.out`.
pub fn cmd_profile(cfg: &RunConfig) -> Run<ProfileSummary> {
    cfg.validate()?;
    let m = require_model(cfg, "profile")?;
    let spec = cfg.system()?;
    let e = energy(cfg)?;
    let o = observables(cfg, &m, &spec)?;
    let dir = Path::new(&cfg.out);
    let files = ["rho_tilde.csv", "h_tilde.csv", "t1.csv", "profile.json"];
    write(dir, files[0], &o.density.to_csv())?;
    write(dir, files[1], &o.h.to_csv())?;
    write(dir, files[2], &o.t1.to_csv())?;
    let summary = ProfileSummary {
        provenance: Provenance::new("profile", cfg),
        model: m,
        energy: e,
        epsilon: ionization_gap_with(e, cfg.ion_energy_or_default()),
        grid_points: o.density.grid.len(),
        grid_max: o.density.grid.r_max,
        rho_tilde_0: o.density.rho_tilde_0.value,
        h_tilde_0: o.h.h_tilde_0.value,
        t1_0: o.t1.t1[0].value,
        norm: o.density.norm_estimate.value,
        files: files.iter().map(|s| s.to_string()).collect(),
    };
    write(dir, files[3], &(serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n"))?;
    Ok(summary)
}

/// Gradient-ratio centers: the nucleus plus Halton points for one electron;
/// for two, ten configurations approaching `x₁ = x₂` from 1e-1 to 1e-3.
fn gradient_centers(cfg: &RunConfig, electrons: usize) -> Vec<Vec<f64>> {
    let z = cfg.z;
    if electrons == 1 {
        let mut c = vec![vec![0.0; 3]];
        c.extend(halton_ball(&[0.0; 3], 2.0 / z, cfg.gradient_centers - 1, cfg.seed));
        return c;
    }
    let x2 = [0.6 / z, 0.2 / z, -0.3 / z];
    (0..10)
        .map(|k| {
            let d = 10f64.powf(-1.0 - 2.0 * k as f64 / 9.0);
            let mut c = vec![x2[0] + d, x2[1], x2[2]];
            c.extend(x2);
            c.extend(std::iter::repeat_n(0.0, 3 * (electrons - 2)));
            c
        })
        .collect()
}

const CONSTANT_NOTE: &str = "the constant is existential; checked as stability under refinement, not against a value";

fn run_check(
    name: &str,
    cfg: &RunConfig,
    spec: &SystemSpec,
    profile: &mut Option<RadialObservables>,
) -> Run<Outcome> {
    let tol = &cfg.tolerances;
    let z = cfg.z;
    if name == "delta-f" {
        return Ok(Outcome::Scan(check_delta_f(
            std::slice::from_ref(spec),
            cfg.delta_f_configs,
            &FdScheme::default(),
            tol.delta_f,
            cfg.seed,
        )?));
    }
    let m = require_model(cfg, &format!("check '{name}'"))?;
    let e = energy(cfg)?;
    let eps = ionization_gap_with(e, cfg.ion_energy_or_default());
    let exact = m.exact_energy().is_some();
    let mut obs = || -> Run<RadialObservables> {
        if profile.is_none() {
            *profile = Some(observables(cfg, &m, spec)?);
        }
        Ok(profile.clone().expect("filled above"))
    };
    Ok(match name {
        "cusp" => Outcome::Check(check_cusp(&obs()?.density, z, tol.cusp)?),
        "curvature" => {
            let o = obs()?;
            Outcome::Check(check_curvature(&o.density, &o.h, z, tol.curvature, tol.curvature_sigmas)?)
        }
        "pde" => {
            let o = obs()?;
            let reference = if exact { PdeReference::Eigenfunction } else { PdeReference::Trial };
            Outcome::Scan(check_pde_residual(&o.density, &o.h, z, reference, PdeWindow::default(), tol.pde, tol.pde_sigmas)?)
        }
        "tail" => Outcome::Check(check_tail_monotonicity(&obs()?.density, z, eps, tol.tail_sigmas)?),
        "t1" => {
            let reference = matches!(m.kind, ModelKind::HydrogenicGround { .. }).then(|| z.powi(5) / 8.0);
            Outcome::Check(check_t1_continuity(&obs()?.t1, z, reference, tol.t1, tol.t1_jump_sigmas)?)
        }
        "h-bounds" => {
            let pts = h_sample_points(cfg.h_points, cfg.h_extent.unwrap_or(3.0 / z), cfg.seed);
            let o = obs()?;
            let r = check_h_bounds(
                &m,
                spec,
                e,
                eps,
                cfg.h_radius,
                &pts,
                &o.density,
                tol.h_bounds_sigmas,
                tol.h_upper_drift,
                cfg.seed,
            )?;
            Outcome::Scan(r.note(format!("upper bound: {CONSTANT_NOTE}")))
        }
        "gradient" => {
            let n = m.electron_count();
            let centers = gradient_centers(cfg, n);
            let r = if n == 1 {
                let bound = matches!(m.kind, ModelKind::HydrogenicGround { .. })
                    .then(|| 0.5 * z * (1.0 + tol.gradient_slack));
                gradient_ratio_scan(&m, &centers, cfg.gradient_radius, cfg.gradient_samples, cfg.seed, bound)?
            } else {
                gradient_ratio_refinement(
                    &m,
                    &centers,
                    cfg.gradient_radius,
                    cfg.gradient_samples,
                    cfg.seed,
                    tol.gradient_growth,
                )?
            };
            Outcome::Scan(r.note(CONSTANT_NOTE))
        }
        "holder" => {
            let expect = if matches!(m.kind, ModelKind::TwoElectronProduct { .. }) {
                HolderExpectation::Jump
            } else {
                HolderExpectation::Smooth
            };
            let seeds: Vec<u64> = (0..cfg.holder_seeds as u64).map(|k| cfg.seed + k).collect();
            Outcome::Scan(holder_panel(
                &m,
                spec,
                &seeds,
                &log_separations(cfg.holder_separations),
                tol.holder_noise,
                expect,
                tol.holder_low,
                tol.holder_high,
            )?)
        }
        other => return Err(Failure::Config(format!("unknown check '{other}'"))),
    })
}

/// Runs the configured checks and writes `report.json` and `report.txt`.
pub fn cmd_verify(cfg: &RunConfig) -> Run<SuiteReport> {
    cfg.validate()?;
    let spec = cfg.system()?;
    let label = cfg.preset.clone().unwrap_or_else(|| format!("{:?}", cfg.model).to_lowercase());
    let mut suite = SuiteReport::new(&format!("densitylab verify: {label}, Z = {}", cfg.z));
    let mut profile = None;
    for name in cfg.checks_or_default() {
        let outcome = run_check(&name, cfg, &spec, &mut profile)?;
        suite.push(outcome, cfg.expectation(&name));
    }
    if let Some(e) = cfg.energy_or_default() {
        suite.notes.push(format!("energy E = {e}, ionization gap ε = {}", ionization_gap_with(e, cfg.ion_energy_or_default())));
    }
    let dir = Path::new(&cfg.out);
    #[derive(Serialize)]
    struct Wrapped<'a> {
        provenance: Provenance,
        report: &'a SuiteReport,
    }
    let json = serde_json::to_string_pretty(&Wrapped { provenance: Provenance::new("verify", cfg), report: &suite })
        .expect("report serialises");
    write(dir, "report.json", &(json + "\n"))?;
    write(dir, "report.txt", &suite.to_text())?;
    Ok(suite)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOutput {
    pub provenance: Provenance,
    pub result: OptResult,
    pub epsilon: f64,
}

fn family(cfg: &RunConfig) -> Run<(TrialFamily, Vec<f64>)> {
    let z = cfg.z;
    Ok(match cfg.family_or_default()? {
        FamilyChoice::Hydrogenic => (TrialFamily::hydrogenic(z), vec![]),
        FamilyChoice::Product => (TrialFamily::product(z), vec![cfg.alpha.unwrap_or(z / 2.0)]),
        FamilyChoice::Jastrow => (TrialFamily::jastrow(z), vec![cfg.jastrow_b.max(0.05), cfg.jastrow_c.max(0.05)]),
    })
}

/// Minimises the Rayleigh quotient and writes `opt.json`, converged or not.
pub fn cmd_optimize(cfg: &RunConfig) -> Run<OptimizeOutput> {
    cfg.validate()?;
    let (fam, theta0) = family(cfg)?;
    let mc = cfg.mc();
    let path = if cfg.energy_path == "mc" { EnergyPath::MonteCarlo { mc } } else { EnergyPath::Auto { mc } };
    let settings = OptSettings { budget: cfg.budget, x_tol: cfg.x_tol };
    let result = minimize_energy(&fam, &theta0, &settings, &path)?;
    let ion = match fam.system()?.electron_count() {
        1 => 0.0,
        _ => cfg.ion_energy.unwrap_or(-cfg.z * cfg.z / 4.0),
    };
    let out = OptimizeOutput {
        provenance: Provenance::new("optimize", cfg),
        epsilon: ionization_gap_with(result.energy_star.value, ion),
        result,
    };
    let json = serde_json::to_string_pretty(&out).expect("optimisation result serialises");
    write(Path::new(&cfg.out), "opt.json", &(json + "\n"))?;
    Ok(out)
}
