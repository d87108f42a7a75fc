//! Run configuration: presets, a flat `key = value` file format and command
//! line overrides, applied in that order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use densitylab_core::model::{JastrowPrefactor, Nucleus};
use densitylab_core::verify::{Expectation, Tolerances};
use densitylab_core::{McConfig, RadialGrid, SphereRule, SystemSpec, Vec3, WavefunctionModel};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Cfg<T> = Result<T, ConfigError>;

fn bad(key: &str, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("invalid value for '{key}': {msg}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    Hydrogen,
    Hydrogen2s,
    Product,
    Jastrow,
    /// Only a nuclear frame; for the `F`/`V` identity.
    None,
}

impl ModelChoice {
    fn parse(v: &str) -> Cfg<Self> {
        Ok(match v {
            "hydrogen" => Self::Hydrogen,
            "hydrogen-2s" => Self::Hydrogen2s,
            "product" => Self::Product,
            "jastrow" => Self::Jastrow,
            "none" => Self::None,
            _ => return Err(bad("model", format!("'{v}' is not one of hydrogen, hydrogen-2s, product, jastrow, none"))),
        })
    }

    fn name(self) -> &'static str {
        match self {
            Self::Hydrogen => "hydrogen",
            Self::Hydrogen2s => "hydrogen-2s",
            Self::Product => "product",
            Self::Jastrow => "jastrow",
            Self::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyChoice {
    Hydrogenic,
    Product,
    Jastrow,
}

impl FamilyChoice {
    fn parse(v: &str) -> Cfg<Self> {
        Ok(match v {
            "hydrogenic" => Self::Hydrogenic,
            "product" => Self::Product,
            "jastrow" => Self::Jastrow,
            _ => return Err(bad("family", format!("'{v}' is not one of hydrogenic, product, jastrow"))),
        })
    }

    fn name(self) -> &'static str {
        match self {
            Self::Hydrogenic => "hydrogenic",
            Self::Product => "product",
            Self::Jastrow => "jastrow",
        }
    }
}

pub const CHECKS: [&str; 9] = ["cusp", "curvature", "pde", "h-bounds", "tail", "t1", "gradient", "holder", "delta-f"];

pub const PRESETS: [&str; 5] = ["hydrogen", "hydrogen-2s", "product-helium", "jastrow-helium", "h2-molecule"];

/// Everything a run needs. Optional fields fall back to model-dependent
/// defaults, documented on [`RunConfig::describe_defaults`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub model: ModelChoice,
    pub z: f64,
    pub n: Option<usize>,
    /// Empty means one nucleus of charge `z` at the origin.
    pub nuclei: Vec<Nucleus>,
    pub alpha: Option<f64>,
    pub jastrow_b: f64,
    pub jastrow_c: f64,
    pub energy: Option<f64>,
    pub ion_energy: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_points: usize,
    pub grid_first_step: f64,
    pub sphere_degree: usize,
    pub mc_chains: usize,
    pub mc_steps: usize,
    pub mc_burn_in: usize,
    pub mc_scale: f64,
    pub seed: u64,
    pub family: Option<FamilyChoice>,
    pub energy_path: String,
    pub budget: usize,
    pub x_tol: f64,
    pub checks: Vec<String>,
    pub tolerances: Tolerances,
    pub expectations: BTreeMap<String, Expectation>,
    pub h_points: usize,
    pub h_radius: f64,
    pub h_extent: Option<f64>,
    pub gradient_radius: f64,
    pub gradient_centers: usize,
    pub gradient_samples: usize,
    pub holder_seeds: usize,
    pub holder_separations: usize,
    pub delta_f_configs: usize,
    pub out: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: None,
            model: ModelChoice::Hydrogen,
            z: 1.0,
            n: None,
            nuclei: Vec::new(),
            alpha: None,
            jastrow_b: 0.0,
            jastrow_c: 0.0,
            energy: None,
            ion_energy: None,
            grid_max: None,
            grid_points: 400,
            grid_first_step: 1e-4,
            sphere_degree: SphereRule::default().degree(),
            mc_chains: 8,
            mc_steps: 20_000,
            mc_burn_in: 2_000,
            mc_scale: 0.5,
            seed: 1,
            family: None,
            energy_path: "auto".into(),
            budget: 200,
            x_tol: 1e-9,
            checks: Vec::new(),
            tolerances: Tolerances::default(),
            expectations: BTreeMap::new(),
            h_points: 100,
            h_radius: 1.0,
            h_extent: None,
            gradient_radius: 0.5,
            gradient_centers: 50,
            gradient_samples: 200,
            holder_seeds: 10,
            holder_separations: 9,
            delta_f_configs: 100,
            out: "out".into(),
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Cfg<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| bad(key, format!("'{v}': {e}")))
}

fn opt_num<T: std::str::FromStr>(key: &str, v: &str) -> Cfg<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if v == "auto" || v.is_empty() {
        Ok(None)
    } else {
        num(key, v).map(Some)
    }
}

fn fmt_opt(v: Option<impl std::fmt::Display>) -> String {
    v.map_or_else(|| "auto".into(), |v| v.to_string())
}

/// `Z@x,y,z` entries separated by `;`.
fn parse_nuclei(v: &str) -> Cfg<Vec<Nucleus>> {
    if v.is_empty() || v == "auto" {
        return Ok(Vec::new());
    }
    v.split(';')
        .map(|item| {
            let (z, pos) = item
                .split_once('@')
                .ok_or_else(|| bad("nuclei", format!("'{item}' is not of the form Z@x,y,z")))?;
            let c: Vec<f64> = pos.split(',').map(|s| num::<f64>("nuclei", s.trim())).collect::<Cfg<_>>()?;
            if c.len() != 3 {
                return Err(bad("nuclei", format!("'{item}' needs three coordinates")));
            }
            Ok(Nucleus { charge: num("nuclei", z.trim())?, position: Vec3::new(c[0], c[1], c[2]) })
        })
        .collect()
}

fn fmt_nuclei(n: &[Nucleus]) -> String {
    if n.is_empty() {
        return "auto".into();
    }
    n.iter()
        .map(|n| format!("{}@{},{},{}", n.charge, n.position.x, n.position.y, n.position.z))
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_expectation(key: &str, v: &str) -> Cfg<Expectation> {
    Ok(match v {
        "pass" => Expectation::Pass,
        "fail" => Expectation::Fail,
        "report" => Expectation::Report,
        _ => return Err(bad(key, format!("'{v}' is not one of pass, fail, report"))),
    })
}

fn expectation_name(e: Expectation) -> &'static str {
    match e {
        Expectation::Pass => "pass",
        Expectation::Fail => "fail",
        Expectation::Report => "report",
    }
}

/// Parses a flat `key = value` file. `#` starts a comment; blank lines are ignored.
pub fn parse_kv(text: &str) -> Cfg<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (l, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| ConfigError(format!("line {}: expected key = value", l + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    pub fn preset(name: &str) -> Cfg<Self> {
        let mut c = Self { preset: Some(name.into()), ..Self::default() };
        match name {
            "hydrogen" => {}
            "hydrogen-2s" => {
                c.model = ModelChoice::Hydrogen2s;
                c.checks = ["cusp", "curvature", "pde", "tail", "t1", "gradient", "holder", "delta-f"]
                    .map(String::from)
                    .to_vec();
            }
            "product-helium" => {
                c.model = ModelChoice::Product;
                c.z = 2.0;
                c.expectations.insert("cusp".into(), Expectation::Fail);
                c.expectations.insert("pde".into(), Expectation::Report);
                // without the nuclear cusp the trial systematic diverges at r = 0
                c.expectations.insert("curvature".into(), Expectation::Report);
            }
            "jastrow-helium" => {
                c.model = ModelChoice::Jastrow;
                c.z = 2.0;
                c.tolerances.cusp = 5e-3;
            }
            "h2-molecule" => {
                c.model = ModelChoice::None;
                c.n = Some(2);
                c.nuclei = vec![
                    Nucleus { charge: 1.0, position: Vec3::new(-0.7, 0.0, 0.0) },
                    Nucleus { charge: 1.0, position: Vec3::new(0.7, 0.0, 0.0) },
                ];
                c.checks = vec!["delta-f".into()];
            }
            _ => return Err(bad("preset", format!("'{name}' is not one of {}", PRESETS.join(", ")))),
        }
        Ok(c)
    }

    /// Builds a config from `key = value` pairs; a `preset` pair is applied first.
    pub fn from_pairs(pairs: &[(String, String)]) -> Cfg<Self> {
        let mut c = match pairs.iter().rev().find(|(k, _)| k == "preset") {
            Some((_, p)) if p != "none" => Self::preset(p)?,
            _ => Self::default(),
        };
        for (k, v) in pairs {
            if k != "preset" {
                c.set(k, v)?;
            }
        }
        Ok(c)
    }

    pub fn from_kv(text: &str) -> Cfg<Self> {
        Self::from_pairs(&parse_kv(text)?)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Cfg<()> {
        if let Some(t) = key.strip_prefix("tol.") {
            let x: f64 = num(key, v)?;
            return self.tolerances.set(t, x).map_err(|e| bad(key, e));
        }
        if let Some(check) = key.strip_prefix("expect.") {
            if !CHECKS.contains(&check) {
                return Err(ConfigError(format!("unknown check '{check}' in key '{key}'")));
            }
            self.expectations.insert(check.into(), parse_expectation(key, v)?);
            return Ok(());
        }
        match key {
            "preset" => return Err(ConfigError("'preset' must be applied before other keys".into())),
            "model" => self.model = ModelChoice::parse(v)?,
            "z" => self.z = num(key, v)?,
            "n" => self.n = opt_num(key, v)?,
            "nuclei" => self.nuclei = parse_nuclei(v)?,
            "alpha" => self.alpha = opt_num(key, v)?,
            "jastrow_b" => self.jastrow_b = num(key, v)?,
            "jastrow_c" => self.jastrow_c = num(key, v)?,
            "energy" => self.energy = opt_num(key, v)?,
            "ion_energy" => self.ion_energy = opt_num(key, v)?,
            "grid_max" => self.grid_max = opt_num(key, v)?,
            "grid_points" => self.grid_points = num(key, v)?,
            "grid_first_step" => self.grid_first_step = num(key, v)?,
            "sphere_degree" => self.sphere_degree = num(key, v)?,
            "mc_chains" => self.mc_chains = num(key, v)?,
            "mc_steps" => self.mc_steps = num(key, v)?,
            "mc_burn_in" => self.mc_burn_in = num(key, v)?,
            "mc_scale" => self.mc_scale = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "family" => self.family = if v == "auto" { None } else { Some(FamilyChoice::parse(v)?) },
            "energy_path" => {
                if !matches!(v, "auto" | "mc") {
                    return Err(bad(key, format!("'{v}' is not one of auto, mc")));
                }
                self.energy_path = v.into();
            }
            "budget" => self.budget = num(key, v)?,
            "x_tol" => self.x_tol = num(key, v)?,
            "checks" => {
                let list: Vec<String> = if v == "auto" || v.is_empty() {
                    Vec::new()
                } else {
                    v.split(',').map(|s| s.trim().to_string()).collect()
                };
                for c in &list {
                    if !CHECKS.contains(&c.as_str()) {
                        return Err(bad(key, format!("unknown check '{c}'; known: {}", CHECKS.join(", "))));
                    }
                }
                self.checks = list;
            }
            "h_points" => self.h_points = num(key, v)?,
            "h_radius" => self.h_radius = num(key, v)?,
            "h_extent" => self.h_extent = opt_num(key, v)?,
            "gradient_radius" => self.gradient_radius = num(key, v)?,
            "gradient_centers" => self.gradient_centers = num(key, v)?,
            "gradient_samples" => self.gradient_samples = num(key, v)?,
            "holder_seeds" => self.holder_seeds = num(key, v)?,
            "holder_separations" => self.holder_separations = num(key, v)?,
            "delta_f_configs" => self.delta_f_configs = num(key, v)?,
            "out" => self.out = v.into(),
            _ => return Err(ConfigError(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// The config as `key = value` text that [`RunConfig::from_kv`] reads back.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("preset", self.preset.clone().unwrap_or_else(|| "none".into()));
        put("model", self.model.name().into());
        put("z", self.z.to_string());
        put("n", fmt_opt(self.n));
        put("nuclei", fmt_nuclei(&self.nuclei));
        put("alpha", fmt_opt(self.alpha));
        put("jastrow_b", self.jastrow_b.to_string());
        put("jastrow_c", self.jastrow_c.to_string());
        put("energy", fmt_opt(self.energy));
        put("ion_energy", fmt_opt(self.ion_energy));
        put("grid_max", fmt_opt(self.grid_max));
        put("grid_points", self.grid_points.to_string());
        put("grid_first_step", self.grid_first_step.to_string());
        put("sphere_degree", self.sphere_degree.to_string());
        put("mc_chains", self.mc_chains.to_string());
        put("mc_steps", self.mc_steps.to_string());
        put("mc_burn_in", self.mc_burn_in.to_string());
        put("mc_scale", self.mc_scale.to_string());
        put("seed", self.seed.to_string());
        put("family", self.family.map_or("auto", |f| f.name()).into());
        put("energy_path", self.energy_path.clone());
        put("budget", self.budget.to_string());
        put("x_tol", self.x_tol.to_string());
        put("checks", if self.checks.is_empty() { "auto".into() } else { self.checks.join(",") });
        for k in Tolerances::KEYS {
            put(&format!("tol.{k}"), self.tolerances.get(k).expect("known key").to_string());
        }
        for (k, e) in &self.expectations {
            put(&format!("expect.{k}"), expectation_name(*e).into());
        }
        put("h_points", self.h_points.to_string());
        put("h_radius", self.h_radius.to_string());
        put("h_extent", fmt_opt(self.h_extent));
        put("gradient_radius", self.gradient_radius.to_string());
        put("gradient_centers", self.gradient_centers.to_string());
        put("gradient_samples", self.gradient_samples.to_string());
        put("holder_seeds", self.holder_seeds.to_string());
        put("holder_separations", self.holder_separations.to_string());
        put("delta_f_configs", self.delta_f_configs.to_string());
        put("out", self.out.clone());
        s
    }

    /// One line per key with its default, for `--help-config`.
    pub fn describe_defaults() -> String {
        let mut s = String::from(
            "Config keys (flat `key = value`, `#` comments). `auto` picks a model-dependent default:\n\
             n: 1 for hydrogen models, 2 otherwise; alpha: Z/2 - 5/32;\n\
             energy: exact for hydrogen models, E(alpha) for product, the product optimum -2(Z/2 - 5/32)^2 for jastrow;\n\
             ion_energy: 0 for one electron, -Z^2/4 for two; grid_max: 20/Z; h_extent: 3/Z;\n\
             checks: every check that applies to the model; family: follows the model.\n\n",
        );
        s.push_str(&Self::default().to_kv());
        s
    }

    pub fn validate(&self) -> Cfg<()> {
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(bad("z", format!("Z must be a positive number, got {}", self.z)));
        }
        let expect_n = match self.model {
            ModelChoice::Hydrogen | ModelChoice::Hydrogen2s => Some(1),
            ModelChoice::Product | ModelChoice::Jastrow => Some(2),
            ModelChoice::None => None,
        };
        if let (Some(want), Some(n)) = (expect_n, self.n) {
            if n != want {
                return Err(bad("n", format!("model {} has N = {want}, got {n}", self.model.name())));
            }
        }
        if self.n == Some(0) {
            return Err(bad("n", "N must be >= 1"));
        }
        if self.model == ModelChoice::None && self.n.is_none() {
            return Err(bad("n", "model none needs an explicit electron count"));
        }
        if self.model != ModelChoice::None && !self.nuclei.is_empty() {
            return Err(bad("nuclei", "wavefunction models are atomic; nuclei are only for model = none"));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(bad("alpha", format!("must be positive, got {a}")));
            }
        }
        if !(self.jastrow_b >= 0.0 && self.jastrow_c >= 0.0) {
            return Err(bad("jastrow_b", "prefactor parameters must be nonnegative"));
        }
        if self.grid_points < 20 {
            return Err(bad("grid_points", format!("need at least 20, got {}", self.grid_points)));
        }
        if let Some(g) = self.grid_max {
            if !(g > self.grid_first_step) {
                return Err(bad("grid_max", format!("must exceed grid_first_step, got {g}")));
            }
        }
        if !(self.grid_first_step > 0.0) {
            return Err(bad("grid_first_step", "must be positive"));
        }
        if self.sphere_degree == 0 || self.sphere_degree % 2 == 0 {
            return Err(bad("sphere_degree", format!("must be odd and positive, got {}", self.sphere_degree)));
        }
        if self.mc_steps <= self.mc_burn_in {
            return Err(bad("mc_steps", format!("must exceed mc_burn_in ({})", self.mc_burn_in)));
        }
        if self.mc_chains < 4 {
            return Err(bad("mc_chains", "need at least 4 chains for error bars"));
        }
        if self.budget == 0 {
            return Err(bad("budget", "must be positive"));
        }
        for (k, v, min) in [
            ("h_points", self.h_points, 4),
            ("gradient_centers", self.gradient_centers, 1),
            ("gradient_samples", self.gradient_samples, 1),
            ("holder_seeds", self.holder_seeds, 1),
            ("holder_separations", self.holder_separations, 3),
            ("delta_f_configs", self.delta_f_configs, 1),
        ] {
            if v < min {
                return Err(bad(k, format!("must be at least {min}, got {v}")));
            }
        }
        for (k, v) in [("h_radius", self.h_radius), ("gradient_radius", self.gradient_radius)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(k, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn electron_count(&self) -> usize {
        self.n.unwrap_or(match self.model {
            ModelChoice::Hydrogen | ModelChoice::Hydrogen2s => 1,
            _ => 2,
        })
    }

    pub fn alpha_or_default(&self) -> f64 {
        self.alpha.unwrap_or(self.z / 2.0 - 5.0 / 32.0)
    }

    pub fn model(&self) -> Cfg<Option<WavefunctionModel>> {
        let z = self.z;
        let m = match self.model {
            ModelChoice::Hydrogen => WavefunctionModel::hydrogenic_ground(z),
            ModelChoice::Hydrogen2s => WavefunctionModel::hydrogenic_2s(z),
            ModelChoice::Product => WavefunctionModel::product(z, self.alpha_or_default()),
            ModelChoice::Jastrow => {
                WavefunctionModel::jastrow(z, JastrowPrefactor { b: self.jastrow_b, c: self.jastrow_c })
            }
            ModelChoice::None => return Ok(None),
        };
        m.map(Some).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn system(&self) -> Cfg<SystemSpec> {
        let r = if self.nuclei.is_empty() {
            SystemSpec::atom(self.z, self.electron_count())
        } else {
            SystemSpec::new(self.electron_count(), self.nuclei.clone())
        };
        r.map_err(|e| bad("nuclei", e))
    }

    /// Energy used in `h`: exact, closed form, or the product optimum.
    pub fn energy_or_default(&self) -> Option<f64> {
        if self.energy.is_some() {
            return self.energy;
        }
        let z = self.z;
        match self.model {
            ModelChoice::Hydrogen => Some(-z * z / 4.0),
            ModelChoice::Hydrogen2s => Some(-z * z / 16.0),
            ModelChoice::Product => {
                let a = self.alpha_or_default();
                Some(2.0 * a * a - (2.0 * z - 0.625) * a)
            }
            ModelChoice::Jastrow => {
                let a = z / 2.0 - 5.0 / 32.0;
                Some(-2.0 * a * a)
            }
            ModelChoice::None => None,
        }
    }

    pub fn ion_energy_or_default(&self) -> f64 {
        self.ion_energy.unwrap_or(if self.electron_count() == 1 { 0.0 } else { -self.z * self.z / 4.0 })
    }

    pub fn grid(&self) -> Cfg<RadialGrid> {
        let r_max = self.grid_max.unwrap_or(20.0 / self.z);
        RadialGrid::mapped_geometric(self.grid_first_step, r_max, self.grid_points).map_err(|e| bad("grid_max", e))
    }

    pub fn sphere_rule(&self) -> Cfg<SphereRule> {
        Ok(SphereRule::product(self.sphere_degree.div_ceil(2)))
    }

    pub fn mc(&self) -> McConfig {
        McConfig {
            chain_count: self.mc_chains,
            steps_per_chain: self.mc_steps,
            burn_in: self.mc_burn_in,
            proposal_scale: self.mc_scale,
            seed: self.seed,
        }
    }

    pub fn family_or_default(&self) -> Cfg<FamilyChoice> {
        if let Some(f) = self.family {
            return Ok(f);
        }
        Ok(match self.model {
            ModelChoice::Hydrogen => FamilyChoice::Hydrogenic,
            ModelChoice::Product => FamilyChoice::Product,
            ModelChoice::Jastrow => FamilyChoice::Jastrow,
            m => return Err(bad("family", format!("model {} has no trial family; pass --family", m.name()))),
        })
    }

    /// Checks to run: the configured list, or every check the model supports.
    pub fn checks_or_default(&self) -> Vec<String> {
        if !self.checks.is_empty() {
            return self.checks.clone();
        }
        match self.model {
            ModelChoice::None => vec!["delta-f".into()],
            _ => CHECKS.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn expectation(&self, check: &str) -> Expectation {
        self.expectations.get(check).copied().unwrap_or(Expectation::Pass)
    }
}
