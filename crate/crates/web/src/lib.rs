//! Browser bindings: radial profiles, near-nucleus summary and the product
//! energy curve, all returned as JSON strings.

use densitylab_core::density::{radial_observables, RadialObservables};
use densitylab_core::model::JastrowPrefactor;
use densitylab_core::variational::{minimize_energy, EnergyPath, OptSettings, TrialFamily};
use densitylab_core::verify::{check_curvature, check_cusp};
use densitylab_core::{McConfig, RadialGrid, SphereRule, WavefunctionModel};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn model(kind: &str, z: f64) -> Result<(WavefunctionModel, f64), String> {
    let a = z / 2.0 - 5.0 / 32.0;
    let r = match kind {
        "hydrogen" => WavefunctionModel::hydrogenic_ground(z).map(|m| (m, -z * z / 4.0)),
        "hydrogen-2s" => WavefunctionModel::hydrogenic_2s(z).map(|m| (m, -z * z / 16.0)),
        "product" => WavefunctionModel::product(z, a).map(|m| (m, -2.0 * a * a)),
        "jastrow" => WavefunctionModel::jastrow(z, JastrowPrefactor::ONE).map(|m| (m, -2.0 * a * a)),
        _ => return Err(format!("unknown model '{kind}'")),
    };
    r.map_err(|e| e.to_string())
}

fn observables(kind: &str, z: f64, points: usize) -> Result<(f64, RadialObservables), String> {
    let (m, e) = model(kind, z)?;
    let grid = RadialGrid::mapped_geometric(1e-4, 20.0 / z, points.max(40)).map_err(|e| e.to_string())?;
    // a coarser sphere rule keeps the browser responsive
    let o = radial_observables(&m, &m.system(), e, &grid, &SphereRule::product(7)).map_err(|e| e.to_string())?;
    Ok((e, o))
}

#[derive(Serialize)]
struct Profile {
    model: String,
    z: f64,
    energy: f64,
    r: Vec<f64>,
    rho_tilde: Vec<f64>,
    h_tilde: Vec<f64>,
    t1: Vec<f64>,
    norm: f64,
}

pub fn profile(kind: &str, z: f64, points: usize) -> Result<String, String> {
    let (energy, o) = observables(kind, z, points)?;
    let p = Profile {
        model: kind.into(),
        z,
        energy,
        r: o.density.grid.nodes.clone(),
        rho_tilde: o.density.values(),
        h_tilde: o.h.values(),
        t1: o.t1.values(),
        norm: o.density.norm_estimate.value,
    };
    Ok(serde_json::to_string(&p).expect("profile serialises"))
}

#[derive(Serialize)]
struct Summary {
    cusp_measured: f64,
    cusp_expected: f64,
    cusp_pass: bool,
    curvature_measured: f64,
    curvature_expected: f64,
    curvature_pass: bool,
    beta: f64,
    trial_offset: f64,
}

pub fn nucleus_summary(kind: &str, z: f64, points: usize) -> Result<String, String> {
    let (_, o) = observables(kind, z, points)?;
    let c = check_cusp(&o.density, z, 1e-6).map_err(|e| e.to_string())?;
    let k = check_curvature(&o.density, &o.h, z, 1e-5, 3.0).map_err(|e| e.to_string())?;
    let s = Summary {
        cusp_measured: c.measured,
        cusp_expected: c.expected,
        cusp_pass: c.pass,
        curvature_measured: k.measured,
        curvature_expected: k.expected,
        curvature_pass: k.pass,
        beta: k.extra["beta"],
        trial_offset: k.trial_systematic,
    };
    Ok(serde_json::to_string(&s).expect("summary serialises"))
}

#[derive(Serialize)]
struct Curve {
    alpha: Vec<f64>,
    energy: Vec<f64>,
    alpha_star: f64,
    energy_star: f64,
    epsilon: f64,
}

pub fn energy_curve(z: f64, lo: f64, hi: f64, count: usize) -> Result<String, String> {
    let fam = TrialFamily::product(z);
    let n = count.max(2);
    let lo = lo.max(fam.lower[0]);
    let hi = hi.min(fam.upper[0]);
    if !(hi > lo) {
        return Err(format!("empty alpha range [{lo}, {hi}]"));
    }
    let alpha: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    let energy = alpha.iter().map(|a| fam.closed_form_energy(&[*a]).expect("product has a closed form")).collect();
    let opt = minimize_energy(&fam, &[z / 2.0], &OptSettings::default(), &EnergyPath::Auto { mc: McConfig::default() })
        .map_err(|e| e.to_string())?;
    let c = Curve {
        alpha,
        energy,
        alpha_star: opt.theta_star[0],
        energy_star: opt.energy_star.value,
        epsilon: -z * z / 4.0 - opt.energy_star.value,
    };
    Ok(serde_json::to_string(&c).expect("curve serialises"))
}

/// `{r, rho_tilde, h_tilde, t1, ...}` on a grid of `points` nodes.
#[wasm_bindgen(js_name = profile)]
pub fn profile_js(kind: &str, z: f64, points: usize) -> Result<String, JsValue> {
    profile(kind, z, points).map_err(|e| JsValue::from_str(&e))
}

/// Cusp slope and `ρ̃''(0)` against `⅔(h̃(0) + Z²ρ̃(0))`.
#[wasm_bindgen(js_name = nucleusSummary)]
pub fn nucleus_summary_js(kind: &str, z: f64, points: usize) -> Result<String, JsValue> {
    nucleus_summary(kind, z, points).map_err(|e| JsValue::from_str(&e))
}

/// Product-trial `E(α)` on `count` points and its minimiser.
#[wasm_bindgen(js_name = energyCurve)]
pub fn energy_curve_js(z: f64, lo: f64, hi: f64, count: usize) -> Result<String, JsValue> {
    energy_curve(z, lo, hi, count).map_err(|e| JsValue::from_str(&e))
}
