//! Checks evaluated at sampled points in configuration or physical space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::report::{Digest, ScanReport};
use crate::ansatz::{check_delta_f_equals_v, eval_grad_phi};
use crate::density::{h_point, rho_point, DensityProfile};
use crate::error::{Error, Result};
use crate::integration::{lagrange_extrapolation_weights, FdScheme};
use crate::model::{Configuration, SystemSpec, Vec3, WavefunctionModel};

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut v = 0.0;
    while i > 0 {
        v += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    v
}

/// Randomly shifted Halton points in the `dim`-ball of `radius` around `center`.
pub fn halton_ball(center: &[f64], radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let dim = center.len();
    assert!(dim <= PRIMES.len(), "Halton sequence supports up to {} dimensions", PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let u: Vec<f64> = (0..dim).map(|k| 2.0 * ((radical_inverse(i, PRIMES[k]) + shift[k]) % 1.0) - 1.0).collect();
        i += 1;
        if u.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            out.push(center.iter().zip(&u).map(|(c, x)| c + radius * x).collect());
        }
    }
    out
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Compass search for a maximum of `f` inside the ball. Returns every point visited.
fn climb(f: &dyn Fn(&[f64]) -> Option<f64>, start: &[f64], center: &[f64], radius: f64) -> Vec<(Vec<f64>, f64)> {
    let mut visited = Vec::new();
    let mut x = start.to_vec();
    let Some(mut best) = f(&x) else { return visited };
    let mut step = 0.25 * radius;
    let mut evals = 0;
    while step > 1e-6 * radius && evals < 60 * x.len() {
        let mut moved = false;
        for k in 0..x.len() {
            for sgn in [1.0, -1.0] {
                let mut y = x.clone();
                y[k] += sgn * step;
                if dist(&y, center) > radius {
                    continue;
                }
                evals += 1;
                if let Some(v) = f(&y) {
                    visited.push((y.clone(), v));
                    if v > best {
                        best = v;
                        x = y;
                        moved = true;
                    }
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    visited
}

fn psi_abs(m: &WavefunctionModel, x: &[f64]) -> Option<f64> {
    Configuration::from_flat(x).ok().and_then(|c| m.psi(&c).ok()).map(f64::abs).filter(|v| v.is_finite())
}

fn grad_norm(m: &WavefunctionModel, x: &[f64]) -> Option<f64> {
    let c = Configuration::from_flat(x).ok()?;
    let d = m.derivs(&c).ok()?;
    let g = d.grad.iter().map(|v| v * v).sum::<f64>().sqrt();
    g.is_finite().then_some(g)
}

/// `sup_{B(x,R)} |∇ψ| / sup_{B(x,2R)} |ψ|` from Halton samples plus a hill climb.
/// Points where the gradient is undefined are skipped; `None` if `sup |ψ| = 0`.
pub fn gradient_ratio(m: &WavefunctionModel, center: &[f64], radius: f64, samples: usize, seed: u64) -> Result<Option<f64>> {
    if !(radius > 0.0) || samples == 0 {
        return Err(Error::InvalidInput("gradient ratio needs R > 0 and a positive sample budget".into()));
    }
    if center.len() != 3 * m.electron_count() {
        return Err(Error::ArityMismatch { expected: m.electron_count(), found: center.len() / 3 });
    }
    let inner = halton_ball(center, radius, samples, seed);
    let mut grad_max = 0.0f64;
    let mut psi_max = 0.0f64;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for x in &inner {
        if let Some(g) = grad_norm(m, x) {
            if best.as_ref().is_none_or(|b| g > b.1) {
                best = Some((x.clone(), g));
            }
        }
        if let Some(p) = psi_abs(m, x) {
            psi_max = psi_max.max(p);
        }
    }
    if let Some((x, g)) = best {
        grad_max = g;
        for (y, v) in climb(&|p| grad_norm(m, p), &x, center, radius) {
            grad_max = grad_max.max(v);
            if let Some(p) = psi_abs(m, &y) {
                psi_max = psi_max.max(p);
            }
        }
    }
    let outer = halton_ball(center, 2.0 * radius, samples, seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for x in &outer {
        if let Some(p) = psi_abs(m, x) {
            if best.as_ref().is_none_or(|b| p > b.1) {
                best = Some((x.clone(), p));
            }
        }
    }
    if let Some((x, p)) = best {
        psi_max = psi_max.max(p);
        for (_, v) in climb(&|q| psi_abs(m, q), &x, center, 2.0 * radius) {
            psi_max = psi_max.max(v);
        }
    }
    Ok((psi_max > 0.0).then(|| grad_max / psi_max))
}

/// Ratios at every center. With `bound`, every ratio must stay below it.
pub fn gradient_ratio_scan(
    m: &WavefunctionModel,
    centers: &[Vec<f64>],
    radius: f64,
    samples: usize,
    seed: u64,
    bound: Option<f64>,
) -> Result<ScanReport> {
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut skipped = 0;
    for c in centers {
        match gradient_ratio(m, c, radius, samples, seed)? {
            Some(r) => {
                points.push(c.clone());
                values.push(r);
            }
            None => skipped += 1,
        }
    }
    let digest = Digest::of(&("gradient-ratio", m, centers, radius, samples, seed, bound));
    let criterion = match bound {
        Some(b) => format!("every ratio <= {b:.6}"),
        None => "every ratio finite".into(),
    };
    let ok = values.iter().all(|v| v.is_finite()) && bound.is_none_or(|b| values.iter().all(|v| *v <= b));
    let mut rep = ScanReport::new("gradient-ratio", points, values, &criterion, digest);
    rep.pass = ok && !rep.values.is_empty();
    if skipped > 0 {
        rep = rep.note(format!("{skipped} centers with sup|ψ| = 0 are not applicable"));
    }
    Ok(rep)
}

/// Ratio stability: for centers ordered from far to near a singular set, the
/// ratio may not grow by `growth` relative to the first center, and no ratio
/// may change by `growth` when the sample budget is quadrupled.
pub fn gradient_ratio_refinement(
    m: &WavefunctionModel,
    centers: &[Vec<f64>],
    radius: f64,
    samples: usize,
    seed: u64,
    growth: f64,
) -> Result<ScanReport> {
    let mut coarse = Vec::new();
    let mut fine = Vec::new();
    for c in centers {
        let a = gradient_ratio(m, c, radius, samples, seed)?;
        let b = gradient_ratio(m, c, radius, 4 * samples, seed)?;
        match (a, b) {
            (Some(a), Some(b)) => {
                coarse.push(a);
                fine.push(b);
            }
            _ => return Err(Error::NonFinite("gradient ratio undefined at a refinement center".into())),
        }
    }
    if fine.is_empty() {
        return Err(Error::InvalidInput("no centers".into()));
    }
    let budget_change = coarse.iter().zip(&fine).map(|(a, b)| (a / b).max(b / a)).fold(1.0, f64::max);
    let approach_change = fine.iter().map(|r| (r / fine[0]).max(fine[0] / r)).fold(1.0, f64::max);
    let digest = Digest::of(&("gradient-refinement", m, centers, radius, samples, seed, growth));
    let mut rep = ScanReport::new(
        "gradient-refinement",
        centers.to_vec(),
        fine,
        &format!("ratio changes < {growth}x under 4x samples and along the approach"),
        digest,
    )
    .with("budget_change", budget_change)
    .with("approach_change", approach_change)
    .note(format!("largest change: {budget_change:.4}x with 4x samples, {approach_change:.4}x along the approach"));
    rep.pass = budget_change < growth && approach_change < growth;
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    /// `None` when every difference is below the noise floor.
    pub alpha: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub separations: Vec<f64>,
    pub differences: Vec<f64>,
}

impl HolderFit {
    pub fn smooth_within_noise(&self) -> bool {
        self.alpha.is_none()
    }
}

/// Log-log slope of `‖field(x) - field(y)‖` against `|x - y|` for pairs
/// `base ± (s/2) direction`.
pub fn holder_exponent(
    field: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    base: &[f64],
    direction: &[f64],
    separations: &[f64],
    noise_floor: f64,
) -> Result<HolderFit> {
    let dn = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(dn > 0.0) || direction.len() != base.len() {
        return Err(Error::InvalidInput("holder_exponent needs a nonzero direction of the base dimension".into()));
    }
    let mut seps = Vec::new();
    let mut diffs = Vec::new();
    for &s in separations {
        let x: Vec<f64> = base.iter().zip(direction).map(|(b, d)| b + 0.5 * s * d / dn).collect();
        let y: Vec<f64> = base.iter().zip(direction).map(|(b, d)| b - 0.5 * s * d / dn).collect();
        let (fx, fy) = (field(&x)?, field(&y)?);
        let d = fx.iter().zip(&fy).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        seps.push(s);
        diffs.push(d);
    }
    let usable: Vec<(f64, f64)> =
        seps.iter().zip(&diffs).filter(|(_, d)| **d > noise_floor).map(|(s, d)| (s.ln(), d.ln())).collect();
    if usable.len() < 3 {
        return Ok(HolderFit { alpha: None, ci_low: None, ci_high: None, separations: seps, differences: diffs });
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = usable.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let se = if n > 2.0 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(HolderFit {
        alpha: Some(slope),
        ci_low: Some(slope - 2.0 * se),
        ci_high: Some(slope + 2.0 * se),
        separations: seps,
        differences: diffs,
    })
}

/// `n` log-spaced separations from 1e-1 down to 1e-5.
pub fn log_separations(n: usize) -> Vec<f64> {
    (0..n).map(|k| 10f64.powf(-1.0 - 4.0 * k as f64 / (n - 1).max(1) as f64)).collect()
}

fn unit_vec3(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        let n = v.norm();
        if n > 1e-3 {
            return v * (1.0 / n);
        }
    }
}

/// Base point and direction for one seed. Two-electron bases sit on the
/// coalescence set `x₁ = x₂` and pairs move the electrons apart.
pub fn holder_pair_geometry(electrons: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = unit_vec3(&mut rng) * rng.gen_range(0.3..1.5);
    let u = unit_vec3(&mut rng);
    let mut base = Vec::new();
    let mut dir = Vec::new();
    for j in 0..electrons {
        base.extend(b.to_array());
        let sgn = match (electrons, j) {
            (1, _) => 1.0,
            (_, 0) => 1.0,
            (_, 1) => -1.0,
            _ => 0.0,
        };
        dir.extend((u * sgn).to_array());
    }
    (base, dir)
}

/// What the Hölder panel should find.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HolderExpectation {
    /// Slope below `low` on every seed.
    Jump,
    /// Smooth within noise or slope above `high` on every seed.
    Smooth,
}

/// Hölder slope of `∇φ` on a panel of seeds. Seeds that are smooth within
/// noise are reported with value 1.
#[allow(clippy::too_many_arguments)]
pub fn holder_panel(
    m: &WavefunctionModel,
    spec: &SystemSpec,
    seeds: &[u64],
    separations: &[f64],
    noise_floor: f64,
    expect: HolderExpectation,
    low: f64,
    high: f64,
) -> Result<ScanReport> {
    let field = |x: &[f64]| eval_grad_phi(m, spec, &Configuration::from_flat(x)?);
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut smooth = 0;
    let mut ok = true;
    let mut notes = Vec::new();
    for &seed in seeds {
        let (base, dir) = holder_pair_geometry(m.electron_count(), seed);
        let fit = holder_exponent(&field, &base, &dir, separations, noise_floor)?;
        let pass = match (expect, fit.alpha) {
            (HolderExpectation::Jump, Some(a)) => a < low,
            (HolderExpectation::Jump, None) => false,
            (HolderExpectation::Smooth, Some(a)) => a > high,
            (HolderExpectation::Smooth, None) => true,
        };
        ok &= pass;
        match fit.alpha {
            Some(a) => {
                values.push(a);
                notes.push(format!(
                    "seed {seed}: slope {a:.4} [{:.4}, {:.4}]",
                    fit.ci_low.unwrap_or(a),
                    fit.ci_high.unwrap_or(a)
                ));
            }
            None => {
                smooth += 1;
                values.push(1.0);
                notes.push(format!("seed {seed}: smooth within noise (all differences < {noise_floor:.0e})"));
            }
        }
        points.push(base);
    }
    let digest = Digest::of(&("holder", m, spec, seeds, separations, noise_floor, expect, low, high));
    let criterion = match expect {
        HolderExpectation::Jump => format!("slope < {low} on every seed"),
        HolderExpectation::Smooth => format!("smooth within noise or slope > {high} on every seed"),
    };
    let mut rep = ScanReport::new("holder-exponent", points, values, &criterion, digest).with("smooth_seeds", smooth as f64);
    rep.notes = notes;
    rep.pass = ok;
    Ok(rep)
}

/// `ρ(y)` for an S-symmetric density, interpolated from `ρ̃/4π`; zero past the grid.
pub fn interpolate_rho(p: &DensityProfile, r: f64) -> f64 {
    let g = &p.grid;
    if r > g.r_max {
        return 0.0;
    }
    let s = g.stencil(g.nearest(r), 6);
    let w = lagrange_extrapolation_weights(r, &g.nodes[s.clone()]);
    let v: f64 = w.iter().zip(s).map(|(w, j)| w * p.rho_tilde[j].value).sum();
    v.max(0.0) / (4.0 * std::f64::consts::PI)
}

/// `∫_{B(x,R)} ρ` by Monte Carlo on the interpolated profile.
pub fn ball_integral(p: &DensityProfile, x: Vec3, radius: f64, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vol = 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let y = loop {
            let u = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if u.norm_sq() <= 1.0 {
                break x + u * radius;
            }
        };
        let v = interpolate_rho(p, y.norm());
        s += v;
        s2 += v * v;
    }
    let n = samples as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0);
    (vol * mean, vol * (var / n).sqrt())
}

/// Sample points for the bounds on `h`: the origin, then Halton points in the ball of `extent`.
pub fn h_sample_points(count: usize, extent: f64, seed: u64) -> Vec<Vec3> {
    let mut out = vec![Vec3::ZERO];
    out.extend(
        halton_ball(&[0.0; 3], extent, count.saturating_sub(1), seed)
            .into_iter()
            .map(|v| Vec3::new(v[0], v[1], v[2])),
    );
    out
}

pub const BALL_SAMPLES: usize = 4000;

/// Lower bound `h - ερ >= -kσ` at each point, and the fitted constant
/// `Ĉ = max h / (∫_{B(x,R)} ρ + ρ)` compared between the first half of the
/// points and all of them.
#[allow(clippy::too_many_arguments)]
pub fn check_h_bounds(
    m: &WavefunctionModel,
    spec: &SystemSpec,
    energy: f64,
    epsilon: f64,
    radius: f64,
    points: &[Vec3],
    profile: &DensityProfile,
    sigmas: f64,
    max_drift: f64,
    seed: u64,
) -> Result<ScanReport> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("ball radius must be positive, got {radius}")));
    }
    if points.len() < 4 {
        return Err(Error::InvalidInput("h bounds need at least 4 sample points".into()));
    }
    #[cfg(feature = "parallel")]
    use rayon::prelude::*;
    let eval = |(k, x): (usize, &Vec3)| -> Result<(f64, f64, f64, f64, f64)> {
        let h = h_point(m, spec, energy, *x)?.total;
        let rho = rho_point(m, *x)?;
        let (ball, _) = ball_integral(profile, *x, radius, BALL_SAMPLES, seed.wrapping_add(k as u64));
        Ok((h.value, h.stderr, rho.value, rho.stderr, ball))
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<_> = points.par_iter().enumerate().map(eval).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<_> = points.iter().enumerate().map(eval).collect::<Result<_>>()?;

    let lower_active = epsilon > 0.0;
    let mut margins = Vec::with_capacity(rows.len());
    let mut worst = f64::INFINITY;
    let mut lower_ok = true;
    for &(h, he, rho, re, _) in &rows {
        let margin = h - epsilon * rho;
        let sigma = he + epsilon.abs() * re;
        if lower_active {
            lower_ok &= margin >= -sigmas * sigma;
            worst = worst.min(margin / rho.max(f64::MIN_POSITIVE));
        }
        margins.push(margin);
    }
    let c_hat = |rows: &[(f64, f64, f64, f64, f64)]| {
        rows.iter().map(|&(h, _, rho, _, ball)| h / (ball + rho)).fold(0.0f64, f64::max)
    };
    let half = rows.len() / 2;
    let (c_half, c_all) = (c_hat(&rows[..half]), c_hat(&rows));
    let drift = (c_all - c_half).abs() / c_half;
    let digest = Digest::of(&("h-bounds", m, spec, energy, epsilon, radius, points, profile, sigmas, max_drift, seed));
    let mut rep = ScanReport::new(
        "h-bounds",
        points.iter().map(|p| p.to_array().to_vec()).collect(),
        margins,
        &format!("h - ερ >= -{sigmas}σ everywhere; fitted constant drifts < {max_drift} when samples double"),
        digest,
    )
    .with("c_hat_half", c_half)
    .with("c_hat_all", c_all)
    .with("c_hat_drift", drift)
    .note(format!("Ĉ = {c_half:.6e} on {half} points, {c_all:.6e} on {}; drift {drift:.3e}", rows.len()));
    if lower_active {
        rep = rep.with("min_relative_margin", worst).note(format!("smallest (h - ερ)/ρ = {worst:.6e}"));
    } else {
        rep = rep.note(format!("ε = {epsilon} <= 0: lower bound skipped"));
    }
    rep.pass = lower_ok && drift < max_drift && c_all.is_finite();
    Ok(rep)
}

/// `|Δ_FD F - V| / max(1, |V|)` at random configurations away from the
/// singular set, for each system.
pub fn check_delta_f(
    systems: &[SystemSpec],
    per_system: usize,
    fd: &FdScheme,
    tol: f64,
    seed: u64,
) -> Result<ScanReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    let mut values = Vec::new();
    for spec in systems {
        let mut got = 0;
        let mut tries = 0;
        while got < per_system {
            tries += 1;
            if tries > 100 * per_system {
                return Err(Error::Sampler("could not place configurations away from coalescences".into()));
            }
            let pos: Vec<Vec3> = (0..spec.electron_count())
                .map(|_| {
                    let n = &spec.nuclei()[rng.gen_range(0..spec.nuclei().len())];
                    n.position + unit_vec3(&mut rng) * rng.gen_range(0.1..2.5)
                })
                .collect();
            let c = Configuration::new(pos)?;
            match check_delta_f_equals_v(spec, &c, fd) {
                Ok(r) => {
                    points.push(c.to_flat());
                    values.push(r);
                    got += 1;
                }
                Err(Error::StencilSingular(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    let digest = Digest::of(&("delta-f", systems, per_system, fd, tol, seed));
    let mut rep = ScanReport::new("delta-f", points, values, &format!("relative residual < {tol:.0e}"), digest);
    rep.pass = rep.summary.max < tol;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::rho_tilde_profile;
    use crate::integration::{RadialGrid, SphereRule};
    use crate::model::{JastrowPrefactor, Nucleus};

    #[test]
    fn halton_points_fill_the_ball() {
        let p = halton_ball(&[1.0, 0.0, 0.0], 0.5, 500, 3);
        assert_eq!(p.len(), 500);
        assert!(p.iter().all(|x| dist(x, &[1.0, 0.0, 0.0]) <= 0.5 + 1e-15));
        let mean: f64 = p.iter().map(|x| x[0]).sum::<f64>() / 500.0;
        assert!((mean - 1.0).abs() < 0.02);
        assert_eq!(p, halton_ball(&[1.0, 0.0, 0.0], 0.5, 500, 3));
    }

    #[test]
    fn hydrogen_gradient_ratio_is_bounded_by_half_z() {
        for z in [1.0, 2.0] {
            let m = WavefunctionModel::hydrogenic_ground(z).unwrap();
            let centers = vec![vec![0.0; 3], vec![0.7, -0.2, 0.1], vec![2.0, 1.0, 0.0]];
            let s = gradient_ratio_scan(&m, &centers, 0.5, 200, 1, Some(0.5 * z * 1.05)).unwrap();
            assert!(s.pass, "{:?}", s.values);
            assert!(s.values.iter().all(|v| *v <= 0.5 * z * (1.0 + 1e-12)));
        }
    }

    #[test]
    fn holder_discriminates_jump_and_smooth() {
        let seps = log_separations(9);
        let p = WavefunctionModel::product(2.0, 1.0).unwrap();
        let spec = p.system();
        let r = holder_panel(&p, &spec, &[1, 2, 3], &seps, 1e-8, HolderExpectation::Jump, 0.2, 0.8).unwrap();
        assert!(r.pass, "{:?}", r.notes);
        let j = WavefunctionModel::jastrow(2.0, JastrowPrefactor::ONE).unwrap();
        let r = holder_panel(&j, &spec, &[1, 2, 3], &seps, 1e-8, HolderExpectation::Smooth, 0.2, 0.8).unwrap();
        assert!(r.pass, "{:?}", r.notes);
        let j = WavefunctionModel::jastrow(2.0, JastrowPrefactor { b: 0.1, c: 0.05 }).unwrap();
        let r = holder_panel(&j, &spec, &[4], &seps, 1e-8, HolderExpectation::Smooth, 0.2, 0.8).unwrap();
        assert!(r.pass && r.values[0] > 0.95, "{:?}", r.notes);
        let h = WavefunctionModel::hydrogenic_ground(1.0).unwrap();
        let r = holder_panel(&h, &h.system(), &[5], &seps, 1e-8, HolderExpectation::Smooth, 0.2, 0.8).unwrap();
        assert_eq!(r.extra["smooth_seeds"], 1.0);
    }

    #[test]
    fn holder_fit_recovers_power_laws() {
        let seps = log_separations(9);
        let f = |x: &[f64]| Ok(vec![x[0].signum() * x[0].abs().sqrt()]);
        let fit = holder_exponent(&f, &[0.0], &[1.0], &seps, 1e-12).unwrap();
        assert!((fit.alpha.unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn hydrogen_h_bounds() {
        let m = WavefunctionModel::hydrogenic_ground(1.0).unwrap();
        let g = RadialGrid::default_for(1.0).unwrap();
        let p = rho_tilde_profile(&m, &g, &SphereRule::default()).unwrap();
        let pts = h_sample_points(20, 3.0, 1);
        let r = check_h_bounds(&m, &m.system(), -0.25, 0.25, 1.0, &pts, &p, 3.0, 0.2, 7).unwrap();
        assert!(r.pass, "{:?}", r.notes);
        assert!((r.extra["min_relative_margin"] - 0.25).abs() < 1e-6);
        let r = check_h_bounds(&m, &m.system(), -0.25, 0.0, 1.0, &pts, &p, 3.0, 0.2, 7).unwrap();
        assert!(r.notes.iter().any(|n| n.contains("skipped")));
    }

    #[test]
    fn interpolated_density_matches_closed_form() {
        let m = WavefunctionModel::hydrogenic_ground(1.0).unwrap();
        let p = rho_tilde_profile(&m, &RadialGrid::default_for(1.0).unwrap(), &SphereRule::default()).unwrap();
        for r in [0.0, 0.013, 0.7, 3.3, 15.0] {
            let exact = (-r as f64).exp() / (8.0 * std::f64::consts::PI);
            let e = (interpolate_rho(&p, r) / exact - 1.0).abs();
            assert!(e < 1e-5, "{r}: {e}");
        }
    }

    #[test]
    fn delta_f_on_atoms_and_a_molecule() {
        let mut systems = Vec::new();
        for n in 1..=3 {
            for z in [1.0, 2.0, 3.0] {
                systems.push(SystemSpec::atom(z, n).unwrap());
            }
        }
        systems.push(
            SystemSpec::new(
                2,
                vec![
                    Nucleus { charge: 1.0, position: Vec3::new(-0.7, 0.0, 0.0) },
                    Nucleus { charge: 1.0, position: Vec3::new(0.7, 0.0, 0.0) },
                ],
            )
            .unwrap(),
        );
        let r = check_delta_f(&systems, 3, &FdScheme::default(), 1e-7, 11).unwrap();
        assert!(r.pass, "{}", r.summary.max);
        assert_eq!(r.values.len(), 30);
    }
}
