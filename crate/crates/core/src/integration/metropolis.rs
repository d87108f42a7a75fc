//! Random-walk Metropolis over configurations, plus a plain importance
//! sampler in R³ used as an oracle for the quadrature paths.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::estimate::EstimateWithError;
use crate::error::{Error, Result};
use crate::model::{Configuration, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub chain_count: usize,
    pub steps_per_chain: usize,
    pub burn_in: usize,
    pub proposal_scale: f64,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { chain_count: 8, steps_per_chain: 20_000, burn_in: 2_000, proposal_scale: 0.5, seed: 1 }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chain_count == 0 {
            return Err(Error::InvalidInput("chain_count must be positive".into()));
        }
        if self.steps_per_chain <= self.burn_in {
            return Err(Error::InvalidInput(format!(
                "steps_per_chain ({}) must exceed burn_in ({})",
                self.steps_per_chain, self.burn_in
            )));
        }
        if !(self.proposal_scale > 0.0 && self.proposal_scale.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "proposal_scale must be positive, got {}",
                self.proposal_scale
            )));
        }
        Ok(())
    }
}

/// Post-burn-in samples, one vector per chain.
#[derive(Debug, Clone)]
pub struct ChainSamples {
    pub chains: Vec<Vec<Configuration>>,
    /// Acceptance rate after burn-in, per chain.
    pub acceptance: Vec<f64>,
    /// Frozen proposal scale, per chain.
    pub proposal_scale: Vec<f64>,
}

impl ChainSamples {
    pub fn chain_count(&self) -> usize {
        self.chains.len()
    }

    pub fn sample_count(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn mean_acceptance(&self) -> f64 {
        self.acceptance.iter().sum::<f64>() / self.acceptance.len() as f64
    }
}

const START_RETRIES: usize = 100;
const TUNE_WINDOW: usize = 50;

fn gaussian_move(rng: &mut ChaCha8Rng, c: &Configuration, scale: f64) -> Configuration {
    let moved = c
        .positions()
        .iter()
        .map(|p| {
            let d = Vec3::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            );
            *p + d * scale
        })
        .collect();
    Configuration::new(moved).expect("finite move of a valid configuration")
}

// Singular points and nodes count as zero weight.
fn safe_log_weight(log_weight: &impl Fn(&Configuration) -> Result<f64>, c: &Configuration) -> Result<f64> {
    match log_weight(c) {
        Ok(v) if v.is_nan() => Err(Error::NonFinite("log weight is NaN".into())),
        Ok(v) => Ok(v),
        Err(Error::Singular { .. }) | Err(Error::Node { .. }) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

fn run_chain(
    log_weight: &impl Fn(&Configuration) -> Result<f64>,
    start: &Configuration,
    mc: &McConfig,
    chain: usize,
) -> Result<(Vec<Configuration>, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    rng.set_stream(chain as u64);
    let mut scale = mc.proposal_scale;

    let mut current = start.clone();
    let mut lw = safe_log_weight(log_weight, &current)?;
    let mut tries = 0;
    while lw == f64::NEG_INFINITY {
        if tries == START_RETRIES {
            return Err(Error::Sampler(format!(
                "zero weight at the start point after {START_RETRIES} retries"
            )));
        }
        current = gaussian_move(&mut rng, start, scale);
        lw = safe_log_weight(log_weight, &current)?;
        tries += 1;
    }

    let kept = mc.steps_per_chain - mc.burn_in;
    let mut samples = Vec::with_capacity(kept);
    let mut window_accepts = 0usize;
    let mut accepts = 0usize;
    for step in 0..mc.steps_per_chain {
        let proposal = gaussian_move(&mut rng, &current, scale);
        let lp = safe_log_weight(log_weight, &proposal)?;
        let u: f64 = rng.gen();
        let accepted = lp > f64::NEG_INFINITY && u.ln() < lp - lw;
        if accepted {
            current = proposal;
            lw = lp;
        }
        if step < mc.burn_in {
            window_accepts += accepted as usize;
            if (step + 1) % TUNE_WINDOW == 0 {
                scale *= if window_accepts * 2 > TUNE_WINDOW { 1.1 } else { 0.9 };
                window_accepts = 0;
            }
        } else {
            accepts += accepted as usize;
            samples.push(current.clone());
        }
    }
    Ok((samples, accepts as f64 / kept as f64, scale))
}

/// Runs `mc.chain_count` independent chains targeting `exp(log_weight)`.
/// Chain `k` uses stream `k` of a ChaCha8 generator seeded with `mc.seed`.
pub fn metropolis_sample(
    log_weight: impl Fn(&Configuration) -> Result<f64> + Sync,
    start: &Configuration,
    mc: &McConfig,
) -> Result<ChainSamples> {
    mc.validate()?;
    #[cfg(feature = "parallel")]
    let runs: Vec<_> = {
        use rayon::prelude::*;
        (0..mc.chain_count)
            .into_par_iter()
            .map(|k| run_chain(&log_weight, start, mc, k))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<_> = (0..mc.chain_count).map(|k| run_chain(&log_weight, start, mc, k)).collect();

    let mut out = ChainSamples { chains: Vec::new(), acceptance: Vec::new(), proposal_scale: Vec::new() };
    for r in runs {
        let (s, a, sc) = r?;
        out.chains.push(s);
        out.acceptance.push(a);
        out.proposal_scale.push(sc);
    }
    Ok(out)
}

/// Per-chain means of `observable`.
pub fn chain_means(
    observable: impl Fn(&Configuration) -> Result<f64> + Sync,
    samples: &ChainSamples,
) -> Result<Vec<f64>> {
    let mean_of = |chain: &Vec<Configuration>| -> Result<f64> {
        let mut s = 0.0;
        for c in chain {
            let v = observable(c)?;
            if !v.is_finite() {
                return Err(Error::NonFinite("observable returned a non-finite value".into()));
            }
            s += v;
        }
        Ok(s / chain.len() as f64)
    };
    #[cfg(feature = "parallel")]
    let means: Vec<_> = {
        use rayon::prelude::*;
        samples.chains.par_iter().map(mean_of).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let means: Vec<_> = samples.chains.iter().map(mean_of).collect();
    means.into_iter().collect()
}

/// Mean of `observable` with the between-chain standard error.
pub fn mc_expectation(
    observable: impl Fn(&Configuration) -> Result<f64> + Sync,
    samples: &ChainSamples,
) -> Result<EstimateWithError> {
    let k = samples.chain_count();
    if k < 4 {
        return Err(Error::Sampler(format!("need at least 4 chains for a standard error, got {k}")));
    }
    let means = chain_means(observable, samples)?;
    let mean = means.iter().sum::<f64>() / k as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    Ok(EstimateWithError::monte_carlo(mean, (var / k as f64).sqrt()))
}

/// Sample and average in one call.
pub fn mc_mean(
    observable: impl Fn(&Configuration) -> Result<f64> + Sync,
    log_weight: impl Fn(&Configuration) -> Result<f64> + Sync,
    start: &Configuration,
    mc: &McConfig,
) -> Result<EstimateWithError> {
    let s = metropolis_sample(log_weight, start, mc)?;
    mc_expectation(observable, &s)
}

/// `∫_{R³} f(x) dx` by importance sampling from `p(x) = λ³/(8π) e^{-λ|x|}`.
pub fn importance_integrate_r3(
    f: impl Fn(Vec3) -> f64,
    rate: f64,
    samples: usize,
    seed: u64,
) -> Result<EstimateWithError> {
    importance_integrate(|x| f(x[0]), 1, rate, samples, seed)
}

/// `∫_{R^{3k}} f dx` with each of the `k` points drawn independently from the
/// exponential density of [`importance_integrate_r3`].
pub fn importance_integrate(
    f: impl Fn(&[Vec3]) -> f64,
    count: usize,
    rate: f64,
    samples: usize,
    seed: u64,
) -> Result<EstimateWithError> {
    if !(rate > 0.0) || samples < 2 || count == 0 {
        return Err(Error::InvalidInput(
            "importance sampler needs rate > 0, count >= 1 and >= 2 samples".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radial = Gamma::new(3.0, 1.0 / rate).map_err(|e| Error::Sampler(e.to_string()))?;
    let log_norm = (rate.powi(3) / (8.0 * std::f64::consts::PI)).ln();
    let (mut s, mut s2) = (0.0, 0.0);
    let mut points = vec![Vec3::ZERO; count];
    for _ in 0..samples {
        let mut log_p = 0.0;
        for x in points.iter_mut() {
            let r: f64 = radial.sample(&mut rng);
            let d = loop {
                let v = Vec3::new(
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                );
                let n = v.norm();
                if n > 1e-12 {
                    break v * (1.0 / n);
                }
            };
            *x = d * r;
            log_p += log_norm - rate * r;
        }
        let w = f(&points) * (-log_p).exp();
        if !w.is_finite() {
            return Err(Error::NonFinite("importance weight".into()));
        }
        s += w;
        s2 += w * w;
    }
    let n = samples as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(EstimateWithError::monte_carlo(mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SystemSpec, WavefunctionModel};

    fn one_electron(r: f64) -> Configuration {
        Configuration::new(vec![Vec3::new(0.0, 0.0, r)]).unwrap()
    }

    fn quick() -> McConfig {
        McConfig { chain_count: 8, steps_per_chain: 12_000, burn_in: 1_000, proposal_scale: 0.5, seed: 7 }
    }

    #[test]
    fn config_validation() {
        assert!(McConfig { burn_in: 100, steps_per_chain: 100, ..Default::default() }.validate().is_err());
        assert!(McConfig { proposal_scale: 0.0, ..Default::default() }.validate().is_err());
        assert!(McConfig::default().validate().is_ok());
    }

    #[test]
    fn exponential_weight_mean_radius() {
        let s = metropolis_sample(|c| Ok(-2.0 * c[0].norm()), &one_electron(1.0), &quick()).unwrap();
        let e = mc_expectation(|c| Ok(c[0].norm()), &s).unwrap();
        assert!(e.covers(1.5, 3.0), "{e:?}");
        let a = s.mean_acceptance();
        assert!(a > 0.3 && a < 0.7, "acceptance {a}");
    }

    #[test]
    fn hydrogen_density_mean_radius() {
        let m = WavefunctionModel::hydrogenic_ground(1.0).unwrap();
        let s = metropolis_sample(
            |c| Ok(2.0 * m.psi(c)?.abs().ln()),
            &one_electron(1.0),
            &McConfig { proposal_scale: 1.0, ..quick() },
        )
        .unwrap();
        let e = mc_expectation(|c| Ok(c[0].norm()), &s).unwrap();
        assert!(e.covers(3.0, 3.0), "{e:?}");
    }

    #[test]
    fn replay_is_bitwise() {
        let mc = McConfig { steps_per_chain: 600, burn_in: 100, ..quick() };
        let a = metropolis_sample(|c| Ok(-c[0].norm()), &one_electron(0.5), &mc).unwrap();
        let b = metropolis_sample(|c| Ok(-c[0].norm()), &one_electron(0.5), &mc).unwrap();
        for (x, y) in a.chains.iter().zip(&b.chains) {
            for (p, q) in x.iter().zip(y) {
                assert_eq!(p.to_flat(), q.to_flat());
            }
        }
        assert_ne!(a.chains[0][10].to_flat(), a.chains[1][10].to_flat());
    }

    #[test]
    fn constant_observable_has_zero_error() {
        let mc = McConfig { steps_per_chain: 500, burn_in: 100, ..quick() };
        let s = metropolis_sample(|c| Ok(-c[0].norm()), &one_electron(0.5), &mc).unwrap();
        let e = mc_expectation(|_| Ok(1.0), &s).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn zero_variance_local_energy() {
        let m = WavefunctionModel::hydrogenic_ground(1.0).unwrap();
        let spec = SystemSpec::atom(1.0, 1).unwrap();
        let mc = McConfig { steps_per_chain: 3_000, burn_in: 500, ..quick() };
        let s = metropolis_sample(|c| Ok(2.0 * m.psi(c)?.abs().ln()), &one_electron(1.0), &mc).unwrap();
        let e = mc_expectation(|c| m.local_energy(&spec, c), &s).unwrap();
        assert!((e.value + 0.25).abs() < 1e-12);
        assert!(e.stderr < 1e-12);
    }

    #[test]
    fn too_few_chains_for_error_bars() {
        let mc = McConfig { chain_count: 3, steps_per_chain: 200, burn_in: 10, ..quick() };
        let s = metropolis_sample(|c| Ok(-c[0].norm()), &one_electron(0.5), &mc).unwrap();
        assert!(matches!(mc_expectation(|_| Ok(1.0), &s), Err(Error::Sampler(_))));
    }

    #[test]
    fn dead_start_is_reported() {
        let r = metropolis_sample(|_| Ok(f64::NEG_INFINITY), &one_electron(0.5), &quick());
        assert!(matches!(r, Err(Error::Sampler(_))));
    }

    #[test]
    fn chains_agree_with_each_other() {
        let s = metropolis_sample(|c| Ok(-2.0 * c[0].norm()), &one_electron(1.0), &quick()).unwrap();
        let means = chain_means(|c| Ok(c[0].norm()), &s).unwrap();
        let e = mc_expectation(|c| Ok(c[0].norm()), &s).unwrap();
        let sd = e.stderr * (means.len() as f64).sqrt();
        for m in &means {
            assert!((m - e.value).abs() < 4.0 * sd);
        }
    }

    #[test]
    fn importance_sampler_integrates_exponential() {
        let e = importance_integrate_r3(|x| (-x.norm()).exp(), 1.0, 1000, 3).unwrap();
        assert!((e.value - 8.0 * std::f64::consts::PI).abs() < 1e-9);
        let e = importance_integrate_r3(|x| (-2.0 * x.norm()).exp(), 1.5, 20_000, 3).unwrap();
        assert!(e.covers(std::f64::consts::PI, 4.0), "{e:?}");
    }
}
