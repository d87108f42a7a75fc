//! `∫_{R³} g dx₂` for integrands that depend on `x₂` only through `r₂`, `r₁₂`
//! (and, for direction-dependent kernels, the angle between `x₁` and `x₂`).
//!
//! With `x₁` fixed at radius `r₁`,
//! `∫ g dx₂ = (2π/r₁) ∫₀^∞ r₂ dr₂ ∫_{|r₁-r₂|}^{r₁+r₂} r₁₂ g dr₁₂`,
//! and at `r₁ = 0` the limit `4π ∫ r₂² ⟨g⟩ dr₂` where `⟨g⟩` averages over
//! the direction of approach.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::estimate::EstimateWithError;
use super::sphere::gauss_legendre;
use crate::error::{Error, Result};

/// Geometry of one quadrature node. `cos_theta` is the cosine of the angle
/// between `x₁` and `x₂`, computed without cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPoint {
    pub r1: f64,
    pub r2: f64,
    pub r12: f64,
    pub cos_theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedQuadrature {
    /// Gauss-Legendre nodes per r₂ panel.
    pub outer_nodes: usize,
    /// Gauss-Legendre nodes for the r₁₂ (or angular) integral.
    pub inner_nodes: usize,
    /// Slowest expected decay rate of the integrand in r₂; sets panel widths.
    pub decay_rate: f64,
    /// Largest allowed relative contribution of the semi-infinite tail panel.
    pub tail_tolerance: f64,
}

impl Default for ReducedQuadrature {
    fn default() -> Self {
        Self { outer_nodes: 64, inner_nodes: 64, decay_rate: 1.0, tail_tolerance: 1e-10 }
    }
}

impl ReducedQuadrature {
    pub fn with_decay_rate(mut self, decay_rate: f64) -> Self {
        self.decay_rate = decay_rate;
        self
    }
}

const PANEL_COUNT: usize = 6;

struct Pass<const K: usize> {
    value: [f64; K],
    abs_sum: [f64; K],
    tail: [f64; K],
    evals: usize,
}

fn unit_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_legendre(n)
}

fn one_pass<const K: usize>(
    g: &impl Fn(&ReducedPoint) -> [f64; K],
    r1: f64,
    n_out: usize,
    n_in: usize,
    kappa: f64,
) -> Pass<K> {
    let (xo, wo) = unit_rule(n_out);
    let (xi, wi) = unit_rule(n_in);
    let mut pass = Pass { value: [0.0; K], abs_sum: [0.0; K], tail: [0.0; K], evals: 0 };

    // Contribution of one outer node with outer weight `w` (already includes dr₂ Jacobian).
    let node = |r2: f64, w: f64, is_tail: bool, pass: &mut Pass<K>| {
        let mut inner = [0.0; K];
        let prefactor;
        if r1 == 0.0 {
            for (t, wt) in xi.iter().zip(&wi) {
                let p = ReducedPoint { r1: 0.0, r2, r12: r2, cos_theta: *t };
                let v = g(&p);
                for k in 0..K {
                    inner[k] += wt * v[k];
                }
            }
            prefactor = 4.0 * PI * r2 * r2 * 0.5 * w;
        } else {
            let lo = (r1 - r2).abs();
            let half = r1.min(r2);
            let big = r1.max(r2);
            for (t, wt) in xi.iter().zip(&wi) {
                let s = 1.0 + t;
                let r12 = lo + half * s;
                // 1 - cosθ = (r12 - lo)(r12 + lo) / (2 r1 r2) with half/min(r1,r2) = 1
                let cos_theta = 1.0 - s * (r12 + lo) / (2.0 * big);
                let p = ReducedPoint { r1, r2, r12, cos_theta };
                let v = g(&p);
                for k in 0..K {
                    inner[k] += wt * r12 * v[k];
                }
            }
            prefactor = 2.0 * PI / r1 * r2 * half * w;
        }
        pass.evals += n_in;
        for k in 0..K {
            let c = prefactor * inner[k];
            pass.value[k] += c;
            pass.abs_sum[k] += c.abs();
            if is_tail {
                pass.tail[k] += c;
            }
        }
    };

    let mut edges = Vec::with_capacity(PANEL_COUNT + 2);
    edges.push(0.0);
    if r1 > 0.0 {
        edges.push(r1);
    }
    let mut width = 1.0 / kappa;
    for _ in 0..PANEL_COUNT {
        let last = *edges.last().unwrap();
        edges.push(last + width);
        width *= 2.0;
    }
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (mid, hw) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in xo.iter().zip(&wo) {
            node(mid + hw * x, hw * w, false, &mut pass);
        }
    }
    // [R, ∞) with r₂ = R - ln(t)/κ, t ∈ (0, 1)
    let start = *edges.last().unwrap();
    for (x, w) in xo.iter().zip(&wo) {
        let t = 0.5 * (1.0 + x);
        let r2 = start - t.ln() / kappa;
        node(r2, 0.5 * w / (kappa * t), true, &mut pass);
    }
    pass
}

/// Vector-valued kernel: all components share the quadrature nodes.
pub fn reduced_two_electron_integral_vec<const K: usize>(
    g: impl Fn(&ReducedPoint) -> [f64; K],
    r1: f64,
    q: &ReducedQuadrature,
) -> Result<[EstimateWithError; K]> {
    if !(r1 >= 0.0 && r1.is_finite()) {
        return Err(Error::InvalidInput(format!("r1 must be finite and >= 0, got {r1}")));
    }
    if !(q.decay_rate > 0.0) || q.outer_nodes < 4 || q.inner_nodes < 4 {
        return Err(Error::InvalidInput("reduced quadrature parameters out of range".into()));
    }
    let hi = one_pass(&g, r1, q.outer_nodes, q.inner_nodes, q.decay_rate);
    let lo = one_pass(&g, r1, q.outer_nodes / 2, q.inner_nodes / 2, q.decay_rate);
    let mut out = [EstimateWithError::quadrature(0.0, 0.0); K];
    for k in 0..K {
        if !hi.value[k].is_finite() {
            return Err(Error::NonFinite(format!("reduced integral component {k} at r1 = {r1}")));
        }
        if hi.tail[k].abs() > q.tail_tolerance * hi.abs_sum[k] {
            return Err(Error::NonConvergentTail { tail: hi.tail[k], total: hi.value[k] });
        }
        let roundoff = hi.evals as f64 * f64::EPSILON * hi.abs_sum[k];
        let truncation = (hi.value[k] - lo.value[k]).abs();
        out[k] = EstimateWithError::quadrature(hi.value[k], truncation.max(roundoff));
    }
    Ok(out)
}

pub fn reduced_two_electron_integral(
    g: impl Fn(&ReducedPoint) -> f64,
    r1: f64,
    q: &ReducedQuadrature,
) -> Result<EstimateWithError> {
    let [e] = reduced_two_electron_integral_vec(|p| [g(p)], r1, q)?;
    Ok(e)
}
