//! Splitting `ρ̃ = e^{-Zr}(ρ̃(0) + βr² + η̃)` near the nucleus.

use serde::{Deserialize, Serialize};

use super::profile::{DensityProfile, HProfile};
use crate::error::{Error, Result};
use crate::integration::EstimateWithError;

/// Stencil width for `η̃'` on the radial grid.
pub const ETA_STENCIL: usize = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureDecomposition {
    pub z: f64,
    /// `⅓(h̃(0) - (Z²/2) ρ̃(0))`.
    pub beta: EstimateWithError,
    /// `Z² ρ̃(0) + 2β`.
    pub rho_tilde_second_at_0: EstimateWithError,
    /// `⅔(h̃(0) + Z² ρ̃(0))`, the same quantity rearranged.
    pub rho_tilde_second_from_h: f64,
    /// `e^{Zr} ρ̃ - ρ̃(0)`.
    pub mu_tilde: Vec<f64>,
    /// `μ̃ - βr²`.
    pub eta_tilde: Vec<f64>,
    pub eta_tilde_prime: Vec<f64>,
    /// `e^{Zr} h̃ - (Z²/2) ρ̃ e^{Zr} - 3β + 2Zβr + Z η̃'`, equal to `½Δη̃`.
    pub g: Vec<f64>,
}

pub fn curvature_decomposition(p: &DensityProfile, hp: &HProfile, z: f64) -> Result<CurvatureDecomposition> {
    if p.grid != hp.grid || p.rho_tilde.len() != hp.h_tilde.len() {
        return Err(Error::GridMismatch);
    }
    if !(z > 0.0) {
        return Err(Error::InvalidInput(format!("Z must be positive, got {z}")));
    }
    let grid = &p.grid;
    let r0 = p.rho_tilde_0;
    let h0 = hp.h_tilde_0;
    let z2 = z * z;
    let beta = EstimateWithError::quadrature(
        (h0.value - 0.5 * z2 * r0.value) / 3.0,
        (h0.stderr + 0.5 * z2 * r0.stderr) / 3.0,
    );
    let second = EstimateWithError::quadrature(
        z2 * r0.value + 2.0 * beta.value,
        z2 * r0.stderr + 2.0 * beta.stderr,
    );
    let from_h = 2.0 / 3.0 * (h0.value + z2 * r0.value);

    let mut mu = Vec::with_capacity(grid.len());
    let mut eta = Vec::with_capacity(grid.len());
    for (r, rho) in grid.nodes.iter().zip(&p.rho_tilde) {
        let m = (z * r).exp() * rho.value - r0.value;
        mu.push(m);
        eta.push(m - beta.value * r * r);
    }
    let eta_prime = (0..grid.len())
        .map(|i| grid.derivative(&eta, i, 1, ETA_STENCIL))
        .collect::<Result<Vec<_>>>()?;
    let g = grid
        .nodes
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let e = (z * r).exp();
            e * hp.h_tilde[i].value - 0.5 * z2 * p.rho_tilde[i].value * e - 3.0 * beta.value
                + 2.0 * z * beta.value * r
                + z * eta_prime[i]
        })
        .collect();
    Ok(CurvatureDecomposition {
        z,
        beta,
        rho_tilde_second_at_0: second,
        rho_tilde_second_from_h: from_h,
        mu_tilde: mu,
        eta_tilde: eta,
        eta_tilde_prime: eta_prime,
        g,
    })
}
