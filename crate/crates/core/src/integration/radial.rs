use serde::{Deserialize, Serialize};

use super::fit::fornberg_weights;
use super::sphere::gauss_legendre;
use crate::error::{Error, Result};

/// Radial nodes starting at r = 0.
///
/// The default layout is `r_i = a (e^{i t} - 1)`: uniform spacing `≈ first_step`
/// near the nucleus, geometric growth further out, and a smooth node map so
/// that finite-difference stencils on the grid stay well conditioned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub r_max: f64,
}

impl RadialGrid {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidInput("radial grid needs at least 2 nodes".into()));
        }
        if nodes[0] < 0.0 || !nodes.iter().all(|r| r.is_finite()) {
            return Err(Error::InvalidInput("radial nodes must be finite and nonnegative".into()));
        }
        if !nodes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput("radial nodes must be strictly increasing".into()));
        }
        let r_max = *nodes.last().unwrap();
        Ok(Self { nodes, r_max })
    }

    /// `count` nodes from 0 to `r_max` with first spacing `first_step`.
    pub fn mapped_geometric(first_step: f64, r_max: f64, count: usize) -> Result<Self> {
        if !(first_step > 0.0 && r_max > first_step) {
            return Err(Error::InvalidInput(format!(
                "grid needs 0 < first_step < r_max, got {first_step}, {r_max}"
            )));
        }
        if count < 3 {
            return Err(Error::InvalidInput("grid needs at least 3 nodes".into()));
        }
        let m = (count - 1) as f64;
        let target = r_max / first_step;
        if target <= m {
            // uniform spacing already reaches r_max
            return Self::from_nodes((0..count).map(|i| r_max * i as f64 / m).collect());
        }
        // solve (e^{m t} - 1) / (e^t - 1) = target for t > 0
        let ratio = |t: f64| (m * t).exp_m1() / t.exp_m1();
        let (mut lo, mut hi) = (1e-12, 1.0);
        while ratio(hi) < target {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ratio(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let a = first_step / t.exp_m1();
        let mut nodes: Vec<f64> = (0..count).map(|i| a * (i as f64 * t).exp_m1()).collect();
        nodes[count - 1] = r_max;
        Self::from_nodes(nodes)
    }

    /// 400 nodes, first step 1e-4, extent 20/Z.
    pub fn default_for(z: f64) -> Result<Self> {
        Self::mapped_geometric(1e-4, 20.0 / z, 400)
    }

    /// Extent is long enough for a profile decaying like `e^{-γ r}`.
    pub fn covers_decay(&self, gamma: f64) -> bool {
        self.r_max >= 10.0 / gamma
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the node nearest to `r`.
    pub fn nearest(&self, r: f64) -> usize {
        match self.nodes.binary_search_by(|v| v.partial_cmp(&r).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.nodes.len() => self.nodes.len() - 1,
            Err(i) => {
                if r - self.nodes[i - 1] < self.nodes[i] - r {
                    i - 1
                } else {
                    i
                }
            }
        }
    }

    /// Indices of a `width`-point stencil around node `i`, clamped to the grid.
    pub fn stencil(&self, i: usize, width: usize) -> std::ops::Range<usize> {
        let n = self.nodes.len();
        let width = width.min(n);
        let start = i.saturating_sub(width / 2).min(n - width);
        start..start + width
    }

    /// Weights `w_i` with `Σ w_i f(r_i) ≈ ∫_0^{r_max} f dr`, from piecewise
    /// quintic interpolation on six neighbouring nodes.
    pub fn integration_weights(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let p = n.min(6);
        let mut w = vec![0.0; n];
        let (gx, gw) = gauss_legendre(4);
        for k in 0..n - 1 {
            let (a, b) = (self.nodes[k], self.nodes[k + 1]);
            let s = (k + 1).saturating_sub(p / 2).min(n - p);
            let x = &self.nodes[s..s + p];
            for (t, wt) in gx.iter().zip(&gw) {
                let y = 0.5 * (a + b) + 0.5 * (b - a) * t;
                for j in 0..p {
                    let mut l = 1.0;
                    for m in 0..p {
                        if m != j {
                            l *= (y - x[m]) / (x[j] - x[m]);
                        }
                    }
                    w[s + j] += 0.5 * (b - a) * wt * l;
                }
            }
        }
        w
    }

    /// Derivative of order `order` of tabulated `values` at node `i`, from a
    /// `width`-point stencil (one-sided near the ends).
    pub fn derivative(&self, values: &[f64], i: usize, order: usize, width: usize) -> Result<f64> {
        if values.len() != self.nodes.len() {
            return Err(Error::GridMismatch);
        }
        if width <= order || width > self.nodes.len() {
            return Err(Error::InvalidInput(format!(
                "stencil width {width} cannot resolve derivative order {order}"
            )));
        }
        let idx = self.stencil(i, width);
        let w = fornberg_weights(self.nodes[i], &self.nodes[idx.clone()], order);
        Ok(w[order].iter().zip(&values[idx]).map(|(a, b)| a * b).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_grid_shape() {
        let g = RadialGrid::default_for(2.0).unwrap();
        assert_eq!(g.len(), 400);
        assert_eq!(g.nodes[0], 0.0);
        assert_relative_eq!(g.nodes[1], 1e-4, max_relative = 1e-9);
        assert_eq!(g.r_max, 10.0);
        assert!(g.covers_decay(1.0));
        assert!(!g.covers_decay(0.5));
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(RadialGrid::from_nodes(vec![0.0, 0.0, 1.0]).is_err());
        assert!(RadialGrid::from_nodes(vec![-1.0, 1.0]).is_err());
        assert!(RadialGrid::mapped_geometric(1.0, 0.5, 10).is_err());
    }

    #[test]
    fn stencil_clamps() {
        let g = RadialGrid::mapped_geometric(0.01, 1.0, 20).unwrap();
        assert_eq!(g.stencil(0, 7), 0..7);
        assert_eq!(g.stencil(19, 7), 13..20);
        assert_eq!(g.stencil(10, 7), 7..14);
        assert_eq!(g.nearest(g.nodes[5] + 1e-9), 5);
    }

    #[test]
    fn integration_weights_are_accurate() {
        let g = RadialGrid::default_for(1.0).unwrap();
        let w = g.integration_weights();
        let f: f64 = g.nodes.iter().zip(&w).map(|(r, w)| w * r * r * (-r).exp()).sum();
        // ∫_0^20 r² e^{-r} dr = 2 - 442 e^{-20}
        assert_relative_eq!(f, 2.0 - 442.0 * (-20f64).exp(), max_relative = 1e-9);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, g.r_max, max_relative = 1e-13);
    }

    #[test]
    fn tabulated_derivatives() {
        let g = RadialGrid::default_for(2.0).unwrap();
        let v: Vec<f64> = g.nodes.iter().map(|r| (-2.0 * r).exp()).collect();
        assert_relative_eq!(g.derivative(&v, 0, 1, 7).unwrap(), -2.0, max_relative = 1e-9);
        let i = g.nearest(1.0);
        let r = g.nodes[i];
        assert_relative_eq!(g.derivative(&v, i, 2, 9).unwrap(), 4.0 * (-2.0 * r).exp(), max_relative = 1e-6);
        assert!(matches!(g.derivative(&v[1..], 0, 1, 7), Err(Error::GridMismatch)));
    }
}
