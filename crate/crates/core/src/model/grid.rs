use serde::{Deserialize, Serialize};

use super::params::LdParameters;
use crate::error::{LdError, Result};

/// Minimum number of intervals of any grid.
pub const MIN_INTERVALS: usize = 16;

/// Uniform staggered grid on [-L, L]: nodes `x_i = -L + i dx`, midpoints between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub half_width: f64,
    pub intervals: usize,
    pub dx: f64,
}

impl Grid1D {
    pub fn new(half_width: f64, intervals: usize) -> Result<Self> {
        if intervals < MIN_INTERVALS {
            return Err(LdError::InvalidParameters(format!(
                "grid needs at least {MIN_INTERVALS} intervals, got {intervals}"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(LdError::InvalidParameters("L must be positive".into()));
        }
        Ok(Self {
            half_width,
            intervals,
            dx: 2.0 * half_width / intervals as f64,
        })
    }

    /// Default resolution: dx = min(1/κ, 1/(Hp))/10.
    pub fn default_dx(params: &LdParameters) -> f64 {
        (1.0 / params.kappa).min(1.0 / params.hp()) / 10.0
    }

    /// Grid with spacing at most `dx` (or the default rule), an even interval count and M ≥ 16.
    pub fn for_params(params: &LdParameters, dx: Option<f64>) -> Result<Self> {
        let target = dx.unwrap_or_else(|| Self::default_dx(params));
        if !(target > 0.0 && target.is_finite()) {
            return Err(LdError::InvalidParameters("dx must be positive".into()));
        }
        let mut m = (2.0 * params.half_width / target - 1e-9).ceil().max(1.0) as usize;
        m = m.max(MIN_INTERVALS);
        m += m % 2;
        Self::new(params.half_width, m)
    }

    pub fn nodes_len(&self) -> usize {
        self.intervals + 1
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx
    }

    pub fn midpoint(&self, k: usize) -> f64 {
        -self.half_width + (k as f64 + 0.5) * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.intervals).map(|i| self.node(i)).collect()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.intervals).map(|k| self.midpoint(k)).collect()
    }

    /// Trapezoid weight of node i (dx/2 at the ends, dx inside).
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.intervals {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..=self.intervals).map(|i| self.weight(i)).collect()
    }

    /// Same domain, half the spacing.
    pub fn refined(&self) -> Self {
        Self::new(self.half_width, 2 * self.intervals).expect("refinement of a valid grid")
    }
}

/// Linear interpolation of midpoint samples onto nodes, with linear extrapolation at both ends.
pub fn midpoints_to_nodes(mid: &[f64]) -> Vec<f64> {
    let m = mid.len();
    let mut out = Vec::with_capacity(m + 1);
    out.push(1.5 * mid[0] - 0.5 * mid[1]);
    for k in 1..m {
        out.push(0.5 * (mid[k - 1] + mid[k]));
    }
    out.push(1.5 * mid[m - 1] - 0.5 * mid[m - 2]);
    out
}

/// Inverse of [`midpoints_to_nodes`].
pub fn nodes_to_midpoints(nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len() - 1;
    let mut mid = Vec::with_capacity(m);
    mid.push(0.5 * (nodes[0] + nodes[1]));
    for i in 1..m {
        let prev = mid[i - 1];
        mid.push(2.0 * nodes[i] - prev);
    }
    mid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rule_resolves_both_scales() {
        let p = LdParameters::desk();
        let g = Grid1D::for_params(&p, None).unwrap();
        assert!(g.dx <= Grid1D::default_dx(&p) + 1e-15);
        assert!(g.intervals >= MIN_INTERVALS);
        assert_eq!(g.intervals % 2, 0);
        assert!((g.node(g.intervals) - p.half_width).abs() < 1e-14);
    }

    #[test]
    fn override_dx() {
        let g = Grid1D::for_params(&LdParameters::desk(), Some(1.0 / 30.0)).unwrap();
        assert_eq!(g.intervals, 60);
    }

    #[test]
    fn weights_sum_to_length() {
        let g = Grid1D::new(1.5, 20).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 3.0).abs() < 1e-13);
    }

    #[test]
    fn interpolation_roundtrip() {
        let mid: Vec<f64> = (0..20).map(|k| (k as f64 * 0.3).sin() + 2.0).collect();
        let back = nodes_to_midpoints(&midpoints_to_nodes(&mid));
        for (a, b) in mid.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
