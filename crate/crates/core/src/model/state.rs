use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use super::grid::Grid1D;
use super::params::LdParameters;
use crate::error::{LdError, Result};

/// Reduced coordinates δ_1..δ_N of the degenerate r = 0 manifold, each stored in [0, 2π).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub delta: Vec<f64>,
}

impl PhaseConfig {
    pub fn new(delta: Vec<f64>) -> Self {
        Self {
            delta: delta.into_iter().map(wrap_phase).collect(),
        }
    }

    pub fn uniform(n: usize, value: f64) -> Self {
        Self::new(vec![value; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::uniform(n, 0.0)
    }

    /// Configuration with δ_n = π exactly where bit n-1 of `mask` is set.
    pub fn from_mask(n: usize, mask: usize) -> Self {
        Self::new((0..n).map(|j| if mask >> j & 1 == 1 { PI } else { 0.0 }).collect())
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    /// Plane phase offsets α_n = δ_1 + ... + δ_n, with α_0 = 0.
    pub fn offsets(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        let mut acc = 0.0;
        for d in &self.delta {
            acc += d;
            out.push(acc);
        }
        out
    }

    /// Largest circular distance between corresponding entries.
    pub fn circular_distance(&self, other: &Self) -> f64 {
        self.delta
            .iter()
            .zip(&other.delta)
            .map(|(a, b)| wrap_signed(a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Snaps each entry to the nearer of {0, π}.
    pub fn nearest_binary(&self) -> Self {
        Self::new(
            self.delta
                .iter()
                .map(|&d| if wrap_signed(d).abs() <= PI / 2.0 { 0.0 } else { PI })
                .collect(),
        )
    }
}

/// Maps an angle to [0, 2π).
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y >= TAU {
        0.0
    } else {
        y
    }
}

/// Maps an angle to (-π, π].
pub fn wrap_signed(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Discrete configuration in the layered gauge (A_z ≡ 0).
///
/// `f` and `phi` live on nodes (shape (N+1)×(M+1)), `a` on midpoints (shape (N+1)×M).
/// When `gauge_fixed` holds, `phi` row 0 is identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredState {
    pub f: Array2<f64>,
    pub phi: Array2<f64>,
    pub a: Array2<f64>,
    pub gauge_fixed: bool,
}

impl LayeredState {
    pub fn planes(&self) -> usize {
        self.f.nrows()
    }

    pub fn gaps(&self) -> usize {
        self.f.nrows() - 1
    }

    pub fn intervals(&self) -> usize {
        self.a.ncols()
    }

    pub fn check_shape(&self, params: &LdParameters, grid: &Grid1D) -> Result<()> {
        let np = params.planes();
        let m = grid.intervals;
        let ok = self.f.dim() == (np, m + 1) && self.phi.dim() == (np, m + 1) && self.a.dim() == (np, m);
        if ok {
            Ok(())
        } else {
            Err(LdError::ShapeMismatch(format!(
                "state f{:?} phi{:?} a{:?} vs N+1={np}, M={m}",
                self.f.dim(),
                self.phi.dim(),
                self.a.dim()
            )))
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        let bad = self.f.iter().chain(self.phi.iter()).chain(self.a.iter()).any(|v| !v.is_finite());
        if bad {
            Err(LdError::NonFinite("state".into()))
        } else {
            Ok(())
        }
    }

    /// Applies the residual gauge that zeroes phi on plane 0.
    pub fn gauge_fixed(&self, grid: &Grid1D) -> Self {
        let chi: Vec<f64> = self.phi.row(0).to_vec();
        let mut out = gauge_transform(self, &chi, grid);
        out.phi.row_mut(0).fill(0.0);
        out.gauge_fixed = true;
        out
    }

    pub fn min_amplitude(&self) -> f64 {
        self.f.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_amplitude(&self) -> f64 {
        self.f.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// φ_n ↦ φ_n − χ, a_n ↦ a_n − Δχ/dx on every plane.
pub fn gauge_transform(state: &LayeredState, chi: &[f64], grid: &Grid1D) -> LayeredState {
    let mut out = state.clone();
    let m = grid.intervals;
    for mut row in out.phi.rows_mut() {
        for i in 0..=m {
            row[i] -= chi[i];
        }
    }
    for mut row in out.a.rows_mut() {
        for k in 0..m {
            row[k] -= (chi[k + 1] - chi[k]) / grid.dx;
        }
    }
    out.gauge_fixed = out.phi.row(0).iter().all(|&v| v == 0.0);
    out
}

/// Exact r = 0 minimizer with phase differences δ: f ≡ 1, a_n = npH, φ_n = α_n + npHx.
pub fn zero_coupling_minimizer(params: &LdParameters, grid: &Grid1D, delta: &PhaseConfig) -> LayeredState {
    let np = params.planes();
    let m = grid.intervals;
    assert_eq!(delta.len(), params.num_gaps, "one phase per gap");
    let hp = params.hp();
    let alpha = delta.offsets();
    let f = Array2::from_elem((np, m + 1), 1.0);
    let phi = Array2::from_shape_fn((np, m + 1), |(n, i)| {
        if n == 0 {
            0.0
        } else {
            alpha[n] + n as f64 * hp * grid.node(i)
        }
    });
    let a = Array2::from_shape_fn((np, m), |(n, _)| n as f64 * hp);
    LayeredState {
        f,
        phi,
        a,
        gauge_fixed: true,
    }
}

/// Layered-gauge image of ψ_n = exp(inpHx), A = (Hz, 0).
pub fn uniform_field_state(params: &LdParameters, grid: &Grid1D) -> LayeredState {
    zero_coupling_minimizer(params, grid, &PhaseConfig::zeros(params.num_gaps))
}

/// Smooth random profile on the nodes with values in [-1, 1].
fn smooth_profile<R: Rng>(rng: &mut R, grid: &Grid1D) -> Vec<f64> {
    let modes = 4;
    let coeffs: Vec<(f64, f64)> = (0..modes)
        .map(|k| {
            let s = 1.0 / (k as f64 + 1.0);
            (s * rng.gen_range(-1.0..1.0), rng.gen_range(0.0..TAU))
        })
        .collect();
    let total: f64 = coeffs.iter().map(|c| c.0.abs()).sum::<f64>().max(1e-12);
    (0..=grid.intervals)
        .map(|i| {
            let t = (grid.node(i) + grid.half_width) / (2.0 * grid.half_width);
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &(c, ph))| c * (PI * (k as f64 + 1.0) * t + ph).cos())
                .sum::<f64>()
                / total
        })
        .collect()
}

/// Smooth random start near the degenerate manifold: f in [0.8, 1.2], plane phases uniform
/// on the circle, gauge field a small perturbation of the uniform-field profile.
pub fn random_start<R: Rng>(params: &LdParameters, grid: &Grid1D, rng: &mut R) -> LayeredState {
    let np = params.planes();
    let m = grid.intervals;
    let hp = params.hp();
    let mut st = uniform_field_state(params, grid);
    for n in 0..np {
        let fp = smooth_profile(rng, grid);
        let pp = smooth_profile(rng, grid);
        let ap = smooth_profile(rng, grid);
        let alpha = if n == 0 { 0.0 } else { rng.gen_range(0.0..TAU) };
        for i in 0..=m {
            st.f[[n, i]] = 1.0 + 0.2 * fp[i];
            if n > 0 {
                st.phi[[n, i]] += alpha + 0.3 * pp[i];
            }
        }
        for k in 0..m {
            st.a[[n, k]] += 0.1 * (1.0 + hp) * 0.5 * (ap[k] + ap[k + 1]);
        }
    }
    st
}

/// Rough random state for derivative checks: nodewise independent values.
pub fn random_rough_state<R: Rng>(params: &LdParameters, grid: &Grid1D, rng: &mut R) -> LayeredState {
    let np = params.planes();
    let m = grid.intervals;
    let f = Array2::from_shape_fn((np, m + 1), |_| rng.gen_range(0.5..1.5));
    let phi = Array2::from_shape_fn((np, m + 1), |(n, _)| if n == 0 { 0.0 } else { rng.gen_range(-PI..PI) });
    let a = Array2::from_shape_fn((np, m), |_| rng.gen_range(-2.0..2.0));
    LayeredState {
        f,
        phi,
        a,
        gauge_fixed: true,
    }
}
