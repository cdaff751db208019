use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::grid::Grid1D;
use super::params::LdParameters;
use super::state::{wrap_signed, LayeredState};
use crate::error::{LdError, Result};

/// Gauge-invariant fields of a configuration.
///
/// Plane quantities (`f`, `V`, `jx`) have N+1 rows; gap quantities (`Phi`, `h`, `jz`) have N
/// rows, row `g` holding gap g+1 (between planes g and g+1). `f` and `Phi` are nodal, the rest
/// live on midpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct Observables {
    pub f: Array2<f64>,
    pub V: Array2<f64>,
    pub Phi: Array2<f64>,
    pub h: Array2<f64>,
    pub jx: Array2<f64>,
    pub jz: Array2<f64>,
}

impl Observables {
    pub fn planes(&self) -> usize {
        self.f.nrows()
    }

    pub fn gaps(&self) -> usize {
        self.Phi.nrows()
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.f.dim() == other.f.dim()
            && self.V.dim() == other.V.dim()
            && self.Phi.dim() == other.Phi.dim()
            && self.h.dim() == other.h.dim()
            && self.jx.dim() == other.jx.dim()
            && self.jz.dim() == other.jz.dim()
    }
}

/// Computes all observables of a state.
pub fn observables(state: &LayeredState, params: &LdParameters, grid: &Grid1D) -> Result<Observables> {
    state.check_shape(params, grid)?;
    let np = params.planes();
    let ng = params.num_gaps;
    let m = grid.intervals;
    let dx = grid.dx;
    let p = params.spacing;
    let jc = 0.5 * params.coupling * params.kappa * params.kappa * p;
    let fbar = |n: usize, k: usize| 0.5 * (state.f[[n, k]] + state.f[[n, k + 1]]);

    let v = Array2::from_shape_fn((np, m), |(n, k)| {
        (state.phi[[n, k + 1]] - state.phi[[n, k]]) / dx - state.a[[n, k]]
    });
    let jx = Array2::from_shape_fn((np, m), |(n, k)| {
        let fb = fbar(n, k);
        v[[n, k]] * fb * fb
    });
    let phi_diff = Array2::from_shape_fn((ng, m + 1), |(g, i)| state.phi[[g + 1, i]] - state.phi[[g, i]]);
    let h = Array2::from_shape_fn((ng, m), |(g, k)| (state.a[[g + 1, k]] - state.a[[g, k]]) / p);
    let jz = Array2::from_shape_fn((ng, m), |(g, k)| {
        let mid = 0.5 * (phi_diff[[g, k]] + phi_diff[[g, k + 1]]);
        jc * fbar(g + 1, k) * fbar(g, k) * mid.sin()
    });
    Ok(Observables {
        f: state.f.clone(),
        V: v,
        Phi: phi_diff,
        h,
        jx,
        jz,
    })
}

fn sup_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Sup-norm distance over all observable fields; phase differences compared modulo 2π.
pub fn distance(a: &Observables, b: &Observables) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(LdError::ShapeMismatch("observables differ in shape".into()));
    }
    let phase = a
        .Phi
        .iter()
        .zip(b.Phi.iter())
        .map(|(x, y)| wrap_signed(x - y).abs())
        .fold(0.0, f64::max);
    Ok([
        sup_diff(&a.f, &b.f),
        sup_diff(&a.V, &b.V),
        phase,
        sup_diff(&a.h, &b.h),
        sup_diff(&a.jx, &b.jx),
        sup_diff(&a.jz, &b.jz),
    ]
    .into_iter()
    .fold(0.0, f64::max))
}

/// h(x, z) sampled piecewise constant in z: `values[row][k]` at `z[row]`, `x[k]` (midpoints).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMap2D {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// Extends each gap field h^(n)(x) uniformly across its gap.
pub fn lift_field_2d(obs: &Observables, params: &LdParameters, grid: &Grid1D, nz_per_gap: usize) -> Result<FieldMap2D> {
    if nz_per_gap == 0 {
        return Err(LdError::InvalidParameters("nz_per_gap must be >= 1".into()));
    }
    let p = params.spacing;
    let mut z = Vec::new();
    let mut values = Vec::new();
    for g in 0..obs.gaps() {
        for j in 0..nz_per_gap {
            z.push(p * (g as f64 + (j as f64 + 0.5) / nz_per_gap as f64));
            values.push(obs.h.row(g).to_vec());
        }
    }
    Ok(FieldMap2D {
        x: grid.midpoints(),
        z,
        values,
    })
}

/// Circular mean over x (trapezoid weights) of Φ_{n,n−1}(x) − Hpx per gap, in [0, 2π).
pub fn circular_phase_offsets(obs: &Observables, params: &LdParameters, grid: &Grid1D) -> Vec<f64> {
    let hp = params.hp();
    (0..obs.gaps())
        .map(|g| {
            let (mut s, mut c) = (0.0, 0.0);
            for i in 0..=grid.intervals {
                let t = obs.Phi[[g, i]] - hp * grid.node(i);
                let w = grid.weight(i);
                s += w * t.sin();
                c += w * t.cos();
            }
            super::state::wrap_phase(s.atan2(c))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::state::{uniform_field_state, zero_coupling_minimizer, PhaseConfig};
    use std::f64::consts::PI;

    #[test]
    fn uniform_state_observables() {
        let p = LdParameters::desk();
        let g = Grid1D::new(1.0, 40).unwrap();
        let obs = observables(&uniform_field_state(&p, &g), &p, &g).unwrap();
        assert!(obs.V.iter().all(|v| v.abs() < 1e-12));
        assert!(obs.jx.iter().all(|v| v.abs() < 1e-12));
        assert!(obs.h.iter().all(|v| (v - 3.0).abs() < 1e-12));
        for i in 0..=40 {
            assert!((obs.Phi[[0, i]] - 1.5 * g.node(i)).abs() < 1e-13);
        }
    }

    #[test]
    fn distinct_phases_are_far_apart() {
        let p = LdParameters::desk().with_gaps(1);
        let g = Grid1D::new(1.0, 40).unwrap();
        let a = observables(&zero_coupling_minimizer(&p, &g, &PhaseConfig::zeros(1)), &p, &g).unwrap();
        let b = observables(&zero_coupling_minimizer(&p, &g, &PhaseConfig::uniform(1, PI)), &p, &g).unwrap();
        assert_eq!(distance(&a, &a).unwrap(), 0.0);
        let d = distance(&a, &b).unwrap();
        assert!(d > 1.0 && (d - distance(&b, &a).unwrap()).abs() == 0.0);
    }

    #[test]
    fn lift_shape_and_constancy() {
        let p = LdParameters::desk().with_coupling(0.0);
        let g = Grid1D::new(1.0, 20).unwrap();
        let obs = observables(&uniform_field_state(&p, &g), &p, &g).unwrap();
        let map = lift_field_2d(&obs, &p, &g, 3).unwrap();
        assert_eq!(map.values.len(), 6);
        assert!(map.values.iter().flatten().all(|&h| (h - 3.0).abs() < 1e-12));
    }
}
