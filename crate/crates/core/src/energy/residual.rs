//! Residuals of the continuous Euler–Lagrange system evaluated on a discrete state.
//!
//! The equations are sampled with ordinary centred differences rather than with the
//! variational stencil, so at a discrete critical point they are small but not exactly zero.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{observables, Grid1D, LayeredState, LdParameters};

/// Sup-norms per equation family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElResidual {
    /// Amplitude equations at interior nodes.
    pub amplitude: f64,
    /// dh/dx − (rκ²p/2) f_n f_{n−1} sin Φ at interior nodes.
    pub field_gradient: f64,
    /// Current conservation in each plane at interior nodes.
    pub current: f64,
    /// Jump of h across each plane, including the top/bottom relations with the H offset.
    pub jump: f64,
    /// Φ′ − (V_n − V_{n−1}) − p h on every interval.
    pub stokes: f64,
    /// f′(±L), second-order one-sided.
    pub boundary_amplitude: f64,
    /// j_x(±L), extrapolated from midpoints.
    pub boundary_current: f64,
    /// h(±L) − H, extrapolated from midpoints.
    pub boundary_field: f64,
}

impl ElResidual {
    pub fn max(&self) -> f64 {
        [
            self.amplitude,
            self.field_gradient,
            self.current,
            self.jump,
            self.stokes,
            self.boundary_amplitude,
            self.boundary_current,
            self.boundary_field,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn edge(mid: &[f64]) -> (f64, f64) {
    let m = mid.len();
    (1.5 * mid[0] - 0.5 * mid[1], 1.5 * mid[m - 1] - 0.5 * mid[m - 2])
}

/// Evaluates every residual family.
pub fn el_residual(state: &LayeredState, params: &LdParameters, grid: &Grid1D) -> Result<ElResidual> {
    let obs = observables(state, params, grid)?;
    let np = params.planes();
    let ng = params.num_gaps;
    let m = grid.intervals;
    let dx = grid.dx;
    let p = params.spacing;
    let k2 = params.kappa * params.kappa;
    let r = params.coupling;
    let f = &state.f;
    let phi_d = &obs.Phi;
    let mut res = ElResidual {
        amplitude: 0.0,
        field_gradient: 0.0,
        current: 0.0,
        jump: 0.0,
        stokes: 0.0,
        boundary_amplitude: 0.0,
        boundary_current: 0.0,
        boundary_field: 0.0,
    };
    let up = |r: &mut f64, v: f64| *r = r.max(v.abs());

    for n in 0..np {
        for i in 1..m {
            let fi = f[[n, i]];
            let lap = (f[[n, i + 1]] - 2.0 * fi + f[[n, i - 1]]) / (dx * dx);
            let v = 0.5 * (obs.V[[n, i - 1]] + obs.V[[n, i]]);
            let mut rhs = 0.0;
            if n > 0 {
                rhs += f[[n - 1, i]] * phi_d[[n - 1, i]].cos() - fi;
            }
            if n < ng {
                rhs += f[[n + 1, i]] * phi_d[[n, i]].cos() - fi;
            }
            let lhs = -lap / k2 + (fi * fi - 1.0) * fi + v * v * fi / k2;
            up(&mut res.amplitude, lhs - 0.5 * r * rhs);

            let mut src = 0.0;
            if n > 0 {
                src += f[[n, i]] * f[[n - 1, i]] * phi_d[[n - 1, i]].sin();
            }
            if n < ng {
                src -= f[[n + 1, i]] * f[[n, i]] * phi_d[[n, i]].sin();
            }
            let djx = (obs.jx[[n, i]] - obs.jx[[n, i - 1]]) / dx;
            up(&mut res.current, djx / k2 - 0.5 * r * src);
        }
        let fp_left = (-3.0 * f[[n, 0]] + 4.0 * f[[n, 1]] - f[[n, 2]]) / (2.0 * dx);
        let fp_right = (3.0 * f[[n, m]] - 4.0 * f[[n, m - 1]] + f[[n, m - 2]]) / (2.0 * dx);
        up(&mut res.boundary_amplitude, fp_left);
        up(&mut res.boundary_amplitude, fp_right);
        let (jl, jr) = edge(&obs.jx.row(n).to_vec());
        up(&mut res.boundary_current, jl);
        up(&mut res.boundary_current, jr);
    }

    let jc = 0.5 * r * k2 * p;
    for g in 0..ng {
        for i in 1..m {
            let dh = (obs.h[[g, i]] - obs.h[[g, i - 1]]) / dx;
            up(&mut res.field_gradient, dh - jc * f[[g + 1, i]] * f[[g, i]] * phi_d[[g, i]].sin());
        }
        for k in 0..m {
            let dphi = (phi_d[[g, k + 1]] - phi_d[[g, k]]) / dx;
            up(&mut res.stokes, dphi - (obs.V[[g + 1, k]] - obs.V[[g, k]]) - p * obs.h[[g, k]]);
        }
        let (hl, hr) = edge(&obs.h.row(g).to_vec());
        up(&mut res.boundary_field, hl - params.applied_field);
        up(&mut res.boundary_field, hr - params.applied_field);
    }

    let big_h = params.applied_field;
    for k in 0..m {
        for n in 0..np {
            let below = if n == 0 { big_h } else { obs.h[[n - 1, k]] };
            let above = if n == ng { big_h } else { obs.h[[n, k]] };
            up(&mut res.jump, above - below + p * obs.jx[[n, k]]);
        }
    }
    Ok(res)
}
