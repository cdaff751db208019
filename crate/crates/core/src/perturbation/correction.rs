use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::linalg::solve_tridiagonal;
use crate::model::observables::circular_phase_offsets;
use crate::model::state::wrap_signed;
use crate::model::{observables, Grid1D, LayeredState, LdParameters, PhaseConfig};

/// Order-r correction around the r = 0 minimizer with phases δ.
///
/// These are the exact solutions of the linearized *discrete* equations, so a state built from
/// them has an O(r²) gradient on any grid. `u1` is nodal ((N+1)×(M+1)); `sv1` is nodal-plane on
/// midpoints ((N+1)×M); `b1` has one row per gap (row g is gap g+1) on midpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionFields {
    pub u1: Array2<f64>,
    pub sv1: Array2<f64>,
    pub b1: Array2<f64>,
    /// Weighted mean of the current forcing per plane (makes sv1 vanish at both edges).
    pub lagrange_i: Vec<f64>,
    /// Weighted mean of sin Φ per gap (makes b1 vanish at both edges).
    pub lagrange_d: Vec<f64>,
}

/// Solves the linearized equations at the r = 0 minimizer with phases `delta`.
pub fn first_order_correction(params: &LdParameters, grid: &Grid1D, delta: &PhaseConfig) -> CorrectionFields {
    let ng = params.num_gaps;
    let np = ng + 1;
    let m = grid.intervals;
    let dx = grid.dx;
    let p = params.spacing;
    let k2 = params.kappa * params.kappa;
    let hp = params.hp();
    let w = grid.weights();
    let x = grid.nodes();
    // Φ_g at order 0, row g = gap g+1.
    let phase = |g: usize, i: usize| delta.delta[g] + hp * x[i];

    let mut u1 = Array2::zeros((np, m + 1));
    let off = -1.0 / (k2 * dx);
    for n in 0..np {
        let mut diag = vec![0.0; m + 1];
        let mut rhs = vec![0.0; m + 1];
        for i in 0..=m {
            let links = if i == 0 || i == m { 1.0 } else { 2.0 };
            diag[i] = 2.0 * w[i] + links / (k2 * dx);
            let mut forcing = 0.0;
            if n >= 1 {
                forcing += phase(n - 1, i).cos() - 1.0;
            }
            if n < ng {
                forcing += phase(n, i).cos() - 1.0;
            }
            rhs[i] = 0.5 * w[i] * forcing;
        }
        let side = vec![off; m + 1];
        let sol = solve_tridiagonal(&side, &diag, &side, &rhs);
        for i in 0..=m {
            u1[[n, i]] = sol[i];
        }
    }

    let total: f64 = w.iter().sum();
    let mut sv1 = Array2::zeros((np, m));
    let mut lagrange_i = vec![0.0; np];
    for n in 0..np {
        let s: Vec<f64> = (0..=m)
            .map(|i| {
                let mut v = 0.0;
                if n >= 1 {
                    v += phase(n - 1, i).sin();
                }
                if n < ng {
                    v -= phase(n, i).sin();
                }
                v
            })
            .collect();
        let mean = s.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / total;
        lagrange_i[n] = mean;
        let mut acc = 0.0;
        for k in 0..m {
            acc += 0.5 * k2 * w[k] * (s[k] - mean);
            sv1[[n, k]] = acc;
        }
    }

    let mut b1 = Array2::zeros((ng, m));
    let mut lagrange_d = vec![0.0; ng];
    for g in (0..ng).rev() {
        let plane = g + 1;
        // the current forcings of the planes above telescope to sin Φ_g
        lagrange_d[g] = lagrange_i[plane] + if g + 1 < ng { lagrange_d[g + 1] } else { 0.0 };
        for k in 0..m {
            let above = if g + 1 < ng { b1[[g + 1, k]] } else { 0.0 };
            b1[[g, k]] = above + p * sv1[[plane, k]];
        }
    }

    CorrectionFields {
        u1,
        sv1,
        b1,
        lagrange_i,
        lagrange_d,
    }
}

/// The r = 0 minimizer with phases `delta` plus the order-r correction, in the layered gauge.
///
/// a_0 = −V_0 so that φ_0 ≡ 0; the remaining a_n follow by stacking h across the gaps, and φ_n
/// integrates φ′ = V + a with per-gap constants chosen so that the circular mean of Φ − Hpx is δ.
pub fn seed_state(params: &LdParameters, grid: &Grid1D, delta: &PhaseConfig) -> LayeredState {
    let ng = params.num_gaps;
    let np = ng + 1;
    let m = grid.intervals;
    let r = params.coupling;
    let p = params.spacing;
    let corr = first_order_correction(params, grid, delta);

    let f = corr.u1.mapv(|u| 1.0 + r * u);
    let v = corr.sv1.mapv(|s| r * s);
    let mut a = Array2::zeros((np, m));
    for k in 0..m {
        a[[0, k]] = -v[[0, k]];
        for g in 0..ng {
            let h = params.applied_field + r * corr.b1[[g, k]];
            a[[g + 1, k]] = a[[g, k]] + p * h;
        }
    }
    let mut phi = Array2::zeros((np, m + 1));
    for n in 1..np {
        for k in 0..m {
            phi[[n, k + 1]] = phi[[n, k]] + grid.dx * (v[[n, k]] + a[[n, k]]);
        }
    }
    let mut st = LayeredState {
        f,
        phi,
        a,
        gauge_fixed: true,
    };
    let obs = observables(&st, params, grid).expect("seed shapes are consistent");
    let c = circular_phase_offsets(&obs, params, grid);
    let mut shift = 0.0;
    for n in 1..np {
        shift += wrap_signed(delta.delta[n - 1] - c[n - 1]);
        for i in 0..=m {
            st.phi[[n, i]] += shift;
        }
    }
    st
}
