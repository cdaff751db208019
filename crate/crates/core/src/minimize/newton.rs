//! Full Newton iteration on ∇Ω = 0 with a band LU solve and Levenberg fallback.

use serde::{Deserialize, Serialize};

use super::hessian::{assemble_hessian, lumped_mass_matrix};
use super::inertia::inertia_of;
use crate::energy::{energy_unchecked, gradient_flat, weighted_norm};
use crate::error::{LdError, Result};
use crate::linalg::BandLu;
use crate::model::observables::circular_phase_offsets;
use crate::model::{observables, DofLayout, Grid1D, LayeredState, LdParameters, PhaseConfig};

/// Pivot ratio below which the Hessian is declared singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-13;
const MAX_NEWTON_ITER: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub state: LayeredState,
    pub energy: f64,
    /// Mass-weighted gradient norm at `state`.
    pub residual: f64,
    /// Negative eigenvalues among the N+1 smallest-magnitude Hessian eigenvalues.
    pub inertia: usize,
    /// Circular mean of Φ_{n,n−1} − Hpx per gap.
    pub delta_hat: PhaseConfig,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
}

/// Default tolerance max(1e-10, 1e-4 r).
pub fn default_newton_tol(params: &LdParameters) -> f64 {
    (1e-4 * params.coupling).max(1e-10)
}

pub fn estimate_delta(state: &LayeredState, params: &LdParameters, grid: &Grid1D) -> Result<PhaseConfig> {
    let obs = observables(state, params, grid)?;
    Ok(PhaseConfig::new(circular_phase_offsets(&obs, params, grid)))
}

/// Newton iteration to the critical point near `state0`.
pub fn newton_critical(state0: &LayeredState, params: &LdParameters, grid: &Grid1D, tol: f64) -> Result<CriticalPoint> {
    state0.check_shape(params, grid)?;
    state0.check_finite()?;
    let layout = DofLayout::new(params.num_gaps, grid.intervals);
    let mass = layout.lumped_mass(grid, params.spacing);
    let mass_m = lumped_mass_matrix(params, grid);
    let template = if state0.gauge_fixed { state0.clone() } else { state0.gauge_fixed(grid) };
    let grad_at = |x: &[f64]| gradient_flat(&layout.unpack(&template, x), params, grid, &layout);
    let merit = |g: &[f64]| 0.5 * weighted_norm(g, &mass).powi(2);

    let mut x = layout.pack(&template);
    let mut g = grad_at(&x);
    let mut history = Vec::new();
    for it in 0..=MAX_NEWTON_ITER {
        let res = weighted_norm(&g, &mass);
        if !res.is_finite() {
            return Err(LdError::NonFinite("Newton residual".into()));
        }
        history.push(res);
        let st = layout.unpack(&template, &x);
        let h = assemble_hessian(&st, params, grid);
        let lu = BandLu::factor(&h)?;
        if lu.pivot_ratio() < SINGULAR_PIVOT_RATIO {
            return Err(LdError::SingularHessian(lu.pivot_ratio()));
        }
        if res <= tol {
            let inertia = inertia_of(&h, &mass_m, params.num_gaps + 1)?;
            return Ok(CriticalPoint {
                energy: energy_unchecked(&st, params, grid),
                delta_hat: estimate_delta(&st, params, grid)?,
                state: st,
                residual: res,
                inertia,
                iterations: it,
                residual_history: history,
            });
        }
        if it == MAX_NEWTON_ITER {
            break;
        }
        let m0 = merit(&g);
        let step: Vec<f64> = lu.solve(&g).into_iter().map(|v| -v).collect();
        let mut accepted = None;
        let mut alpha = 1.0;
        for _ in 0..12 {
            let xn: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + alpha * b).collect();
            let gn = grad_at(&xn);
            if merit(&gn) <= (1.0 - 2e-4 * alpha) * m0 {
                accepted = Some((xn, gn));
                break;
            }
            alpha *= 0.5;
        }
        if accepted.is_none() {
            let scale = h.max_abs() / mass.iter().fold(0.0f64, |m, v| m.max(*v));
            let mut mu = 1e-6 * scale;
            for _ in 0..14 {
                let damped = BandLu::factor(&h.add_scaled(mu, &mass_m))?;
                let d = damped.solve(&g);
                let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - b).collect();
                let gn = grad_at(&xn);
                if merit(&gn) < m0 {
                    accepted = Some((xn, gn));
                    break;
                }
                mu *= 10.0;
            }
        }
        match accepted {
            Some((xn, gn)) => {
                x = xn;
                g = gn;
            }
            None => {
                return Err(LdError::NoConvergence {
                    iterations: it,
                    residual: res,
                })
            }
        }
    }
    Err(LdError::NoConvergence {
        iterations: MAX_NEWTON_ITER,
        residual: *history.last().unwrap_or(&f64::NAN),
    })
}
