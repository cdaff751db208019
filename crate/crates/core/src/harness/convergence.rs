use serde::{Deserialize, Serialize};
use std::time::Instant;

use super::{fit_loglog, relax, sup_diff, Check, ExperimentRecord};
use crate::error::{LdError, Result};
use crate::model::state::wrap_signed;
use crate::model::{observables, Grid1D, LdParameters, Observables};
use crate::perturbation::{g0, seed_state, vortex_plane_config, vortex_plane_observables};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub r: f64,
    pub energy: f64,
    /// |Ω/r − g0(δ*)|
    pub energy_gap: f64,
    pub energy_bound: f64,
    pub h_gap: f64,
    pub jz_gap: f64,
    pub f_gap: f64,
    /// Φ gap after removing the best per-gap constant.
    pub phi_gap: f64,
    pub jx_gap: f64,
    pub min_f: f64,
    pub max_f: f64,
    pub residual: f64,
    pub inertia: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceData {
    pub delta_star: f64,
    pub rows: Vec<ConvergenceRow>,
}

/// Sup-norm of the Φ difference after subtracting its circular mean in each gap.
pub fn phase_gap_mod_constant(a: &Observables, b: &Observables) -> f64 {
    let mut worst = 0.0f64;
    for g in 0..a.gaps() {
        let d: Vec<f64> = a.Phi.row(g).iter().zip(b.Phi.row(g)).map(|(x, y)| wrap_signed(x - y)).collect();
        let (s, c) = d.iter().fold((0.0, 0.0), |(s, c), v| (s + v.sin(), c + v.cos()));
        let mean = s.atan2(c);
        worst = d.iter().map(|v| wrap_signed(v - mean).abs()).fold(worst, f64::max);
    }
    worst
}

/// Relaxes the vortex-plane seed for each r and measures its distance to the closed forms.
pub fn convergence_study(params: &LdParameters, grid: &Grid1D, r_list: &[f64]) -> Result<ExperimentRecord<ConvergenceData>> {
    let start = Instant::now();
    if r_list.len() < 3 {
        return Err(LdError::InvalidParameters("need at least three couplings".into()));
    }
    if r_list.windows(2).any(|w| !(w[1] < w[0])) || r_list.iter().any(|&r| !(r > 0.0)) {
        return Err(LdError::InvalidParameters("couplings must be positive and decreasing".into()));
    }
    let cfg = vortex_plane_config(params)?;
    let mut rows = Vec::new();
    for &r in r_list {
        let p = (*params).with_coupling(r);
        let cp = relax(&seed_state(&p, grid, &cfg), &p, grid)?;
        let num = observables(&cp.state, &p, grid)?;
        let cf = vortex_plane_observables(&p, grid)?;
        rows.push(ConvergenceRow {
            r,
            energy: cp.energy,
            energy_gap: (cp.energy / r - g0(&p, &cfg)).abs(),
            energy_bound: p.energy_bound(),
            h_gap: sup_diff(&num.h, &cf.h),
            jz_gap: sup_diff(&num.jz, &cf.jz),
            f_gap: sup_diff(&num.f, &cf.f),
            phi_gap: phase_gap_mod_constant(&num, &cf),
            jx_gap: sup_diff(&num.jx, &cf.jx),
            min_f: cp.state.min_amplitude(),
            max_f: cp.state.max_amplitude(),
            residual: cp.residual,
            inertia: cp.inertia,
        });
        log::info!("convergence r={r:e}: energy {:.9e}", cp.energy);
    }
    let rs: Vec<f64> = rows.iter().map(|x| x.r).collect();
    let col = |f: fn(&ConvergenceRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let fits = vec![
        fit_loglog("energy", &rs, &col(|x| x.energy_gap)),
        fit_loglog("h", &rs, &col(|x| x.h_gap)),
        fit_loglog("jz", &rs, &col(|x| x.jz_gap)),
        fit_loglog("f", &rs, &col(|x| x.f_gap)),
        fit_loglog("Phi", &rs, &col(|x| x.phi_gap)),
        fit_loglog("jx", &rs, &col(|x| x.jx_gap)),
    ];
    let bound_ok = rows.iter().all(|x| x.energy <= x.energy_bound);
    let checks = vec![
        Check::new("energy_bound", bound_ok, "every minimum below 2Np(L+1/(pH))r".into()),
        Check::new("minimizers", rows.iter().all(|x| x.inertia == 0), "inertia 0 at every r".into()),
    ];
    Ok(ExperimentRecord {
        name: "convergence".into(),
        params: *params,
        intervals: grid.intervals,
        data: ConvergenceData {
            delta_star: cfg.delta[0],
            rows,
        },
        fits,
        checks,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
