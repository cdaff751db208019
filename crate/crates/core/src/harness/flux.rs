use serde::{Deserialize, Serialize};

use crate::error::{LdError, Result};
use crate::model::{observables, Grid1D, LayeredState, LdParameters};

/// Flux p·∫h dx through one gap over one period of the Josephson current.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleFlux {
    /// 1-based gap index.
    pub gap: usize,
    pub x_start: f64,
    pub x_end: f64,
    pub flux: f64,
}

/// Sign changes of a midpoint profile, linearly interpolated: (position, rising).
fn crossings(x: &[f64], v: &[f64]) -> Vec<(f64, bool)> {
    let mut out = Vec::new();
    for k in 0..v.len() - 1 {
        let (a, b) = (v[k], v[k + 1]);
        if (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) {
            if b == 0.0 && k + 2 < v.len() && v[k + 2].signum() == a.signum() {
                continue;
            }
            let t = a / (a - b);
            out.push((x[k] + t * (x[k + 1] - x[k]), b > a));
        }
    }
    out
}

/// ∫_a^b of the piecewise-linear interpolant through (x_k, v_k), held constant past the ends.
fn integrate_linear(x: &[f64], v: &[f64], a: f64, b: f64) -> f64 {
    let value = |t: f64| {
        if t <= x[0] {
            return v[0];
        }
        if t >= x[x.len() - 1] {
            return v[v.len() - 1];
        }
        let k = x.partition_point(|&xi| xi <= t) - 1;
        let s = (t - x[k]) / (x[k + 1] - x[k]);
        v[k] + s * (v[k + 1] - v[k])
    };
    let mut knots: Vec<f64> = vec![a];
    knots.extend(x.iter().copied().filter(|&xi| xi > a && xi < b));
    knots.push(b);
    knots.windows(2).map(|w| 0.5 * (w[1] - w[0]) * (value(w[0]) + value(w[1]))).sum()
}

/// Per-gap flux over every complete cycle of j_z between consecutive same-direction zeros.
pub fn flux_check(state: &LayeredState, params: &LdParameters, grid: &Grid1D) -> Result<Vec<CycleFlux>> {
    let obs = observables(state, params, grid)?;
    let x = grid.midpoints();
    let p = params.spacing;
    let mut out = Vec::new();
    for g in 0..obs.gaps() {
        let jz = obs.jz.row(g).to_vec();
        let h = obs.h.row(g).to_vec();
        let zeros = crossings(&x, &jz);
        for rising in [true, false] {
            let same: Vec<f64> = zeros.iter().filter(|z| z.1 == rising).map(|z| z.0).collect();
            for w in same.windows(2) {
                out.push(CycleFlux {
                    gap: g + 1,
                    x_start: w[0],
                    x_end: w[1],
                    flux: p * integrate_linear(&x, &h, w[0], w[1]),
                });
            }
        }
    }
    if out.is_empty() {
        return Err(LdError::NoCompleteCycle);
    }
    out.sort_by(|a, b| (a.gap, a.x_start).partial_cmp(&(b.gap, b.x_start)).unwrap());
    Ok(out)
}
