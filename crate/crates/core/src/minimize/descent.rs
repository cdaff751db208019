//! Preconditioned limited-memory quasi-Newton descent with Armijo backtracking.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::hessian::{assemble_hessian, lumped_mass_matrix};
use crate::energy::{energy_unchecked, gradient_flat, weighted_norm};
use crate::error::{LdError, Result};
use crate::linalg::BandLu;
use crate::model::{uniform_field_state, DofLayout, Grid1D, LayeredState, LdParameters};

pub const ARMIJO_C: f64 = 1e-4;
pub const BACKTRACK: f64 = 0.5;
pub const MAX_BACKTRACKS: usize = 40;
const MEMORY: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeReport {
    pub state: LayeredState,
    pub iterations: usize,
    pub grad_norm: f64,
    pub energy: f64,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
    /// Set when no descent step could be found; `state` is then the best iterate.
    pub stalled: bool,
    pub line_search_failures: usize,
}

impl MinimizeReport {
    pub fn energy_trace(&self) -> Vec<f64> {
        self.trace.iter().map(|t| t.energy).collect()
    }

    /// Writes the trace as `iter,energy,grad_norm,step`.
    pub fn write_trace_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let e = |e: csv::Error| LdError::Parse(e.to_string());
        w.write_record(["iter", "energy", "grad_norm", "step"]).map_err(e)?;
        for t in &self.trace {
            w.write_record(&[t.iter.to_string(), t.energy.to_string(), t.grad_norm.to_string(), t.step.to_string()])
                .map_err(e)?;
        }
        w.flush().map_err(|x| LdError::Parse(x.to_string()))
    }
}

/// Fixed SPD preconditioner: the r = 0 Hessian at the uniform-field state plus a mass shift
/// at the soft-mode scale.
struct Preconditioner {
    lu: BandLu,
}

impl Preconditioner {
    fn new(params: &LdParameters, grid: &Grid1D) -> Result<Self> {
        let base = params.with_coupling(0.0);
        let h0 = assemble_hessian(&uniform_field_state(&base, grid), &base, grid);
        let sigma = params.coupling.max(1e-4);
        let lu = BandLu::factor(&h0.add_scaled(sigma, &lumped_mass_matrix(params, grid)))?;
        Ok(Self { lu })
    }

    fn apply(&self, g: &[f64]) -> Vec<f64> {
        self.lu.solve(g)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Descends from `state0` until the mass-weighted gradient norm drops to `tol`.
pub fn minimize(
    state0: &LayeredState,
    params: &LdParameters,
    grid: &Grid1D,
    tol: f64,
    max_iter: usize,
) -> Result<MinimizeReport> {
    state0.check_shape(params, grid)?;
    state0.check_finite()?;
    if !(tol > 0.0) {
        return Err(LdError::InvalidParameters("tol must be positive".into()));
    }
    let layout = DofLayout::new(params.num_gaps, grid.intervals);
    let mass = layout.lumped_mass(grid, params.spacing);
    let template = if state0.gauge_fixed { state0.clone() } else { state0.gauge_fixed(grid) };
    let eval = |x: &[f64]| {
        let st = layout.unpack(&template, x);
        (energy_unchecked(&st, params, grid), gradient_flat(&st, params, grid, &layout))
    };
    let mut x = layout.pack(&template);
    let (mut e, mut g) = eval(&x);
    let mut gn = weighted_norm(&g, &mass);
    let mut trace = vec![TraceRow {
        iter: 0,
        energy: e,
        grad_norm: gn,
        step: 0.0,
    }];
    let finish = |x: &[f64], e: f64, gn: f64, it: usize, trace: Vec<TraceRow>, stalled: bool, fails: usize| {
        MinimizeReport {
            state: layout.unpack(&template, x),
            iterations: it,
            grad_norm: gn,
            energy: e,
            trace,
            converged: gn <= tol,
            stalled,
            line_search_failures: fails,
        }
    };
    if gn <= tol {
        return Ok(finish(&x, e, gn, 0, trace, false, 0));
    }
    let pre = Preconditioner::new(params, grid)?;
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut fails = 0;
    for it in 1..=max_iter {
        let mut restarted = false;
        loop {
            let d = direction(&g, &mem, &pre);
            let slope = dot(&g, &d);
            let accepted = if slope < 0.0 { line_search(&x, e, slope, &d, &eval) } else { None };
            match accepted {
                Some((alpha, xn, en, gnew)) => {
                    let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
                    let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
                    let sy = dot(&s, &y);
                    if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                        mem.push_back((s, y, 1.0 / sy));
                        if mem.len() > MEMORY {
                            mem.pop_front();
                        }
                    }
                    x = xn;
                    e = en;
                    g = gnew;
                    gn = weighted_norm(&g, &mass);
                    if !e.is_finite() || !gn.is_finite() {
                        return Err(LdError::NonFinite("minimize iterate".into()));
                    }
                    trace.push(TraceRow {
                        iter: it,
                        energy: e,
                        grad_norm: gn,
                        step: alpha,
                    });
                    break;
                }
                None => {
                    fails += 1;
                    if restarted || mem.is_empty() {
                        log::debug!("line search stalled at iteration {it}, grad norm {gn:e}");
                        return Ok(finish(&x, e, gn, it - 1, trace, true, fails));
                    }
                    mem.clear();
                    restarted = true;
                }
            }
        }
        if gn <= tol {
            return Ok(finish(&x, e, gn, it, trace, false, fails));
        }
    }
    Ok(finish(&x, e, gn, max_iter, trace, false, fails))
}

type Accepted = (f64, Vec<f64>, f64, Vec<f64>);

fn line_search<F: Fn(&[f64]) -> (f64, Vec<f64>)>(x: &[f64], e: f64, slope: f64, d: &[f64], eval: &F) -> Option<Accepted> {
    let mut alpha = 1.0;
    for _ in 0..=MAX_BACKTRACKS {
        let xn: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + alpha * b).collect();
        let (en, gn) = eval(&xn);
        if en.is_finite() && en <= e + ARMIJO_C * alpha * slope {
            return Some((alpha, xn, en, gn));
        }
        alpha *= BACKTRACK;
    }
    None
}

/// Two-loop recursion with the preconditioner as the initial inverse Hessian.
fn direction(g: &[f64], mem: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, pre: &Preconditioner) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(mem.len());
    for (s, y, rho) in mem.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    let mut z = pre.apply(&q);
    if let Some((s, y, _)) = mem.back() {
        let py = pre.apply(y);
        let gamma = dot(s, y) / dot(y, &py);
        if gamma.is_finite() && gamma > 0.0 {
            z.iter_mut().for_each(|v| *v *= gamma);
        }
    }
    for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &z);
        z.iter_mut().zip(s).for_each(|(zi, si)| *zi += (a - b) * si);
    }
    z.iter_mut().for_each(|v| *v = -*v);
    z
}
