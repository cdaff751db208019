//! Discrete free energy, analytic gradient and Hessian-vector products.
//!
//! With trapezoid weights w_i on nodes and midpoint sums on intervals:
//!
//! | term | discrete form |
//! |---|---|
//! | condensation | p Σ_n Σ_i w_i ½(f²−1)² |
//! | gradient | p/(κ² dx) Σ_n Σ_k (f_{i+1} − f_i)² |
//! | kinetic | p dx/κ² Σ_n Σ_k f̄² V² |
//! | Josephson | (rp/2) Σ_g Σ_i w_i (f_g² + f_{g−1}² − 2 f_g f_{g−1} cos Φ_g) |
//! | field | p dx/κ² Σ_g Σ_k (h_g − H)² |

mod fdcheck;
mod residual;

pub use fdcheck::{fd_gradient_check, fd_hessian_check, hessian_symmetry};
pub use residual::{el_residual, ElResidual};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{LdError, Result};
use crate::model::{DofLayout, Grid1D, LayeredState, LdParameters};

/// Energy split into its three physical parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub bulk: f64,
    pub josephson: f64,
    pub field: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn from_parts(bulk: f64, josephson: f64, field: f64) -> Self {
        Self {
            bulk,
            josephson,
            field,
            total: bulk + josephson + field,
        }
    }
}

/// ∂Ω/∂(free DOF): `phi` has N rows (planes 1..N).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CotangentState {
    pub f: Array2<f64>,
    pub phi: Array2<f64>,
    pub a: Array2<f64>,
}

impl CotangentState {
    pub fn from_flat(layout: &DofLayout, x: &[f64]) -> Self {
        let (f, phi, a) = layout.split(x);
        Self { f, phi, a }
    }

    pub fn to_flat(&self, layout: &DofLayout) -> Vec<f64> {
        layout.pack_parts(self.f.view(), self.phi.view(), self.a.view(), 0)
    }

    pub fn max_abs(&self) -> f64 {
        self.f
            .iter()
            .chain(self.phi.iter())
            .chain(self.a.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Precomputed constants shared by the kernels.
#[derive(Clone, Copy)]
pub(crate) struct Coeffs {
    pub p: f64,
    pub ik2: f64,
    pub r: f64,
    pub h: f64,
    pub dx: f64,
    pub m: usize,
    pub np: usize,
}

impl Coeffs {
    pub fn new(params: &LdParameters, grid: &Grid1D) -> Self {
        Self {
            p: params.spacing,
            ik2: 1.0 / (params.kappa * params.kappa),
            r: params.coupling,
            h: params.applied_field,
            dx: grid.dx,
            m: grid.intervals,
            np: params.planes(),
        }
    }

    #[inline]
    pub fn w(&self, i: usize) -> f64 {
        if i == 0 || i == self.m {
            0.5 * self.dx
        } else {
            self.dx
        }
    }
}

/// Scalar type the energy and gradient kernels are written over: f64 for the solvers, and a
/// double-double type for the finite-difference check, where f64 round-off would swamp the
/// comparison near critical points.
pub(crate) trait Real:
    Copy
    + From<f64>
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::AddAssign
    + std::ops::SubAssign
{
    fn sin_cos(self) -> (Self, Self);
    fn cos(self) -> Self;
}

impl Real for f64 {
    #[inline]
    fn sin_cos(self) -> (f64, f64) {
        f64::sin_cos(self)
    }
    #[inline]
    fn cos(self) -> f64 {
        f64::cos(self)
    }
}

impl Real for twofloat::TwoFloat {
    fn sin_cos(self) -> (Self, Self) {
        twofloat::TwoFloat::sin_cos(self)
    }
    fn cos(self) -> Self {
        twofloat::TwoFloat::cos(self)
    }
}

/// Energy of the nodal terms at nodes `lo..=hi` and midpoint terms at intervals `lo..hi`.
pub(crate) fn window_energy(st: &LayeredState, c: &Coeffs, lo: usize, hi: usize) -> EnergyBreakdown {
    let (bulk, jos, field) = window_terms(&st.f, &st.phi, &st.a, c, lo, hi);
    EnergyBreakdown::from_parts(bulk, jos, field)
}

/// (bulk, Josephson, field) parts of the window energy.
pub(crate) fn window_terms<T: Real>(
    f: &Array2<T>,
    phi: &Array2<T>,
    a: &Array2<T>,
    c: &Coeffs,
    lo: usize,
    hi: usize,
) -> (T, T, T) {
    let k = |v: f64| T::from(v);
    let (one, half, two) = (k(1.0), k(0.5), k(2.0));
    let (p, dx, ik2) = (k(c.p), k(c.dx), k(c.ik2));
    let mut bulk = k(0.0);
    let mut jos = k(0.0);
    let mut field = k(0.0);
    for n in 0..c.np {
        let mut pot = k(0.0);
        for i in lo..=hi {
            let q = f[[n, i]] * f[[n, i]] - one;
            pot += k(c.w(i)) * half * q * q;
        }
        let mut grad = k(0.0);
        let mut kin = k(0.0);
        for j in lo..hi {
            let d = f[[n, j + 1]] - f[[n, j]];
            grad += d * d;
            let fb = half * (f[[n, j]] + f[[n, j + 1]]);
            let v = (phi[[n, j + 1]] - phi[[n, j]]) / dx - a[[n, j]];
            kin += fb * fb * v * v;
        }
        bulk += p * pot + p * ik2 / dx * grad + p * dx * ik2 * kin;
    }
    for g in 1..c.np {
        let mut s = k(0.0);
        for i in lo..=hi {
            let (fa, fb) = (f[[g, i]], f[[g - 1, i]]);
            let cos = (phi[[g, i]] - phi[[g - 1, i]]).cos();
            s += k(c.w(i)) * (fa * fa + fb * fb - two * fa * fb * cos);
        }
        jos += half * k(c.r) * p * s;
        let mut t = k(0.0);
        for j in lo..hi {
            let dh = (a[[g, j]] - a[[g - 1, j]]) / p - k(c.h);
            t += dh * dh;
        }
        field += p * dx * ik2 * t;
    }
    (bulk, jos, field)
}

/// Total discrete energy and its components.
pub fn total_energy(state: &LayeredState, params: &LdParameters, grid: &Grid1D) -> Result<EnergyBreakdown> {
    state.check_shape(params, grid)?;
    state.check_finite()?;
    Ok(window_energy(state, &Coeffs::new(params, grid), 0, grid.intervals))
}

pub(crate) fn energy_unchecked(state: &LayeredState, params: &LdParameters, grid: &Grid1D) -> f64 {
    window_energy(state, &Coeffs::new(params, grid), 0, grid.intervals).total
}

/// Gradient as a flat vector over the free DOFs.
pub(crate) fn gradient_flat(st: &LayeredState, params: &LdParameters, grid: &Grid1D, layout: &DofLayout) -> Vec<f64> {
    gradient_terms(&st.f, &st.phi, &st.a, &Coeffs::new(params, grid), layout)
}

pub(crate) fn gradient_terms<T: Real>(
    f: &Array2<T>,
    phi: &Array2<T>,
    a: &Array2<T>,
    c: &Coeffs,
    layout: &DofLayout,
) -> Vec<T> {
    let k = |v: f64| T::from(v);
    let (one, half, two) = (k(1.0), k(0.5), k(2.0));
    let (p, dx) = (k(c.p), k(c.dx));
    let mut g = vec![k(0.0); layout.len()];
    let kin_c = k(c.p * c.dx * c.ik2);
    let grad_c = two * p * k(c.ik2) / dx;
    for n in 0..c.np {
        for i in 0..=c.m {
            let fi = f[[n, i]];
            g[layout.f(n, i)] += p * k(c.w(i)) * two * fi * (fi * fi - one);
        }
        for j in 0..c.m {
            let d = f[[n, j + 1]] - f[[n, j]];
            g[layout.f(n, j)] -= grad_c * d;
            g[layout.f(n, j + 1)] += grad_c * d;
            let fb = half * (f[[n, j]] + f[[n, j + 1]]);
            let v = (phi[[n, j + 1]] - phi[[n, j]]) / dx - a[[n, j]];
            let gfb = two * kin_c * fb * v * v;
            let gv = two * kin_c * fb * fb * v;
            g[layout.f(n, j)] += half * gfb;
            g[layout.f(n, j + 1)] += half * gfb;
            if n > 0 {
                g[layout.phi(n, j + 1)] += gv / dx;
                g[layout.phi(n, j)] -= gv / dx;
            }
            g[layout.a(n, j)] -= gv;
        }
    }
    let field_c = two * dx * k(c.ik2);
    for gp in 1..c.np {
        for i in 0..=c.m {
            let cj = half * k(c.r) * p * k(c.w(i));
            let (fa, fb) = (f[[gp, i]], f[[gp - 1, i]]);
            let t = phi[[gp, i]] - phi[[gp - 1, i]];
            let (sin, cos) = t.sin_cos();
            g[layout.f(gp, i)] += cj * (two * fa - two * fb * cos);
            g[layout.f(gp - 1, i)] += cj * (two * fb - two * fa * cos);
            let s = cj * two * fa * fb * sin;
            g[layout.phi(gp, i)] += s;
            if gp > 1 {
                g[layout.phi(gp - 1, i)] -= s;
            }
        }
        for j in 0..c.m {
            let dh = (a[[gp, j]] - a[[gp - 1, j]]) / p - k(c.h);
            g[layout.a(gp, j)] += field_c * dh;
            g[layout.a(gp - 1, j)] -= field_c * dh;
        }
    }
    g
}

/// Exact derivative of [`total_energy`] with respect to every free DOF.
pub fn gradient(state: &LayeredState, params: &LdParameters, grid: &Grid1D) -> Result<CotangentState> {
    state.check_shape(params, grid)?;
    state.check_finite()?;
    let layout = DofLayout::new(params.num_gaps, grid.intervals);
    Ok(CotangentState::from_flat(&layout, &gradient_flat(state, params, grid, &layout)))
}

/// Hessian applied to a flat direction over the free DOFs.
pub(crate) fn hessian_apply_flat(
    st: &LayeredState,
    params: &LdParameters,
    grid: &Grid1D,
    layout: &DofLayout,
    u: &[f64],
) -> Vec<f64> {
    let c = Coeffs::new(params, grid);
    let (f, phi, a) = (&st.f, &st.phi, &st.a);
    let mut out = vec![0.0; layout.len()];
    let uphi = |n: usize, i: usize| if n == 0 { 0.0 } else { u[layout.phi(n, i)] };
    let kin_c = c.p * c.dx * c.ik2;
    let grad_c = 2.0 * c.p * c.ik2 / c.dx;
    for n in 0..c.np {
        for i in 0..=c.m {
            let fi = f[[n, i]];
            out[layout.f(n, i)] += c.p * c.w(i) * (6.0 * fi * fi - 2.0) * u[layout.f(n, i)];
        }
        for k in 0..c.m {
            let (u0, u1) = (u[layout.f(n, k)], u[layout.f(n, k + 1)]);
            let d = u1 - u0;
            out[layout.f(n, k)] -= grad_c * d;
            out[layout.f(n, k + 1)] += grad_c * d;
            let fb = 0.5 * (f[[n, k]] + f[[n, k + 1]]);
            let v = (phi[[n, k + 1]] - phi[[n, k]]) / c.dx - a[[n, k]];
            let dfb = 0.5 * (u0 + u1);
            let dv = (uphi(n, k + 1) - uphi(n, k)) / c.dx - u[layout.a(n, k)];
            let ofb = 2.0 * kin_c * v * v * dfb + 4.0 * kin_c * fb * v * dv;
            let ov = 4.0 * kin_c * fb * v * dfb + 2.0 * kin_c * fb * fb * dv;
            out[layout.f(n, k)] += 0.5 * ofb;
            out[layout.f(n, k + 1)] += 0.5 * ofb;
            if n > 0 {
                out[layout.phi(n, k + 1)] += ov / c.dx;
                out[layout.phi(n, k)] -= ov / c.dx;
            }
            out[layout.a(n, k)] -= ov;
        }
    }
    let field_c = 2.0 * c.dx * c.ik2;
    for gp in 1..c.np {
        for i in 0..=c.m {
            let cj = 0.5 * c.r * c.p * c.w(i);
            let (fa, fb) = (f[[gp, i]], f[[gp - 1, i]]);
            let (sin, cos) = (phi[[gp, i]] - phi[[gp - 1, i]]).sin_cos();
            let (da, db) = (u[layout.f(gp, i)], u[layout.f(gp - 1, i)]);
            let dt = uphi(gp, i) - uphi(gp - 1, i);
            out[layout.f(gp, i)] += cj * (2.0 * da - 2.0 * cos * db + 2.0 * fb * sin * dt);
            out[layout.f(gp - 1, i)] += cj * (2.0 * db - 2.0 * cos * da + 2.0 * fa * sin * dt);
            let ot = cj * (2.0 * fb * sin * da + 2.0 * fa * sin * db + 2.0 * fa * fb * cos * dt);
            out[layout.phi(gp, i)] += ot;
            if gp > 1 {
                out[layout.phi(gp - 1, i)] -= ot;
            }
        }
        for k in 0..c.m {
            let dh = (u[layout.a(gp, k)] - u[layout.a(gp - 1, k)]) / c.p;
            out[layout.a(gp, k)] += field_c * dh;
            out[layout.a(gp - 1, k)] -= field_c * dh;
        }
    }
    out
}

/// Directional derivative of the gradient along `direction`.
pub fn hessian_apply(
    state: &LayeredState,
    direction: &CotangentState,
    params: &LdParameters,
    grid: &Grid1D,
) -> Result<CotangentState> {
    state.check_shape(params, grid)?;
    let layout = DofLayout::new(params.num_gaps, grid.intervals);
    let np = params.planes();
    let m = grid.intervals;
    if direction.f.dim() != (np, m + 1) || direction.phi.dim() != (np - 1, m + 1) || direction.a.dim() != (np, m) {
        return Err(LdError::ShapeMismatch("direction does not match the free DOFs".into()));
    }
    let u = direction.to_flat(&layout);
    Ok(CotangentState::from_flat(&layout, &hessian_apply_flat(state, params, grid, &layout, &u)))
}

/// Mass-weighted gradient norm sqrt(Σ g_j² / m_j): a discrete L² norm of the functional
/// derivative, independent of the mesh size.
pub(crate) fn weighted_norm(g: &[f64], mass: &[f64]) -> f64 {
    g.iter().zip(mass).map(|(g, m)| g * g / m).sum::<f64>().sqrt()
}
