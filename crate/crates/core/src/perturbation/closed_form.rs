use ndarray::Array2;

use super::vortex_plane_delta;
use crate::error::Result;
use crate::model::{Grid1D, LdParameters, Observables};

/// Constants (A, B) of the interior amplitude correction −½ + A cosh(√2x/κ) + B cos(δ+Hpx).
pub fn amplitude_constants(params: &LdParameters, delta: f64) -> (f64, f64) {
    let k = params.kappa;
    let hp = params.hp();
    let den = hp * hp + 2.0 * k * k;
    let b = k * k / den;
    let a = k.powi(3) * hp * (delta + hp * params.half_width).sin()
        / (std::f64::consts::SQRT_2 * den * (std::f64::consts::SQRT_2 * params.half_width / k).sinh());
    (a, b)
}

/// Interior-plane amplitude correction u(x) at the nodes, for δ ∈ {0, π}.
pub fn closed_form_amplitude(params: &LdParameters, grid: &Grid1D, delta: f64) -> Vec<f64> {
    let (a, b) = amplitude_constants(params, delta);
    let s = std::f64::consts::SQRT_2 / params.kappa;
    grid.nodes()
        .into_iter()
        .map(|x| -0.5 + a * (s * x).cosh() + b * (delta + params.hp() * x).cos())
        .collect()
}

/// Order-r closed forms of the vortex-plane minimizer sampled on the grid.
///
/// Φ carries no per-gap constant. For gaps adjacent to the top or bottom plane the order-r term
/// of Φ is scaled by (1 + e/p²), e the number of adjacent edge planes: the edge planes carry an
/// order-r current, which enters Φ′ through the Stokes relation.
pub fn vortex_plane_observables(params: &LdParameters, grid: &Grid1D) -> Result<Observables> {
    let delta = vortex_plane_delta(params)?;
    let ng = params.num_gaps;
    let np = ng + 1;
    let m = grid.intervals;
    let r = params.coupling;
    let p = params.spacing;
    let k2 = params.kappa * params.kappa;
    let big_h = params.applied_field;
    let hp = params.hp();
    let cos_l = (delta + hp * params.half_width).cos();
    let xs = grid.nodes();
    let mids = grid.midpoints();

    let u = closed_form_amplitude(params, grid, delta);
    let f = Array2::from_shape_fn((np, m + 1), |(n, i)| {
        let scale = if n == 0 || n == ng { 0.5 } else { 1.0 };
        1.0 + r * scale * u[i]
    });
    let edge_current = |x: f64| r * k2 / (2.0 * hp) * (cos_l - (delta + hp * x).cos());
    let jx = Array2::from_shape_fn((np, m), |(n, k)| {
        if n == ng {
            edge_current(mids[k])
        } else if n == 0 {
            -edge_current(mids[k])
        } else {
            0.0
        }
    });
    let h = Array2::from_shape_fn((ng, m), |(_, k)| {
        big_h + r * k2 / (2.0 * big_h) * (cos_l - (delta + hp * mids[k]).cos())
    });
    let jz = Array2::from_shape_fn((ng, m), |(_, k)| 0.5 * r * k2 * p * (delta + hp * mids[k]).sin());
    let phi = Array2::from_shape_fn((ng, m + 1), |(g, i)| {
        let x = xs[i];
        let edges = (g == 0) as usize + (g + 1 == ng) as usize;
        let factor = 1.0 + edges as f64 / (p * p);
        delta + hp * x + r * k2 / (2.0 * big_h * big_h) * factor * (x * hp * cos_l - (delta + hp * x).sin())
    });
    Ok(Observables {
        f,
        V: jx.clone(),
        Phi: phi,
        h,
        jx,
        jz,
    })
}
