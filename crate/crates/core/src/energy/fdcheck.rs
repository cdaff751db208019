//! Finite-difference oracles for the analytic derivatives.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ndarray::Array2;
use twofloat::TwoFloat;

use super::{gradient_flat, gradient_terms, hessian_apply_flat, window_terms, Coeffs};
use crate::error::{LdError, Result};
use crate::model::{DofLayout, Grid1D, LayeredState, LdParameters};

#[derive(Clone, Copy)]
enum Slot {
    F(usize, usize),
    Phi(usize, usize),
    A(usize, usize),
}

type Fields = (Array2<TwoFloat>, Array2<TwoFloat>, Array2<TwoFloat>);

fn cell(st: &mut Fields, slot: Slot) -> &mut TwoFloat {
    match slot {
        Slot::F(n, i) => &mut st.0[[n, i]],
        Slot::Phi(n, i) => &mut st.1[[n, i]],
        Slot::A(n, k) => &mut st.2[[n, k]],
    }
}

fn slots(layout: &DofLayout) -> Vec<(usize, Slot)> {
    let np = layout.gaps + 1;
    let mut out = Vec::with_capacity(layout.len());
    for i in 0..=layout.intervals {
        for n in 0..np {
            out.push((layout.f(n, i), Slot::F(n, i)));
            if n > 0 {
                out.push((layout.phi(n, i), Slot::Phi(n, i)));
            }
            if i < layout.intervals {
                out.push((layout.a(n, i), Slot::A(n, i)));
            }
        }
    }
    out.sort_by_key(|s| s.0);
    out
}

/// Max over ≥ 200 sampled DOFs (all if fewer) of |analytic − central FD| / (|analytic| + 1e-12).
///
/// The difference is the fourth-order central stencil at step `eps`; the second-order one
/// leaves an ε²·Ω‴ term that is larger than small gradient components of smooth states.
/// Both sides are evaluated in double-double arithmetic from the same kernels the solvers
/// run in f64, so the comparison tests the formulas rather than f64 round-off: at a critical
/// point many components are zero and their f64 values are pure noise. The central difference
/// is taken on the energy of the window of terms that contain the perturbed DOF.
pub fn fd_gradient_check(state: &LayeredState, params: &LdParameters, grid: &Grid1D, eps: f64) -> Result<f64> {
    if !(1e-9..=1e-3).contains(&eps) {
        return Err(LdError::InvalidParameters(format!("eps {eps} outside [1e-9, 1e-3]")));
    }
    state.check_shape(params, grid)?;
    let layout = DofLayout::new(params.num_gaps, grid.intervals);
    let c = Coeffs::new(params, grid);
    let lift = |x: &Array2<f64>| x.mapv(TwoFloat::from);
    let mut work: Fields = (lift(&state.f), lift(&state.phi), lift(&state.a));
    let g = gradient_terms(&work.0, &work.1, &work.2, &c, &layout);
    let all = slots(&layout);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let count = all.len().min(200.max(all.len() / 4));
    let picks = sample(&mut rng, all.len(), count);
    let m = grid.intervals;
    let step = TwoFloat::from(eps);
    let mut worst: f64 = 0.0;
    for idx in picks.iter() {
        let (j, slot) = all[idx];
        let (lo, hi) = match slot {
            Slot::F(_, i) | Slot::Phi(_, i) => (i.saturating_sub(1), (i + 1).min(m)),
            Slot::A(_, k) => (k, k + 1),
        };
        let window = |w: &Fields| {
            let (b, jo, fi) = window_terms(&w.0, &w.1, &w.2, &c, lo, hi);
            b + jo + fi
        };
        let orig = *cell(&mut work, slot);
        let mut at = |s: f64| {
            *cell(&mut work, slot) = orig + step * s;
            let e = window(&work);
            *cell(&mut work, slot) = orig;
            e
        };
        let fd = ((at(1.0) - at(-1.0)) * 8.0 - (at(2.0) - at(-2.0))) / (step * 12.0);
        let gj = f64::from(g[j]);
        worst = worst.max(f64::from(g[j] - fd).abs() / (gj.abs() + 1e-12));
    }
    Ok(worst)
}

fn random_direction(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Max over random pairs of |⟨Hu,v⟩ − ⟨u,Hv⟩| / (‖Hu‖‖v‖ + ‖u‖‖Hv‖).
pub fn hessian_symmetry(state: &LayeredState, params: &LdParameters, grid: &Grid1D, pairs: usize, seed: u64) -> f64 {
    let layout = DofLayout::new(params.num_gaps, grid.intervals);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let u = random_direction(layout.len(), &mut rng);
        let v = random_direction(layout.len(), &mut rng);
        let hu = hessian_apply_flat(state, params, grid, &layout, &u);
        let hv = hessian_apply_flat(state, params, grid, &layout, &v);
        let scale = norm(&hu) * norm(&v) + norm(&u) * norm(&hv);
        worst = worst.max((dot(&hu, &v) - dot(&u, &hv)).abs() / scale.max(f64::MIN_POSITIVE));
    }
    worst
}

/// ‖(∇Ω(x+εd) − ∇Ω(x−εd))/(2ε) − H d‖ / ‖H d‖ for a random direction d.
pub fn fd_hessian_check(state: &LayeredState, params: &LdParameters, grid: &Grid1D, eps: f64, seed: u64) -> f64 {
    let layout = DofLayout::new(params.num_gaps, grid.intervals);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = random_direction(layout.len(), &mut rng);
    let x = layout.pack(state);
    let shifted = |s: f64| {
        let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + s * b).collect();
        gradient_flat(&layout.unpack(state, &y), params, grid, &layout)
    };
    let gp = shifted(eps);
    let gm = shifted(-eps);
    let hd = hessian_apply_flat(state, params, grid, &layout, &d);
    let diff: Vec<f64> = gp.iter().zip(&gm).zip(&hd).map(|((p, m), h)| (p - m) / (2.0 * eps) - h).collect();
    norm(&diff) / norm(&hd)
}
