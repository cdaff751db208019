use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ld_vortex::harness::relax;
use ld_vortex::minimize::{default_newton_tol, inertia, minimize, newton_critical};
use ld_vortex::model::{observables, random_start, zero_coupling_minimizer, Grid1D, LdParameters, PhaseConfig};
use ld_vortex::perturbation::{enumerate_seeds, seed_state, vortex_plane_config};
use ld_vortex::LdError;

fn desk_grid(p: &LdParameters, m: usize) -> Grid1D {
    Grid1D::new(p.half_width, m).unwrap()
}

#[test]
fn descent_energy_never_increases() {
    let p = LdParameters::desk();
    let g = desk_grid(&p, 40);
    for seed in 0..4 {
        let st = random_start(&p, &g, &mut ChaCha8Rng::seed_from_u64(seed));
        let rep = minimize(&st, &p, &g, 1e-8, 20_000).unwrap();
        assert!(rep.converged);
        let e = rep.energy_trace();
        assert!(e.windows(2).all(|w| w[1] <= w[0]), "seed {seed}");
        assert!((rep.energy - e[e.len() - 1]).abs() <= 1e-15 * rep.energy.abs().max(1.0));
    }
}

#[test]
fn loose_tolerance_returns_immediately() {
    let p = LdParameters::desk();
    let g = desk_grid(&p, 30);
    let st = random_start(&p, &g, &mut ChaCha8Rng::seed_from_u64(1));
    let rep = minimize(&st, &p, &g, f64::INFINITY, 100).unwrap();
    assert_eq!(rep.iterations, 0);
    assert!(rep.converged);
    assert_eq!(rep.state, st);
}

#[test]
fn iteration_cap_is_reported_not_thrown() {
    let p = LdParameters::desk();
    let g = desk_grid(&p, 30);
    let st = random_start(&p, &g, &mut ChaCha8Rng::seed_from_u64(2));
    let rep = minimize(&st, &p, &g, 1e-14, 3).unwrap();
    assert!(!rep.converged);
    assert_eq!(rep.iterations, 3);
}

#[test]
fn newton_tail_is_quadratic() {
    let p = LdParameters::desk();
    let g = desk_grid(&p, 60);
    let seed = seed_state(&p, &g, &vortex_plane_config(&p).unwrap());
    // knock the seed off far enough that Newton needs several steps
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut st = seed.clone();
    for v in st.f.iter_mut() {
        *v += 2e-3 * rng.gen_range(-1.0..1.0);
    }
    for v in st.phi.rows_mut().into_iter().skip(1).flat_map(|r| r.into_iter()) {
        *v += 2e-3 * rng.gen_range(-1.0..1.0);
    }
    let cp = newton_critical(&st, &p, &g, 1e-10).unwrap();
    // last three residuals above the round-off floor, the middle one already below 1e-4
    let h = &cp.residual_history;
    let end = h.iter().rposition(|&r| r > 1e-11).unwrap();
    assert!(end >= 2 && h[end - 1] < 1e-4, "{h:?}");
    let last = &h[end - 2..=end];
    let slope = (last[2].ln() - last[1].ln()) / (last[1].ln() - last[0].ln());
    assert!(slope >= 1.8, "{:?} slope {slope}", cp.residual_history);
}

#[test]
fn newton_is_singular_without_coupling() {
    let p = LdParameters::desk().with_coupling(0.0);
    let g = desk_grid(&p, 30);
    let st = zero_coupling_minimizer(&p, &g, &PhaseConfig::zeros(2));
    assert!(matches!(newton_critical(&st, &p, &g, 1e-10), Err(LdError::SingularHessian(_))));
}

#[test]
fn newton_tolerance_default() {
    assert!((default_newton_tol(&LdParameters::desk()) - 1e-7).abs() < 1e-20);
    assert_eq!(default_newton_tol(&LdParameters::desk().with_coupling(1e-9)), 1e-10);
}

#[test]
fn inertia_needs_enough_eigenvalues() {
    let p = LdParameters::desk();
    let g = desk_grid(&p, 30);
    let st = seed_state(&p, &g, &vortex_plane_config(&p).unwrap());
    assert!(inertia(&st, &p, &g, 2).is_err());
}

#[test]
fn every_seed_converges_to_its_predicted_inertia() {
    let p = LdParameters::desk();
    let g = desk_grid(&p, 60);
    for s in enumerate_seeds(&p).unwrap() {
        let cp = newton_critical(&seed_state(&p, &g, &s.config()), &p, &g, 1e-10).unwrap();
        assert_eq!(cp.inertia, s.inertia, "{:?}", s.delta);
        assert!(cp.delta_hat.circular_distance(&s.config()) < 0.05);
        assert!(cp.residual <= 1e-10);
    }
}

#[test]
fn minimizer_is_symmetric_under_layer_reversal() {
    let r = 1e-3;
    let p = LdParameters::new(3, 1.0, 0.5, 1.0, 3.0, r);
    let g = desk_grid(&p, 60);
    let cp = relax(&seed_state(&p, &g, &vortex_plane_config(&p).unwrap()), &p, &g).unwrap();
    let obs = observables(&cp.state, &p, &g).unwrap();
    let n = p.num_gaps;
    let tol = 10.0 * r * r + 1e-8;
    // interior planes n ↦ N − n
    for k in 1..n {
        let d = (&obs.f.row(k) - &obs.f.row(n - k)).mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
        assert!(d <= tol, "plane {k}: {d}");
    }
    // gaps g ↦ N + 1 − g
    for k in 0..n {
        let d = (&obs.h.row(k) - &obs.h.row(n - 1 - k)).mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
        assert!(d <= tol, "gap {}: {d}", k + 1);
    }
}

#[test]
fn converged_amplitudes_obey_the_maximum_principle() {
    let p = LdParameters::desk();
    let g = desk_grid(&p, 60);
    for s in enumerate_seeds(&p).unwrap() {
        let cp = newton_critical(&seed_state(&p, &g, &s.config()), &p, &g, 1e-10).unwrap();
        let (lo, hi) = (cp.state.min_amplitude(), cp.state.max_amplitude());
        assert!(hi < 1.0 && lo > 0.0);
        assert!((1.0 - lo) / p.coupling.sqrt() <= 10.0);
    }
}
