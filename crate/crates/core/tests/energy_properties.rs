use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ld_vortex::energy::{fd_gradient_check, fd_hessian_check, hessian_symmetry};
use ld_vortex::linalg::nearest_eigenvalues;
use ld_vortex::minimize::{assemble_hessian, lumped_mass_matrix};
use ld_vortex::model::{
    gauge_transform, observables, random_rough_state, random_start, zero_coupling_minimizer, Grid1D, LayeredState,
    LdParameters, PhaseConfig,
};
use ld_vortex::total_energy;
use ld_vortex::validity::lambda_lower;

fn params_strategy() -> impl Strategy<Value = LdParameters> {
    (1usize..=3, 0.5f64..3.0, 0.2f64..1.0, 0.5f64..4.0, 0.5f64..6.0, 0.0f64..0.05)
        .prop_map(|(n, l, p, k, h, r)| LdParameters::new(n, l, p, k, h, r))
}

fn grid(params: &LdParameters, m: usize) -> Grid1D {
    Grid1D::new(params.half_width, m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_and_observables_are_gauge_invariant(params in params_strategy(), m in 16usize..60, seed in any::<u64>()) {
        let g = grid(&params, m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = random_rough_state(&params, &g, &mut rng);
        let chi: Vec<f64> = (0..=m).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let moved = gauge_transform(&st, &chi, &g);
        let e0 = total_energy(&st, &params, &g).unwrap().total;
        let e1 = total_energy(&moved, &params, &g).unwrap().total;
        prop_assert!((e0 - e1).abs() <= 1e-13 * e0.abs());
        let (o0, o1) = (observables(&st, &params, &g).unwrap(), observables(&moved, &params, &g).unwrap());
        let scale = o0.V.iter().chain(o0.h.iter()).fold(1.0f64, |s, v| s.max(v.abs()));
        for (a, b) in [(&o0.f, &o1.f), (&o0.V, &o1.V), (&o0.h, &o1.h), (&o0.jz, &o1.jz), (&o0.jx, &o1.jx)] {
            prop_assert!(a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= 1e-11 * scale));
        }
        // gauge-invariant phase differences agree modulo 2π
        let phase_ok = o0.Phi.iter().zip(o1.Phi.iter()).all(|(x, y)| {
            let d = (x - y).rem_euclid(std::f64::consts::TAU);
            d.min(std::f64::consts::TAU - d) <= 1e-10
        });
        prop_assert!(phase_ok);
    }

    #[test]
    fn regauging_produces_a_fixed_state_idempotently(params in params_strategy(), m in 16usize..40, seed in any::<u64>()) {
        let g = grid(&params, m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut st = random_rough_state(&params, &g, &mut rng);
        let chi: Vec<f64> = (0..=m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        st = gauge_transform(&st, &chi, &g);
        let once = st.gauge_fixed(&g);
        prop_assert!(once.phi.row(0).iter().all(|v| *v == 0.0));
        let twice = once.gauge_fixed(&g);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn every_component_is_nonnegative(params in params_strategy(), m in 16usize..60, seed in any::<u64>()) {
        let g = grid(&params, m);
        let st = random_rough_state(&params, &g, &mut ChaCha8Rng::seed_from_u64(seed));
        let e = total_energy(&st, &params, &g).unwrap();
        prop_assert!(e.bulk >= 0.0 && e.josephson >= 0.0 && e.field >= 0.0);
        prop_assert!((e.total - (e.bulk + e.josephson + e.field)).abs() <= 1e-12 * e.total);
    }

    #[test]
    fn energy_is_nondecreasing_in_coupling(params in params_strategy(), seed in any::<u64>(), r1 in 0.0f64..0.1, r2 in 0.0f64..0.1) {
        let g = grid(&params, 30);
        let st = random_start(&params, &g, &mut ChaCha8Rng::seed_from_u64(seed));
        let (lo, hi) = (r1.min(r2), r1.max(r2));
        let e_lo = total_energy(&st, &params.with_coupling(lo), &g).unwrap();
        let e_hi = total_energy(&st, &params.with_coupling(hi), &g).unwrap();
        prop_assert!(e_hi.total >= e_lo.total);
        prop_assert!(e_hi.bulk == e_lo.bulk && e_hi.field == e_lo.field);
    }

    #[test]
    fn gradient_matches_finite_differences(params in params_strategy(), m in 16usize..40, seed in any::<u64>()) {
        let g = grid(&params, m);
        let st = random_rough_state(&params, &g, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(fd_gradient_check(&st, &params, &g, 1e-6).unwrap() <= 1e-6);
    }

    #[test]
    fn hessian_is_symmetric_and_matches_gradient_differences(params in params_strategy(), m in 16usize..40, seed in any::<u64>()) {
        let g = grid(&params, m);
        let st = random_rough_state(&params, &g, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(hessian_symmetry(&st, &params, &g, 5, seed) <= 1e-10);
        prop_assert!(fd_hessian_check(&st, &params, &g, 1e-5, seed) <= 1e-5);
    }

    #[test]
    fn zero_coupling_minimizer_has_no_energy(params in params_strategy(), m in 16usize..60, d in prop::collection::vec(-3.2f64..3.2, 3)) {
        let p = params.with_coupling(0.0);
        let g = grid(&p, m);
        let delta = PhaseConfig::new(d[..p.num_gaps].to_vec());
        let st = zero_coupling_minimizer(&p, &g, &delta);
        prop_assert!(total_energy(&st, &p, &g).unwrap().total <= 1e-12);
    }
}

#[test]
fn fd_check_rejects_bad_steps() {
    let p = LdParameters::desk();
    let g = grid(&p, 20);
    let st = zero_coupling_minimizer(&p, &g, &PhaseConfig::zeros(2));
    assert!(fd_gradient_check(&st, &p, &g, 1e-2).is_err());
    assert!(fd_gradient_check(&st, &p, &g, 1e-12).is_err());
}

/// Smooth state sampled from fixed profiles, so refinements approximate one continuum state.
fn manufactured(params: &LdParameters, g: &Grid1D) -> LayeredState {
    let np = params.planes();
    let m = g.intervals;
    let x = g.nodes();
    let xm = g.midpoints();
    let f = Array2::from_shape_fn((np, m + 1), |(n, i)| 1.0 - 0.1 * (n as f64 + 1.0) * (x[i]).cos().powi(2));
    let phi = Array2::from_shape_fn((np, m + 1), |(n, i)| {
        if n == 0 {
            0.0
        } else {
            n as f64 * (params.spacing * params.applied_field * x[i] + 0.3 * (2.0 * x[i]).sin())
        }
    });
    let a = Array2::from_shape_fn((np, m), |(n, k)| {
        n as f64 * params.spacing * params.applied_field * (1.0 + 0.2 * xm[k] * xm[k])
    });
    LayeredState {
        f,
        phi,
        a,
        gauge_fixed: true,
    }
}

#[test]
fn discretization_is_second_order() {
    let p = LdParameters::new(2, 1.0, 0.5, 1.0, 3.0, 0.05);
    let e: Vec<f64> = [20, 40, 80, 160]
        .iter()
        .map(|&m| {
            let g = grid(&p, m);
            total_energy(&manufactured(&p, &g), &p, &g).unwrap().total
        })
        .collect();
    for w in e.windows(3) {
        let ratio = (w[0] - w[1]).abs() / (w[1] - w[2]).abs();
        assert!(ratio >= 3.6, "refinement ratio {ratio}");
    }
}

#[test]
fn zero_coupling_kernel_is_the_constant_phase_shifts() {
    for n in 1..=3 {
        let p = LdParameters::new(n, 1.0, 0.5, 1.0, 3.0, 0.0);
        let g = grid(&p, 60);
        let st = zero_coupling_minimizer(&p, &g, &PhaseConfig::zeros(n));
        let h = assemble_hessian(&st, &p, &g);
        let res = nearest_eigenvalues(&h, &lumped_mass_matrix(&p, &g), -0.01, n + 1, 7).unwrap();
        assert!(res.converged);
        let mut mags: Vec<f64> = res.values.iter().map(|v| v.abs()).collect();
        mags.sort_by(f64::total_cmp);
        assert!(mags[..n].iter().all(|&v| v <= 1e-10), "{mags:?}");
        assert!(mags[n] >= lambda_lower(&p).unwrap() / 2.0, "{mags:?}");
    }
}
