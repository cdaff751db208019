use std::f64::consts::PI;

use proptest::prelude::*;

use ld_vortex::model::{Grid1D, LdParameters};
use ld_vortex::validity::{
    c0, f_dip_threshold, k_factor, lambda_lower, lambda_upper, numerical_gap, radius_lhs, rstar_lower,
    trace_inequality_ratio, validity_report,
};
use ld_vortex::LdError;

fn params(n: usize, l: f64, p: f64, kappa: f64, h: f64) -> LdParameters {
    LdParameters::new(n, l, p, kappa, h, 1e-3)
}

fn logspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| lo * (hi / lo).powf(i as f64 / (k - 1) as f64)).collect()
}

#[test]
fn elliptic_constant() {
    let oracle = 2.0 * (1.0 + 4.0 / (PI * PI) / 5.0f64).powi(2);
    assert!((c0(&params(2, 1.0, 0.5, 1.0, 3.0)) - oracle).abs() < 1e-14);
    assert!((oracle - 2.3374).abs() < 1e-3);
    assert!((c0(&params(2, 1e-8, 0.5, 1.0, 3.0)) - 2.0).abs() < 1e-12);
    let ls = logspace(0.01, 100.0, 40);
    let v: Vec<f64> = ls.iter().map(|&l| c0(&params(3, l, 0.7, 1.0, 3.0))).collect();
    assert!(v.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn gap_lower_bound() {
    let lb = lambda_lower(&params(2, 1.0, 0.5, 1.0, 3.0)).unwrap();
    assert!((lb - 0.25 / (1.0 + 4.0 / (PI * PI)).powi(3)).abs() < 1e-15);
    assert!((lb - 0.09009).abs() < 1e-5);
    for n in 1..=6 {
        assert_eq!(lambda_lower(&params(n, 1.7, 0.5, 2.0, 3.0)).unwrap(), lambda_lower(&params(1, 1.7, 0.5, 2.0, 3.0)).unwrap());
    }
    let by_kappa: Vec<f64> = logspace(1.0, 50.0, 20).iter().map(|&k| lambda_lower(&params(2, 2.0, 0.5, k, 3.0)).unwrap()).collect();
    assert!(by_kappa.windows(2).all(|w| w[1] < w[0]));
    let by_l: Vec<f64> = logspace(1.0, 50.0, 20).iter().map(|&l| lambda_lower(&params(2, l, 0.5, 2.0, 3.0)).unwrap()).collect();
    assert!(by_l.windows(2).all(|w| w[1] < w[0]));
    assert!(matches!(lambda_lower(&params(2, 1.0, 0.5, 0.5, 3.0)), Err(LdError::DomainError(_))));
}

#[test]
fn gap_upper_bound() {
    assert_eq!(lambda_upper(&params(2, 3.0, 0.5, 2.0, 3.0)), 0.5);
    assert!(lambda_upper(&params(2, 1e6, 0.5, 2.0, 3.0)) < 1e-11);
    for &l in &logspace(1.0, 100.0, 10) {
        for &k in &logspace(1.0, 100.0, 10) {
            for p in [0.2, 0.4, 0.6, 0.8, 1.0] {
                let q = params(2, l, p, k, 3.0);
                assert!(lambda_lower(&q).unwrap() <= lambda_upper(&q), "L={l} kappa={k} p={p}");
            }
        }
    }
}

#[test]
fn k_factor_examples() {
    let q = params(2, 1.0, 0.5, 1.0, 2.0);
    assert_eq!(k_factor(&q, 0.0), 1.0);
    assert_eq!(k_factor(&q, 1.0), 4.0);
    let d = params(2, 1.0, 0.5, 1.0, 3.0);
    assert!((k_factor(&d, 0.0) - 1.0 / 1.5).abs() < 1e-15);
    let ks: Vec<f64> = (0..50).map(|i| k_factor(&d, i as f64 * 0.02)).collect();
    assert!(ks.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn radius_bound() {
    let q = params(2, 1.0, 0.5, 1.0, 3.0);
    let lam = lambda_lower(&q).unwrap();
    let rs = rstar_lower(&q).unwrap();
    assert!(rs > 0.0 && rs <= lam);
    assert!((radius_lhs(&q, rs) - lam).abs() <= 1e-10 * lam);
    for n in 1..=5 {
        assert_eq!(rstar_lower(&params(n, 1.0, 0.5, 1.0, 3.0)).unwrap(), rs);
    }
    let trend = |f: &dyn Fn(f64) -> LdParameters, xs: &[f64]| -> Vec<f64> {
        xs.iter().map(|&x| rstar_lower(&f(x)).unwrap()).collect()
    };
    let xs = logspace(1.0, 20.0, 12);
    let by_l = trend(&|l| params(2, l, 0.5, 1.0, 3.0), &xs);
    let by_k = trend(&|k| params(2, 1.0, 0.5, k, 3.0), &xs);
    let by_h = trend(&|h| params(2, 1.0, 0.5, 1.0, h), &xs);
    assert!(by_l.windows(2).all(|w| w[1] < w[0]));
    assert!(by_k.windows(2).all(|w| w[1] < w[0]));
    assert!(by_h.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn amplitude_dip_threshold() {
    let q = params(2, 1.0, 0.5, 1.0, 3.0);
    let r1 = f_dip_threshold(&q, 1.0).unwrap();
    let r2 = f_dip_threshold(&q, 2.0).unwrap();
    assert!(r2 < r1);
    let k2 = q.kappa * q.kappa;
    let resid = (r1 * (1.0 + r1 * k2 * k_factor(&q, r1).powi(2)) - 0.5).abs();
    assert!(resid <= 1e-10);
    // K → 0 as Hp grows
    let big = params(2, 1.0, 0.5, 1.0, 1e9);
    for c_u in [0.5, 1.0, 3.0] {
        assert!((f_dip_threshold(&big, c_u).unwrap() - 0.5 / c_u).abs() < 1e-6);
    }
    assert!(matches!(f_dip_threshold(&q, 0.0), Err(LdError::InvalidParameters(_))));
}

#[test]
fn report_is_finite_and_consistent() {
    let q = params(2, 1.0, 0.5, 1.0, 3.0);
    let rep = validity_report(&q, 1.0, 1.0).unwrap();
    assert!(rep.c0.is_finite() && rep.rstar_lower > 0.0 && rep.f_dip_threshold > 0.0);
    assert!(rep.lambda_lower <= rep.lambda_upper);
    assert!((rep.energy_upper_bound - 2.0 * 2.0 * 0.5 * (1.0 + 1.0 / 1.5)).abs() < 1e-14);
}

#[test]
fn discrete_gap() {
    let q = params(1, 1.0, 0.5, 1.0, 3.0);
    let gap = |q: &LdParameters, m: usize| numerical_gap(q, &Grid1D::new(q.half_width, m).unwrap()).unwrap();
    let g100 = gap(&q, 100);
    assert!(g100.is_finite() && g100 > 0.0);
    let g200 = gap(&q, 200);
    assert!((g100 - g200).abs() <= 0.02 * g200, "{g100} vs {g200}");
    let wide = params(1, 2.0, 0.5, 1.0, 3.0);
    assert!(gap(&wide, 200) < g100);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn trace_inequality_holds(n in 1usize..=4, p in 0.1f64..=1.0, l in 1.0f64..4.0, m in 16usize..60, seed in any::<u64>()) {
        let q = params(n, l, p, 1.0, 3.0);
        let ratio = trace_inequality_ratio(&q, &Grid1D::new(l, m).unwrap(), 20, seed);
        prop_assert!(ratio <= 1.0, "ratio {}", ratio);
    }
}
