//! Explicit bounds on the expansion radius and the spectral gap of the r = 0 linearization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{LdError, Result};
use crate::linalg::{nearest_eigenvalues, BandMatrix};
use crate::minimize::assemble_hessian;
use crate::model::{zero_coupling_minimizer, DofLayout, Grid1D, LdParameters, PhaseConfig};

/// Elliptic constant 2·[1 + (4/π²)·L²N²p²/(N²p² + 4L²)]².
pub fn c0(params: &LdParameters) -> f64 {
    let l2 = params.half_width.powi(2);
    let np2 = (params.num_gaps as f64 * params.spacing).powi(2);
    let bracket = 1.0 + 4.0 / (PI * PI) * l2 * np2 / (np2 + 4.0 * l2);
    2.0 * bracket * bracket
}

/// Lower bound (1/(4κ²))·min{1, (1 + 4L²/π²)^−3} on the spectral gap.
pub fn lambda_lower(params: &LdParameters) -> Result<f64> {
    let k = params.kappa;
    let l = params.half_width;
    if k < 1.0 {
        return Err(LdError::DomainError(format!("kappa = {k} < 1")));
    }
    if l < 1.0 {
        return Err(LdError::DomainError(format!("L = {l} < 1")));
    }
    Ok((1.0f64).min((1.0 + 4.0 * l * l / (PI * PI)).powi(-3)) / (4.0 * k * k))
}

/// Upper bound 9/(2κ²p²L²) on the spectral gap.
pub fn lambda_upper(params: &LdParameters) -> f64 {
    9.0 / (2.0 * (params.kappa * params.spacing * params.half_width).powi(2))
}

/// K(r) = (1/(Hp))(1 + rL²κ²)(1 + rL).
pub fn k_factor(params: &LdParameters, r: f64) -> f64 {
    let l = params.half_width;
    (1.0 + r * l * l * params.kappa * params.kappa) * (1.0 + r * l) / params.hp()
}

/// Root of an increasing function on [lo, hi] with g(lo) ≤ 0 ≤ g(hi).
fn bisect<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= rel_tol * hi.abs() {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Left side of the radius relation r·[1 + K(r)(1 + rκ²K(r))].
pub fn radius_lhs(params: &LdParameters, r: f64) -> f64 {
    let k = k_factor(params, r);
    r * (1.0 + k * (1.0 + r * params.kappa * params.kappa * k))
}

/// Lower bound on the expansion radius: the root of radius_lhs(r) = λ_lb in [0, λ_lb].
pub fn rstar_lower(params: &LdParameters) -> Result<f64> {
    let lam = lambda_lower(params)?;
    Ok(bisect(|r| radius_lhs(params, r) - lam, 0.0, lam, 1e-15))
}

/// Coupling above which the a-priori bound allows f to dip below ½:
/// the root of C_u·r·[1 + rκ²K(r)²] = ½.
pub fn f_dip_threshold(params: &LdParameters, c_u: f64) -> Result<f64> {
    if !(c_u > 0.0) {
        return Err(LdError::InvalidParameters(format!("C_u = {c_u} must be positive")));
    }
    let k2 = params.kappa * params.kappa;
    let g = |r: f64| c_u * r * (1.0 + r * k2 * k_factor(params, r).powi(2)) - 0.5;
    Ok(bisect(g, 0.0, 0.5 / c_u, 1e-15))
}

/// Gram matrix of the discrete energy norm on the free DOFs, in gauge-covariant form.
///
/// Amplitude: p·(‖u‖² + ‖u′‖²) per plane. Phase: p·‖φ‖² plus the covariant derivative
/// p·‖φ′ − a‖². Tangential potential, interpolated linearly in z across each gap: its L² norm
/// plus ‖curl‖². The curl replaces the full H¹ norm (equivalent through C₀ in the Coulomb
/// gauge); in the layered gauge ‖∂ₓa‖ would admit spurious mesh-scale modes.
pub fn energy_norm_gram(params: &LdParameters, grid: &Grid1D) -> BandMatrix {
    let layout = DofLayout::new(params.num_gaps, grid.intervals);
    let np = params.num_gaps + 1;
    let m = grid.intervals;
    let dx = grid.dx;
    let p = params.spacing;
    let mut b = BandMatrix::zeros(layout.len(), layout.bandwidth());
    for n in 0..np {
        for i in 0..=m {
            b.add(layout.f(n, i), layout.f(n, i), p * grid.weight(i));
            if n > 0 {
                b.add(layout.phi(n, i), layout.phi(n, i), p * grid.weight(i));
            }
        }
        for k in 0..m {
            let (l, r) = (layout.f(n, k), layout.f(n, k + 1));
            let s = p / dx;
            b.add(l, l, s);
            b.add(r, r, s);
            b.add(l, r, -s);
            b.add(r, l, -s);
            // V = (φ_{k+1} − φ_k)/dx − a_k, with φ_0 ≡ 0 fixed
            let mut v: Vec<(usize, f64)> = vec![(layout.a(n, k), -1.0)];
            if n > 0 {
                v.push((layout.phi(n, k), -1.0 / dx));
                v.push((layout.phi(n, k + 1), 1.0 / dx));
            }
            for &(i, ci) in &v {
                for &(j, cj) in &v {
                    b.add(i, j, p * dx * ci * cj);
                }
            }
        }
    }
    add_gap_blocks(&mut b, &layout, params, grid, false);
    b
}

/// Per-gap blocks of the tangential potential: z-mass p/3·[[1, ½], [½, 1]], the z-derivative
/// (curl) 1/p·[[1, −1], [−1, 1]], and optionally the x-derivative.
fn add_gap_blocks(b: &mut BandMatrix, layout: &DofLayout, params: &LdParameters, grid: &Grid1D, with_dx: bool) {
    let m = grid.intervals;
    let dx = grid.dx;
    let p = params.spacing;
    let zmass = [[p / 3.0, p / 6.0], [p / 6.0, p / 3.0]];
    for g in 0..params.num_gaps {
        for k in 0..m {
            let idx = [layout.a(g, k), layout.a(g + 1, k)];
            for s in 0..2 {
                for t in 0..2 {
                    let dz = if s == t { 1.0 / p } else { -1.0 / p };
                    b.add(idx[s], idx[t], dx * (zmass[s][t] + dz));
                }
            }
        }
        if !with_dx {
            continue;
        }
        for k in 0..m.saturating_sub(1) {
            let lo = [layout.a(g, k), layout.a(g + 1, k)];
            let hi = [layout.a(g, k + 1), layout.a(g + 1, k + 1)];
            for s in 0..2 {
                for t in 0..2 {
                    let c = zmass[s][t] / dx;
                    b.add(lo[s], lo[t], c);
                    b.add(hi[s], hi[t], c);
                    b.add(lo[s], hi[t], -c);
                    b.add(hi[s], lo[t], -c);
                }
            }
        }
    }
}

/// Full H¹ Gram matrix of the tangential potential alone (other DOFs get zero rows).
fn tangential_h1_gram(params: &LdParameters, grid: &Grid1D) -> BandMatrix {
    let layout = DofLayout::new(params.num_gaps, grid.intervals);
    let mut b = BandMatrix::zeros(layout.len(), layout.bandwidth());
    add_gap_blocks(&mut b, &layout, params, grid, true);
    b
}

const GAP_SHIFT: f64 = -0.01;
const GAP_SEED: u64 = 0x9a9;

/// Discrete spectral gap at the r = 0 minimizer.
///
/// The (N+1)-th smallest eigenvalue of the second-variation form ½·D²Ω₀ relative to
/// [`energy_norm_gram`]; the first N eigenvalues are the zero modes along the phase manifold.
pub fn numerical_gap(params: &LdParameters, grid: &Grid1D) -> Result<f64> {
    let p0 = (*params).with_coupling(0.0);
    let s = zero_coupling_minimizer(&p0, grid, &PhaseConfig::zeros(p0.num_gaps));
    let h = assemble_hessian(&s, &p0, grid);
    let b = energy_norm_gram(&p0, grid);
    let eig = nearest_eigenvalues(&h, &b, GAP_SHIFT, p0.num_gaps + 1, GAP_SEED)?;
    if !eig.converged {
        return Err(LdError::FactorizationFailure("eigen-iteration did not converge".into()));
    }
    Ok(0.5 * eig.values[p0.num_gaps])
}

/// Worst ratio, over random tangential fields, of p·Σ_n‖a(·, z_n)‖² to
/// ((p+1)(N+1)/N)·‖a‖²_{H¹}; the trace inequality asserts it is at most 1.
pub fn trace_inequality_ratio(params: &LdParameters, grid: &Grid1D, samples: usize, seed: u64) -> f64 {
    let layout = DofLayout::new(params.num_gaps, grid.intervals);
    let gram = tangential_h1_gram(params, grid);
    let np = params.num_gaps + 1;
    let m = grid.intervals;
    let p = params.spacing;
    let n = params.num_gaps as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for s in 0..samples {
        let mut v = vec![0.0; layout.len()];
        let smooth = s % 2 == 0;
        for plane in 0..np {
            let (amp, freq, phase) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..3.0), rng.gen_range(0.0..PI));
            for k in 0..m {
                v[layout.a(plane, k)] = if smooth {
                    amp * (freq * grid.midpoint(k) + phase).cos()
                } else {
                    rng.gen_range(-1.0..1.0)
                };
            }
        }
        let trace: f64 = (0..np).flat_map(|pl| (0..m).map(move |k| (pl, k))).map(|(pl, k)| {
            let x = v[layout.a(pl, k)];
            p * grid.dx * x * x
        }).sum();
        let bv = gram.matvec(&v);
        let h1: f64 = v.iter().zip(&bv).map(|(a, b)| a * b).sum();
        worst = worst.max(trace / ((p + 1.0) * (n + 1.0) / n * h1));
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub params: LdParameters,
    #[serde(rename = "C0")]
    pub c0: f64,
    pub lambda_lower: f64,
    pub lambda_upper: f64,
    pub k_at_rstar: f64,
    pub rstar_lower: f64,
    pub f_dip_threshold: f64,
    /// Coefficient of r in the energy upper bound 2Np(L + 1/(pH))·r.
    pub energy_upper_bound: f64,
    #[serde(rename = "C_u")]
    pub c_u: f64,
    pub c: f64,
    /// Discrete spectral gap, when computed.
    pub numerical_gap: Option<f64>,
}

/// Evaluates every bound; `c_u` and `c` are the unspecified order-one constants.
pub fn validity_report(params: &LdParameters, c_u: f64, c: f64) -> Result<ValidityReport> {
    let rstar = rstar_lower(params)?;
    Ok(ValidityReport {
        params: *params,
        c0: c0(params),
        lambda_lower: lambda_lower(params)?,
        lambda_upper: lambda_upper(params),
        k_at_rstar: k_factor(params, rstar),
        rstar_lower: rstar,
        f_dip_threshold: f_dip_threshold(params, c_u)?,
        energy_upper_bound: params.energy_bound_coefficient(),
        c_u,
        c,
        numerical_gap: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
struct TableRow {
    N: usize,
    L: f64,
    p: f64,
    kappa: f64,
    H: f64,
    C0: f64,
    lambda_lower: f64,
    lambda_upper: f64,
    rstar_lower: f64,
    f_dip_threshold: f64,
    energy_upper_bound: f64,
}

/// CSV table of reports, one row per parameter set.
pub fn write_validity_csv<W: std::io::Write>(reports: &[ValidityReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(TableRow {
            N: r.params.num_gaps,
            L: r.params.half_width,
            p: r.params.spacing,
            kappa: r.params.kappa,
            H: r.params.applied_field,
            C0: r.c0,
            lambda_lower: r.lambda_lower,
            lambda_upper: r.lambda_upper,
            rstar_lower: r.rstar_lower,
            f_dip_threshold: r.f_dip_threshold,
            energy_upper_bound: r.energy_upper_bound,
        })
        .map_err(|e| LdError::Parse(e.to_string()))?;
    }
    w.flush().map_err(|e| LdError::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_values() {
        let p = LdParameters::desk();
        assert!((c0(&p) - 2.3374).abs() < 1e-3);
        assert!((lambda_lower(&p).unwrap() - 0.0901).abs() < 1e-3);
        let q = LdParameters::new(2, 3.0, 0.5, 2.0, 3.0, 0.0);
        assert_eq!(lambda_upper(&q), 0.5);
        assert!((k_factor(&LdParameters::new(1, 1.0, 0.5, 1.0, 2.0, 0.0), 1.0) - 4.0).abs() < 1e-15);
        assert!(lambda_lower(&p.with_gaps(1)).is_ok());
        assert!(lambda_lower(&LdParameters::new(1, 1.0, 0.5, 0.5, 2.0, 0.0)).is_err());
    }

    #[test]
    fn radius_root_is_accurate() {
        let p = LdParameters::desk();
        let lam = lambda_lower(&p).unwrap();
        let r = rstar_lower(&p).unwrap();
        assert!(r > 0.0 && r <= lam);
        assert!((radius_lhs(&p, r) - lam).abs() <= 1e-10 * lam);
        let t = f_dip_threshold(&p, 1.0).unwrap();
        assert!((t * (1.0 + t * k_factor(&p, t).powi(2)) - 0.5).abs() < 1e-10);
        assert!(f_dip_threshold(&p, 2.0).unwrap() < t);
    }

    #[test]
    fn gap_is_positive_and_trace_inequality_holds() {
        let p = LdParameters::desk().with_gaps(1);
        let g = Grid1D::new(1.0, 40).unwrap();
        let gap = numerical_gap(&p, &g).unwrap();
        assert!(gap.is_finite() && gap > 0.0);
        assert!(trace_inequality_ratio(&LdParameters::desk(), &g, 20, 3) <= 1.0);
    }
}
