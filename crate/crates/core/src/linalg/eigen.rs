//! Eigenvalues of a symmetric band pencil (A, B) closest to a shift, by block inverse
//! iteration on (A − σB)⁻¹B with Rayleigh–Ritz extraction.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::band::{BandLu, BandMatrix};
use crate::error::{LdError, Result};

#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Eigenvalues closest to the shift, sorted ascending.
    pub values: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormalizes columns in the B inner product (two passes of Gram–Schmidt).
fn b_orthonormalize(cols: &mut Vec<Vec<f64>>, b: &BandMatrix) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    let mut bout: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for mut v in cols.drain(..) {
        for _ in 0..2 {
            for (q, bq) in out.iter().zip(&bout) {
                let c = dot(&v, bq);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let bv = b.matvec(&v);
        let nrm = dot(&v, &bv).sqrt();
        if nrm > 1e-300 && nrm.is_finite() {
            v.iter_mut().for_each(|x| *x /= nrm);
            let bv = b.matvec(&v);
            out.push(v);
            bout.push(bv);
        }
    }
    *cols = out;
}

/// The `count` eigenvalues of A x = λ B x closest to `shift`.
pub fn nearest_eigenvalues(a: &BandMatrix, b: &BandMatrix, shift: f64, count: usize, seed: u64) -> Result<EigenResult> {
    let n = a.dim();
    if count == 0 || count > n {
        return Err(LdError::InvalidParameters(format!("cannot extract {count} of {n} eigenvalues")));
    }
    let op = a.add_scaled(-shift, b);
    let lu = BandLu::factor(&op)?;
    if lu.pivot_ratio() < 1e-15 {
        return Err(LdError::FactorizationFailure(format!(
            "shifted operator is singular (pivot ratio {:e})",
            lu.pivot_ratio()
        )));
    }
    let q = (count + count.max(6)).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Vec<f64>> = (0..q).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    b_orthonormalize(&mut x, b);
    let mut prev: Vec<f64> = vec![f64::NAN; count];
    let max_iter = 1000;
    for it in 1..=max_iter {
        let mut y: Vec<Vec<f64>> = x.iter().map(|v| lu.solve(&b.matvec(v))).collect();
        b_orthonormalize(&mut y, b);
        let k = y.len();
        let ay: Vec<Vec<f64>> = y.iter().map(|v| a.matvec(v)).collect();
        let t = DMatrix::from_fn(k, k, |i, j| 0.5 * (dot(&y[i], &ay[j]) + dot(&y[j], &ay[i])));
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| {
            (eig.eigenvalues[i] - shift)
                .abs()
                .partial_cmp(&(eig.eigenvalues[j] - shift).abs())
                .unwrap()
        });
        x = order
            .iter()
            .map(|&c| {
                let mut v = vec![0.0; n];
                for (r, yr) in y.iter().enumerate() {
                    let w = eig.eigenvectors[(r, c)];
                    for (vi, yi) in v.iter_mut().zip(yr) {
                        *vi += w * yi;
                    }
                }
                v
            })
            .collect();
        let theta: Vec<f64> = order.iter().take(count).map(|&c| eig.eigenvalues[c]).collect();
        let scale = theta.iter().fold(shift.abs(), |m, v| m.max(v.abs())).max(1e-300);
        let change = theta.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let done = it >= 3 && change <= 1e-12 * scale;
        prev = theta;
        if done || it == max_iter {
            let mut values = prev.clone();
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            return Ok(EigenResult {
                values,
                iterations: it,
                converged: done,
            });
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_spectrum() {
        let n = 80;
        let mut a = BandMatrix::zeros(n, 1);
        for i in 0..n {
            a.set(i, i, 2.0);
            if i + 1 < n {
                a.set(i, i + 1, -1.0);
                a.set(i + 1, i, -1.0);
            }
        }
        a.set(0, 0, -0.5);
        let b = BandMatrix::from_diagonal(&vec![1.0; n]);
        let dense = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
        let mut want: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
        want.sort_by(|x, y| x.abs().partial_cmp(&y.abs()).unwrap());
        let mut want: Vec<f64> = want[..4].to_vec();
        want.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let got = nearest_eigenvalues(&a, &b, 0.0, 4, 1).unwrap();
        assert!(got.converged);
        for (w, g) in want.iter().zip(&got.values) {
            assert!((w - g).abs() < 1e-9, "{w} vs {g}");
        }
    }
}
