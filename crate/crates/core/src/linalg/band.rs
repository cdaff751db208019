//! Square band matrices and LU factorization with partial pivoting.

use crate::error::{LdError, Result};

/// Square matrix with equal lower and upper half-bandwidth `bw`, stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (2 * bw + 1)],
        }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), 0);
        m.data.copy_from_slice(d);
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i.abs_diff(j) > self.bw || i >= self.n || j >= self.n {
            None
        } else {
            Some(i * (2 * self.bw + 1) + j + self.bw - i)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Sets an entry; panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside the band");
        self.data[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside the band");
        self.data[s] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let w = 2 * self.bw + 1;
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.bw);
                let hi = (i + self.bw).min(self.n - 1);
                let row = &self.data[i * w..(i + 1) * w];
                (lo..=hi).map(|j| row[j + self.bw - i] * x[j]).sum()
            })
            .collect()
    }

    /// self + s·other (other's bandwidth must not exceed ours).
    pub fn add_scaled(&self, s: f64, other: &BandMatrix) -> BandMatrix {
        assert!(other.bw <= self.bw && other.n == self.n);
        let mut out = self.clone();
        for i in 0..self.n {
            let lo = i.saturating_sub(other.bw);
            let hi = (i + other.bw).min(self.n - 1);
            for j in lo..=hi {
                out.add(i, j, s * other.get(i, j));
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest |A_ij − A_ji| relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i + 1..=(i + self.bw).min(self.n - 1) {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst / self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Assembles a band operator from matrix-vector products by column colouring.
    pub fn from_operator<F: FnMut(&[f64]) -> Vec<f64>>(n: usize, bw: usize, mut apply: F) -> Self {
        let mut m = Self::zeros(n, bw);
        let stride = 2 * bw + 1;
        let mut probe = vec![0.0; n];
        for colour in 0..stride.min(n) {
            for j in (colour..n).step_by(stride) {
                probe[j] = 1.0;
            }
            let out = apply(&probe);
            for j in (colour..n).step_by(stride) {
                probe[j] = 0.0;
                let lo = j.saturating_sub(bw);
                let hi = (j + bw).min(n - 1);
                for i in lo..=hi {
                    m.set(i, j, out[i]);
                }
            }
        }
        m
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }
}

/// LU factors with row interchanges, stored in band form (upper bandwidth grows to 2·bw).
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
    min_pivot: f64,
    max_pivot: f64,
}

impl BandLu {
    pub fn factor(a: &BandMatrix) -> Result<Self> {
        let n = a.n;
        let kl = a.bw;
        let ku = 2 * kl;
        let width = kl + ku + 1;
        let mut data = vec![0.0; n * width];
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + kl).min(n.saturating_sub(1));
            for j in lo..=hi {
                data[i * width + j + kl - i] = a.get(i, j);
            }
        }
        let at = |i: usize, j: usize| i * width + j + kl - i;
        let mut pivots = vec![0; n];
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot: f64 = 0.0;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku).min(n - 1);
            let mut p = k;
            let mut best = data[at(k, k)].abs();
            for i in k + 1..=last_row {
                let v = data[at(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots[k] = p;
            if !best.is_finite() {
                return Err(LdError::FactorizationFailure("non-finite entry".into()));
            }
            min_pivot = min_pivot.min(best);
            max_pivot = max_pivot.max(best);
            if best == 0.0 {
                continue;
            }
            if p != k {
                for j in k..=last_col {
                    data.swap(at(k, j), at(p, j));
                }
            }
            let piv = data[at(k, k)];
            for i in k + 1..=last_row {
                let l = data[at(i, k)] / piv;
                data[at(i, k)] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        data[at(i, j)] -= l * data[at(k, j)];
                    }
                }
            }
        }
        Ok(Self {
            n,
            kl,
            width,
            data,
            pivots,
            min_pivot,
            max_pivot,
        })
    }

    /// Smallest over largest pivot magnitude; tiny values flag (near) singularity.
    pub fn pivot_ratio(&self) -> f64 {
        if self.max_pivot == 0.0 {
            0.0
        } else {
            self.min_pivot / self.max_pivot
        }
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let kl = self.kl;
        let ku = 2 * kl;
        let at = |i: usize, j: usize| i * self.width + j + kl - i;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    b[i] -= self.data[at(i, k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + ku).min(n - 1) {
                s -= self.data[at(k, j)] * b[j];
            }
            b[k] = s / self.data[at(k, k)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_band(n: usize, bw: usize, seed: u64) -> BandMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = BandMatrix::zeros(n, bw);
        for i in 0..n {
            for j in i.saturating_sub(bw)..=(i + bw).min(n - 1) {
                m.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        m
    }

    #[test]
    fn lu_solves_indefinite_systems() {
        let a = random_band(60, 4, 1);
        let x: Vec<f64> = (0..60).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.matvec(&x);
        let lu = BandLu::factor(&a).unwrap();
        let y = lu.solve(&b);
        let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn lu_matches_dense_solve() {
        let a = random_band(25, 3, 7);
        let dense = nalgebra::DMatrix::from_fn(25, 25, |i, j| a.get(i, j));
        let b: Vec<f64> = (0..25).map(|i| i as f64 - 12.0).collect();
        let want = dense.lu().solve(&nalgebra::DVector::from_vec(b.clone())).unwrap();
        let got = BandLu::factor(&a).unwrap().solve(&b);
        for i in 0..25 {
            assert!((want[i] - got[i]).abs() < 1e-9 * (1.0 + want[i].abs()));
        }
    }

    #[test]
    fn probing_recovers_the_matrix() {
        let a = random_band(40, 5, 3);
        let b = BandMatrix::from_operator(40, 5, |x| a.matvec(x));
        assert_eq!(a, b);
    }

    #[test]
    fn singular_matrix_has_tiny_pivot_ratio() {
        let mut a = BandMatrix::zeros(4, 1);
        for i in 0..4 {
            a.set(i, i, 2.0);
            if i + 1 < 4 {
                a.set(i, i + 1, -1.0);
                a.set(i + 1, i, -1.0);
            }
        }
        a.set(0, 0, 1.0);
        a.set(3, 3, 1.0);
        let lu = BandLu::factor(&a).unwrap();
        assert!(lu.pivot_ratio() < 1e-14);
    }
}
