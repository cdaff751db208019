//! Flat ordering of the free degrees of freedom.
//!
//! DOFs are interleaved by node so that every coupling stays within a narrow band:
//!
//! | block i < M | offset |
//! |---|---|
//! | f_n(x_i), n = 0..N | n |
//! | φ_n(x_i), n = 1..N | N + n |
//! | a_n(x_{i+1/2}), n = 0..N | 2N + 1 + n |
//!
//! The last block (i = M) carries only f and φ. φ_0 is gauge-fixed and not a DOF.

use ndarray::{Array2, ArrayView2};

use super::grid::Grid1D;
use super::state::LayeredState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    pub gaps: usize,
    pub intervals: usize,
}

impl DofLayout {
    pub fn new(gaps: usize, intervals: usize) -> Self {
        Self { gaps, intervals }
    }

    pub fn block(&self) -> usize {
        3 * self.gaps + 2
    }

    pub fn len(&self) -> usize {
        self.intervals * self.block() + 2 * self.gaps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn f(&self, n: usize, i: usize) -> usize {
        i * self.block() + n
    }

    /// Index of φ_n at node i; `n` must be ≥ 1.
    pub fn phi(&self, n: usize, i: usize) -> usize {
        debug_assert!(n >= 1);
        i * self.block() + self.gaps + n
    }

    pub fn a(&self, n: usize, k: usize) -> usize {
        k * self.block() + 2 * self.gaps + 1 + n
    }

    /// Half-bandwidth of every operator that couples only neighbouring nodes.
    pub fn bandwidth(&self) -> usize {
        self.block() + self.gaps
    }

    pub fn pack(&self, state: &LayeredState) -> Vec<f64> {
        self.pack_parts(state.f.view(), state.phi.view(), state.a.view(), 1)
    }

    /// Packs arrays; plane n ≥ 1 of φ is read from row `n - 1 + skip` (`skip` = 1 when row 0
    /// holds φ_0, 0 when the array starts at plane 1).
    pub fn pack_parts(&self, f: ArrayView2<f64>, phi: ArrayView2<f64>, a: ArrayView2<f64>, skip: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.len()];
        let np = self.gaps + 1;
        for i in 0..=self.intervals {
            for n in 0..np {
                x[self.f(n, i)] = f[[n, i]];
            }
            for n in 1..np {
                x[self.phi(n, i)] = phi[[n - 1 + skip, i]];
            }
            if i < self.intervals {
                for n in 0..np {
                    x[self.a(n, i)] = a[[n, i]];
                }
            }
        }
        x
    }

    /// Writes the DOF vector into a copy of `template` (φ_0 kept from the template).
    pub fn unpack(&self, template: &LayeredState, x: &[f64]) -> LayeredState {
        let mut st = template.clone();
        let np = self.gaps + 1;
        for i in 0..=self.intervals {
            for n in 0..np {
                st.f[[n, i]] = x[self.f(n, i)];
            }
            for n in 1..np {
                st.phi[[n, i]] = x[self.phi(n, i)];
            }
            if i < self.intervals {
                for n in 0..np {
                    st.a[[n, i]] = x[self.a(n, i)];
                }
            }
        }
        st
    }

    /// Splits a DOF vector into (f, φ for planes 1..N, a) arrays.
    pub fn split(&self, x: &[f64]) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
        let np = self.gaps + 1;
        let m = self.intervals;
        let f = Array2::from_shape_fn((np, m + 1), |(n, i)| x[self.f(n, i)]);
        let phi = Array2::from_shape_fn((self.gaps, m + 1), |(g, i)| x[self.phi(g + 1, i)]);
        let a = Array2::from_shape_fn((np, m), |(n, k)| x[self.a(n, k)]);
        (f, phi, a)
    }

    /// Lumped quadrature mass p·w for every DOF (trapezoid weight for nodes, dx for midpoints).
    pub fn lumped_mass(&self, grid: &Grid1D, p: f64) -> Vec<f64> {
        let mut w = vec![0.0; self.len()];
        let np = self.gaps + 1;
        for i in 0..=self.intervals {
            for n in 0..np {
                w[self.f(n, i)] = p * grid.weight(i);
            }
            for n in 1..np {
                w[self.phi(n, i)] = p * grid.weight(i);
            }
            if i < self.intervals {
                for n in 0..np {
                    w[self.a(n, i)] = p * grid.dx;
                }
            }
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn indices_are_a_bijection() {
        let l = DofLayout::new(3, 17);
        let mut seen = HashSet::new();
        for i in 0..=17 {
            for n in 0..4 {
                assert!(seen.insert(l.f(n, i)));
                if n > 0 {
                    assert!(seen.insert(l.phi(n, i)));
                }
                if i < 17 {
                    assert!(seen.insert(l.a(n, i)));
                }
            }
        }
        assert_eq!(seen.len(), l.len());
        assert_eq!(*seen.iter().max().unwrap(), l.len() - 1);
    }
}
