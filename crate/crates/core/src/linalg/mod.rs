//! Band linear algebra used by the Newton solver and the spectral routines.

pub mod band;
pub mod eigen;
pub mod tridiag;

pub use band::{BandLu, BandMatrix};
pub use eigen::{nearest_eigenvalues, EigenResult};
pub use tridiag::solve_tridiagonal;
