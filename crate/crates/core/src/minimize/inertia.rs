use super::hessian::{assemble_hessian, lumped_mass_matrix};
use crate::error::{LdError, Result};
use crate::linalg::{nearest_eigenvalues, BandMatrix};
use crate::model::{Grid1D, LayeredState, LdParameters};

const EIGEN_SEED: u64 = 0x1e1e;

pub(crate) fn inertia_of(h: &BandMatrix, mass: &BandMatrix, k: usize) -> Result<usize> {
    let eig = nearest_eigenvalues(h, mass, 0.0, k, EIGEN_SEED)?;
    Ok(eig.values.iter().filter(|&&v| v < 0.0).count())
}

/// The `k` smallest-magnitude eigenvalues of the mass-scaled free-DOF Hessian, ascending.
pub fn soft_spectrum(state: &LayeredState, params: &LdParameters, grid: &Grid1D, k: usize) -> Result<Vec<f64>> {
    let h = assemble_hessian(state, params, grid);
    Ok(nearest_eigenvalues(&h, &lumped_mass_matrix(params, grid), 0.0, k, EIGEN_SEED)?.values)
}

/// Number of negative eigenvalues among the `k` smallest-magnitude ones (k ≥ N+1).
pub fn inertia(state: &LayeredState, params: &LdParameters, grid: &Grid1D, k: usize) -> Result<usize> {
    if k < params.num_gaps + 1 {
        return Err(LdError::InvalidParameters(format!("k = {k} must be at least N+1")));
    }
    let h = assemble_hessian(state, params, grid);
    inertia_of(&h, &lumped_mass_matrix(params, grid), k)
}
