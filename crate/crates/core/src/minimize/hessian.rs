use crate::energy::hessian_apply_flat;
use crate::linalg::BandMatrix;
use crate::model::{DofLayout, Grid1D, LayeredState, LdParameters};

/// Band Hessian of the free DOFs at `state`, assembled from exact Hessian-vector products.
pub fn assemble_hessian(state: &LayeredState, params: &LdParameters, grid: &Grid1D) -> BandMatrix {
    let layout = DofLayout::new(params.num_gaps, grid.intervals);
    BandMatrix::from_operator(layout.len(), layout.bandwidth(), |u| {
        hessian_apply_flat(state, params, grid, &layout, u)
    })
}

/// Diagonal lumped mass matrix matching [`DofLayout::lumped_mass`].
pub fn lumped_mass_matrix(params: &LdParameters, grid: &Grid1D) -> BandMatrix {
    let layout = DofLayout::new(params.num_gaps, grid.intervals);
    BandMatrix::from_diagonal(&layout.lumped_mass(grid, params.spacing))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::random_rough_state;
    use rand::SeedableRng;

    #[test]
    fn band_assembly_matches_dense_columns() {
        let p = LdParameters::desk().with_gaps(3).with_coupling(0.05);
        let g = Grid1D::new(1.0, 16).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let st = random_rough_state(&p, &g, &mut rng);
        let layout = DofLayout::new(3, 16);
        let h = assemble_hessian(&st, &p, &g);
        let mut e = vec![0.0; layout.len()];
        for j in 0..layout.len() {
            e[j] = 1.0;
            let col = hessian_apply_flat(&st, &p, &g, &layout, &e);
            e[j] = 0.0;
            for (i, v) in col.iter().enumerate() {
                if i.abs_diff(j) > layout.bandwidth() {
                    assert_eq!(*v, 0.0, "entry ({i},{j}) outside band");
                } else {
                    assert_eq!(h.get(i, j), *v);
                }
            }
        }
        assert!(h.asymmetry() < 1e-12);
    }
}
