//! Fixtures shared by the benchmarks.

use ld_vortex::model::{Grid1D, LdParameters};

/// Desk configuration on a grid with `intervals` intervals.
pub fn desk_problem(intervals: usize) -> (LdParameters, Grid1D) {
    let params = LdParameters::desk();
    let grid = Grid1D::new(params.half_width, intervals).expect("valid grid");
    (params, grid)
}
