//! Parameters, grids, the layered-gauge state and its gauge-invariant observables.

pub mod export;
pub mod grid;
pub mod layout;
pub mod observables;
pub mod params;
pub mod state;

pub use grid::Grid1D;
pub use layout::DofLayout;
pub use observables::{distance, lift_field_2d, observables, FieldMap2D, Observables};
pub use params::{validate, LdParameters, ValidationReport};
pub use state::{
    gauge_transform, random_rough_state, random_start, uniform_field_state, wrap_phase, wrap_signed,
    zero_coupling_minimizer, LayeredState, PhaseConfig,
};
