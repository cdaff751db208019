//! Lawrence–Doniach model of a layered superconductor in a parallel field.
//!
//! The stack of N+1 planes is reduced exactly to coupled one-dimensional problems in the
//! gauge A_z ≡ 0 with φ_0 ≡ 0. On top of the discrete energy the crate provides descent and
//! Newton solvers, Hessian inertia, the small-coupling closed forms, the validity bounds,
//! and an experiment harness that checks the numerics against the closed forms.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod energy;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod minimize;
pub mod model;
pub mod perturbation;
pub mod validity;

pub use energy::{el_residual, fd_gradient_check, gradient, hessian_apply, total_energy, CotangentState, EnergyBreakdown};
pub use error::{LdError, Result};
pub use minimize::{inertia, minimize, newton_critical, CriticalPoint, MinimizeReport};
pub use model::{
    distance, gauge_transform, lift_field_2d, observables, uniform_field_state, validate, zero_coupling_minimizer,
    Grid1D, LayeredState, LdParameters, Observables, PhaseConfig, ValidationReport,
};
