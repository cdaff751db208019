//! Descent to minimizers, Newton iteration to general critical points, Hessian inertia.

mod descent;
mod hessian;
mod inertia;
mod newton;

pub use descent::{minimize, MinimizeReport, TraceRow, ARMIJO_C, BACKTRACK, MAX_BACKTRACKS};
pub use hessian::{assemble_hessian, lumped_mass_matrix};
pub use inertia::{inertia, soft_spectrum};
pub use newton::{default_newton_tol, estimate_delta, newton_critical, CriticalPoint, SINGULAR_PIVOT_RATIO};
