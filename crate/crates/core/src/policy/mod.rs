//! Optimal constrained policy: piecewise `B`, `A`, the candidate policy and
//! its unconstrained counterpart.

mod curve;
mod diagnostics;
mod piecewise;
mod unconstrained;

pub use curve::{
    pi_hat, pi_star, projection_differs, time_grid, value_function, PolicyCurve, Projection,
    ValueSurface, DEFAULT_GRID,
};
pub use diagnostics::{
    first_lhs, second_lhs, verification_diagnostics, InequalityCheck, VerificationDiagnostics,
};
#[allow(unused_imports)]
pub(crate) use piecewise::solve_b_unvalidated;
pub use piecewise::{solve_a, solve_b, ACurve, PiecewiseB, Segment, SolveOptions};
pub use unconstrained::{pi_unconstrained, unconstrained_condition, UnconstrainedB};
