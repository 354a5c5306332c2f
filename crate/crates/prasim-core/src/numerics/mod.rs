//! Special functions, bracketed root finding, gradient checks, and the
//! log-barrier convex solver everything else builds on.

mod convex;
mod gradcheck;
mod roots;
mod special;

pub use convex::{
    minimize_convex, Constraint, ConvexProgram, SolverOptions, SolverResult, SolverStatus,
};
pub use gradcheck::check_gradient;
pub use roots::{find_root, Bracket};
pub use special::{e1_scaled, exp_integral_e1, upper_gamma_scaled, upper_incomplete_gamma};

/// Errors from the numerical routines.
#[derive(Debug, thiserror::Error)]
pub enum NumericsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no sign change over bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("iteration limit reached in {0}")]
    MaxIterations(String),
}
