//! Error type shared by every module in this crate.

use std::fmt;

/// Errors produced by model evaluation, the dual-variable solvers, and the
/// search/simulation front ends.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied value violated a documented precondition.
    InvalidInput(String),
    /// Geometric bracket expansion failed to find a sign change.
    BracketNotFound {
        lo: f64,
        hi: f64,
        expansions: u32,
    },
    /// Bisection exhausted its iteration budget without meeting the
    /// residual tolerance.
    MaxIterationsExceeded {
        iterations: u32,
        residual: f64,
        tolerance: f64,
    },
    /// The energy budget cannot be met with the given fixed variables
    /// (for example, currents already pinned at their lower bound exceed it).
    InfeasibleBudget(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::BracketNotFound { lo, hi, expansions } => write!(
                f,
                "no sign-changing bracket found after {expansions} expansions \
                 (last interval [{lo}, {hi}])"
            ),
            Error::MaxIterationsExceeded {
                iterations,
                residual,
                tolerance,
            } => write!(
                f,
                "bisection stopped after {iterations} iterations with residual \
                 {residual:e} above tolerance {tolerance:e}"
            ),
            Error::InfeasibleBudget(msg) => write!(f, "infeasible budget: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
