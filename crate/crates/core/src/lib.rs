//! Depth-one Newton-Anderson iteration for nonlinear systems whose Jacobian
//! may be singular at the root, with γ-safeguarding, Armijo line search, a
//! projected Levenberg-Marquardt comparator and error-geometry diagnostics.
//!
//! ```
//! use newton_anderson::problems::{multipoly, MultipolySpec};
//! use newton_anderson::{solve, MethodId, SolverConfig};
//!
//! let p = multipoly(MultipolySpec { n: 100, k: 2 }).unwrap();
//! let cfg = SolverConfig { r: 0.7, ..SolverConfig::default() };
//! let newton = solve(MethodId::Newton, &p, &cfg).unwrap();
//! let accel = solve(MethodId::GammaNAnderson, &p, &cfg).unwrap();
//! assert!(accel.converged && accel.iterations < newton.iterations);
//! ```

// `!(x > t)` is used on purpose so that NaN fails every threshold check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
mod error;
pub mod linalg;
mod problem;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use problem::{
    validate_problem, Bounds, FnSystem, IterationRecord, NonlinearProblem, SolveOutcome, SolverConfig, StepKind,
    System, Violation,
};
pub use solvers::{solve, MethodId};
