//! Benchmark problem constructors and a finite-difference Jacobian check.

mod fdcheck;
mod hequation;
mod multipoly;
mod registry;

pub use fdcheck::fd_jacobian_check;
pub use hequation::{h_equation, h_equation_with_ground_truth, HEquationSpec, REFERENCE_TOL};
pub use multipoly::{multipoly, MultipolySpec};
pub use registry::{registry, registry_entry, slug, BenchmarkGroup, RegistryEntry};
