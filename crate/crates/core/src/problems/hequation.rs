use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{smallest_singular_pairs, DenseMatrix, JacobianMatrix};
use crate::problem::{NonlinearProblem, SolverConfig, System};
use crate::solvers::newton_anderson_solve;

/// Chandrasekhar H-equation discretized by the composite midpoint rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HEquationSpec {
    pub n: usize,
    pub omega: f64,
}

impl Default for HEquationSpec {
    fn default() -> Self {
        Self { n: 500, omega: 1.0 }
    }
}

impl HEquationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidConfig("H-equation needs n >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.omega) {
            return Err(Error::InvalidConfig(format!("omega {} outside [0, 1]", self.omega)));
        }
        Ok(())
    }
}

/// Holds the kernel `c μ_i / (μ_i + μ_j)`, `c = ω/(2n)`, row-major.
struct HEquation {
    n: usize,
    kernel: Vec<f64>,
}

impl HEquation {
    fn new(spec: HEquationSpec) -> Self {
        let n = spec.n;
        let c = spec.omega / (2.0 * n as f64);
        let mu: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        let mut kernel = Vec::with_capacity(n * n);
        for &mi in &mu {
            kernel.extend(mu.iter().map(|&mj| c * mi / (mi + mj)));
        }
        Self { n, kernel }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.kernel[i * self.n..(i + 1) * self.n]
    }

    fn sums(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(k, v)| k * v).sum())
            .collect()
    }
}

impl System for HEquation {
    fn dim(&self) -> usize {
        self.n
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.sums(x).iter().zip(x).map(|(s, xi)| xi - 1.0 / (1.0 - s)).collect()
    }

    fn jacobian(&self, x: &[f64]) -> JacobianMatrix {
        let n = self.n;
        let s = self.sums(x);
        let mut data = Vec::with_capacity(n * n);
        for (i, si) in s.iter().enumerate() {
            let scale = (1.0 - si).powi(-2);
            data.extend(self.row(i).iter().map(|k| -scale * k));
            data[i * n + i] += 1.0;
        }
        JacobianMatrix::Dense(DenseMatrix::from_row_major(n, n, data).expect("square by construction"))
    }
}

/// H-equation problem started from the vector of ones. No ground truth is
/// attached; see [`h_equation_with_ground_truth`].
pub fn h_equation(spec: HEquationSpec) -> Result<NonlinearProblem> {
    spec.validate()?;
    let name = format!("hequation(n={},omega={})", spec.n, spec.omega);
    Ok(NonlinearProblem::new(
        name,
        Arc::new(HEquation::new(spec)),
        vec![1.0; spec.n],
    ))
}

/// Tolerance of the reference solve used as the known root.
pub const REFERENCE_TOL: f64 = 1e-13;

/// H-equation with a numerically computed root, and for `ω = 1` the
/// one-dimensional null basis of the Jacobian there.
///
/// The root comes from Newton-Anderson to `REFERENCE_TOL`. The null vector is
/// the right singular vector of the smallest singular value at that root.
pub fn h_equation_with_ground_truth(spec: HEquationSpec) -> Result<NonlinearProblem> {
    let p = h_equation(spec)?;
    let cfg = SolverConfig {
        tol: REFERENCE_TOL,
        max_iters: 200,
        ..SolverConfig::default()
    };
    let out = newton_anderson_solve(&p, &cfg, false, false)?;
    if !out.converged {
        return Err(Error::ProblemUnavailable {
            name: p.name.clone(),
            reason: format!("reference solve stalled at |f| = {:e}", out.final_res),
        });
    }
    let root = out.final_x;
    let basis = if spec.omega == 1.0 {
        let jac = p.jacobian(&root).to_dense();
        let (_, v) = smallest_singular_pairs(&jac, 1, 100)?.remove(0);
        vec![v]
    } else {
        Vec::new()
    };
    Ok(p.with_known_root(root).with_null_basis(basis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::newton_solve;

    #[test]
    fn omega_zero_is_shifted_identity() {
        let p = h_equation(HEquationSpec { n: 8, omega: 0.0 }).unwrap();
        let x: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let f = p.residual(&x);
        for (fi, xi) in f.iter().zip(&x) {
            assert_eq!(*fi, xi - 1.0);
        }
        let out = newton_solve(&p.clone().with_start(vec![3.0; 8]), &SolverConfig::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn single_node_by_hand() {
        // n = 1: μ = 1/2, s = (ω/2)(1/2)x, F = x - 1/(1 - ωx/4)
        let p = h_equation(HEquationSpec { n: 1, omega: 1.0 }).unwrap();
        let f = p.residual(&[1.0]);
        assert!((f[0] - (1.0 - 1.0 / 0.75)).abs() < 1e-15);
        let j = p.jacobian(&[1.0]).to_dense();
        assert!((j[(0, 0)] - (1.0 - 0.25 / 0.5625)).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(h_equation(HEquationSpec { n: 0, omega: 0.5 }).is_err());
        assert!(h_equation(HEquationSpec { n: 4, omega: 1.5 }).is_err());
    }
}
