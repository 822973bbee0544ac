use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{JacobianMatrix, UpperBidiagonal};
use crate::problem::NonlinearProblem;

/// `f_i = x_i² + x_i - x_{i+1}^k` for `i < n`, `f_n = x_n^k`.
///
/// The origin is a root of order `k - 1` whose null space is spanned by `e_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultipolySpec {
    pub n: usize,
    pub k: u32,
}

impl MultipolySpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig("multipoly needs n >= 2".into()));
        }
        if self.k < 2 {
            return Err(Error::InvalidConfig("multipoly needs k >= 2".into()));
        }
        Ok(())
    }
}

pub fn multipoly(spec: MultipolySpec) -> Result<NonlinearProblem> {
    spec.validate()?;
    let MultipolySpec { n, k } = spec;
    let ki = k as i32;
    let kf = k as f64;
    let residual = move |x: &[f64]| -> Vec<f64> {
        let mut f: Vec<f64> = x.windows(2).map(|w| w[0] * w[0] + w[0] - w[1].powi(ki)).collect();
        f.push(x[n - 1].powi(ki));
        f
    };
    let jacobian = move |x: &[f64]| -> JacobianMatrix {
        let diag = x[..n - 1].iter().map(|v| 2.0 * v + 1.0).collect();
        let superdiag = x[1..].iter().map(|v| -kf * v.powi(ki - 1)).collect();
        let corner = kf * x[n - 1].powi(ki - 1);
        JacobianMatrix::UpperBidiagonal(UpperBidiagonal::new(diag, superdiag, corner).expect("equal lengths"))
    };
    let mut start = vec![0.3; n];
    start[n - 1] = 0.9;
    let mut e_n = vec![0.0; n];
    e_n[n - 1] = 1.0;
    Ok(
        NonlinearProblem::from_fns(format!("multipoly(n={n},k={k})"), n, residual, jacobian, start)
            .with_known_root(vec![0.0; n])
            .with_null_basis(vec![e_n])
            .with_root_order(k - 1),
    )
}
