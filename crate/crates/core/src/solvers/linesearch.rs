use crate::linalg::{self, JacobianMatrix};
use crate::problem::{NonlinearProblem, SolverConfig};

/// Result of a backtracking search on the merit function `g(x) = ‖f(x)‖²`.
#[derive(Debug, Clone, PartialEq)]
pub enum LineSearchResult {
    Accepted {
        x: Vec<f64>,
        f: Vec<f64>,
        step: f64,
        evals: usize,
    },
    /// No trial satisfied the sufficient-decrease test; carries the last
    /// trial point.
    Exhausted {
        x: Vec<f64>,
        f: Vec<f64>,
        step: f64,
        evals: usize,
    },
}

impl LineSearchResult {
    pub fn evals(&self) -> usize {
        match self {
            LineSearchResult::Accepted { evals, .. } | LineSearchResult::Exhausted { evals, .. } => *evals,
        }
    }

    pub fn is_accepted(&self) -> bool {
        matches!(self, LineSearchResult::Accepted { .. })
    }
}

/// Directional derivative `g'(x)ᵀd = 2 f(x)ᵀ J(x) d`.
pub fn merit_slope(jac: &JacobianMatrix, f: &[f64], d: &[f64]) -> f64 {
    2.0 * linalg::dot(f, &jac.matvec(d))
}

/// Armijo backtracking along `d` from `x`.
///
/// Trial `j` uses step `s = step0 · cfg.ls_shrink^j` and is accepted when
/// `g(x + s d) ≤ g(x) + cfg.ls_damping · s · slope`, with `slope` the
/// directional derivative from [`merit_slope`]. At most `cfg.ls_max_trials`
/// residual evaluations are spent.
pub fn armijo_search(
    p: &NonlinearProblem,
    x: &[f64],
    fx: &[f64],
    slope: f64,
    d: &[f64],
    cfg: &SolverConfig,
    step0: f64,
) -> LineSearchResult {
    let g0 = linalg::dot(fx, fx);
    let mut step = step0;
    let mut last = None;
    for j in 0..cfg.ls_max_trials {
        let mut xt = x.to_vec();
        linalg::axpy(step, d, &mut xt);
        let ft = p.residual(&xt);
        let gt = linalg::dot(&ft, &ft);
        if gt <= g0 + cfg.ls_damping * step * slope {
            return LineSearchResult::Accepted {
                x: xt,
                f: ft,
                step,
                evals: j + 1,
            };
        }
        last = Some((xt, ft, step));
        step *= cfg.ls_shrink;
    }
    let (x, f, step) = last.expect("ls_max_trials >= 1");
    LineSearchResult::Exhausted {
        x,
        f,
        step,
        evals: cfg.ls_max_trials,
    }
}
