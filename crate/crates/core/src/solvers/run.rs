use std::time::Instant;

use crate::error::Error;
use crate::linalg;
use crate::problem::{IterationRecord, SolveOutcome, SolverConfig};

/// Bookkeeping shared by every solver loop.
pub(crate) struct Run {
    started: Instant,
    keep_history: bool,
    pub trace: Vec<IterationRecord>,
    pub residuals: Vec<f64>,
    pub iterates: Vec<Vec<f64>>,
    pub f_evals: usize,
    pub failure: Option<Error>,
}

impl Run {
    pub fn new(cfg: &SolverConfig) -> Self {
        Self {
            started: Instant::now(),
            keep_history: cfg.keep_history,
            trace: Vec::new(),
            residuals: Vec::new(),
            iterates: Vec::new(),
            f_evals: 0,
            failure: None,
        }
    }

    /// Record iterate `x_k` with its residual norm. Returns `true` once the
    /// loop must stop (converged, non-finite residual, or cap reached).
    pub fn visit(&mut self, x: &[f64], res: f64, cfg: &SolverConfig) -> bool {
        let k = self.residuals.len();
        self.residuals.push(res);
        if self.keep_history {
            self.iterates.push(x.to_vec());
        }
        if res < cfg.tol {
            return true;
        }
        if !res.is_finite() {
            self.failure = Some(Error::NonFiniteResidual { k });
            return true;
        }
        k >= cfg.max_iters
    }

    pub fn finish(self, x: Vec<f64>, cfg: &SolverConfig) -> SolveOutcome {
        let final_res = *self.residuals.last().unwrap_or(&f64::INFINITY);
        SolveOutcome {
            converged: final_res < cfg.tol,
            iterations: self.residuals.len().saturating_sub(1),
            final_res,
            final_x: x,
            trace: self.trace,
            residual_history: self.residuals,
            iterate_history: self.keep_history.then_some(self.iterates),
            f_evals: self.f_evals,
            wall_time: self.started.elapsed().as_secs_f64(),
            failure: self.failure,
        }
    }
}

pub(crate) fn residual_norm(f: &[f64]) -> f64 {
    linalg::norm(f)
}
