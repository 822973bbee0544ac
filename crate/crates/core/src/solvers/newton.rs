use crate::error::Result;
use crate::linalg::{self, JacobianMatrix};
use crate::problem::{IterationRecord, NonlinearProblem, SolveOutcome, SolverConfig};

use super::run::{residual_norm, Run};

/// Newton update `w` solving `f'(x) w = -f(x)`, returned with `f(x)`.
pub fn newton_step(p: &NonlinearProblem, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let f = p.residual(x);
    let jac = p.jacobian(x);
    let w = newton_direction(&jac, &f)?;
    Ok((w, f))
}

pub(crate) fn newton_direction(jac: &JacobianMatrix, f: &[f64]) -> Result<Vec<f64>> {
    let neg: Vec<f64> = f.iter().map(|v| -v).collect();
    jac.solve(&neg)
}

pub fn newton_solve(p: &NonlinearProblem, cfg: &SolverConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    let mut run = Run::new(cfg);
    let mut x = p.start.clone();
    let mut f = p.residual(&x);
    run.f_evals += 1;

    for k in 0.. {
        let res = residual_norm(&f);
        if run.visit(&x, res, cfg) {
            break;
        }
        let w = match newton_direction(&p.jacobian(&x), &f) {
            Ok(w) => w,
            Err(e) => {
                run.failure = Some(e);
                break;
            }
        };
        run.trace.push(IterationRecord::newton(k, res, linalg::norm(&w), None));
        linalg::axpy(1.0, &w, &mut x);
        f = p.residual(&x);
        run.f_evals += 1;
    }
    Ok(run.finish(x, cfg))
}
