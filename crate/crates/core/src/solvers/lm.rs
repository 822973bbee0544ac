use crate::error::Result;
use crate::linalg;
use crate::problem::{Bounds, IterationRecord, NonlinearProblem, SolveOutcome, SolverConfig, StepKind};

use super::run::{residual_norm, Run};

/// Constants of the projected Levenberg-Marquardt method.
#[derive(Debug, Clone, PartialEq)]
pub struct LmParams {
    /// Accept the projected LM point outright when `‖f(x⁺)‖ ≤ accept · ‖f(x_k)‖`.
    pub accept: f64,
    /// Backtracking steps are `step0 · shrink^j`.
    pub step0: f64,
    pub shrink: f64,
    /// Descent test `∇gᵀd ≤ -descent_rho · ‖d‖^descent_power`.
    pub descent_rho: f64,
    pub descent_power: f64,
    /// Regularization `μ_k = max(mu_scale · ‖f(x_k)‖^mu_power, mu_floor)`.
    pub mu_scale: f64,
    pub mu_power: f64,
    pub mu_floor: f64,
}

impl Default for LmParams {
    fn default() -> Self {
        Self {
            accept: 0.99,
            step0: 1.0,
            shrink: 0.5,
            descent_rho: 1e-8,
            descent_power: 2.1,
            mu_scale: 1e-8,
            mu_power: 2.0,
            mu_floor: 1e-16,
        }
    }
}

pub fn projected_lm_solve(p: &NonlinearProblem, cfg: &SolverConfig) -> Result<SolveOutcome> {
    projected_lm_solve_with(p, cfg, &LmParams::default())
}

/// Projected Levenberg-Marquardt on the box `p.bounds` (unbounded if absent).
///
/// Each iteration solves `(JᵀJ + μ I) d = -Jᵀf` with `μ = ‖f‖²`. The
/// projected point `Π(x + d)` is taken if it shrinks the residual enough;
/// otherwise an Armijo search runs along `Π(x + d) - x` when that is a
/// descent direction, and a backtracked projected gradient step when not.
pub fn projected_lm_solve_with(p: &NonlinearProblem, cfg: &SolverConfig, params: &LmParams) -> Result<SolveOutcome> {
    cfg.validate()?;
    let bounds = p.bounds.clone().unwrap_or_else(|| Bounds::unbounded(p.dim()));
    let mut run = Run::new(cfg);
    let mut x = bounds.project(&p.start);
    let mut f = p.residual(&x);
    run.f_evals += 1;

    for k in 0.. {
        let res = residual_norm(&f);
        if run.visit(&x, res, cfg) {
            break;
        }
        let g0 = res * res;
        let jac = p.jacobian(&x);
        let mu = (params.mu_scale * res.powf(params.mu_power)).max(params.mu_floor);
        let d = match jac.normal_equations_solve(&f, mu) {
            Ok(d) => d,
            Err(e) => {
                run.failure = Some(e);
                break;
            }
        };
        let mut record = IterationRecord::newton(k, res, linalg::norm(&d), None);
        record.step_kind = StepKind::Lm;

        let x_plus = bounds.project(&linalg::add(&x, &d));
        let f_plus = p.residual(&x_plus);
        run.f_evals += 1;

        let (x_next, f_next) = if residual_norm(&f_plus) <= params.accept * res {
            (x_plus, f_plus)
        } else {
            let grad = linalg::scale(2.0, &jac.matvec_transpose(&f));
            let dk = linalg::sub(&x_plus, &x);
            let slope = linalg::dot(&grad, &dk);
            let mut evals = 0;
            let mut step = params.step0;
            let mut accepted = None;
            let mut last = None;
            if slope <= -params.descent_rho * linalg::norm(&dk).powf(params.descent_power) {
                record.step_kind = StepKind::LmLinesearch;
                for _ in 0..cfg.ls_max_trials {
                    let mut xt = x.clone();
                    linalg::axpy(step, &dk, &mut xt);
                    let ft = p.residual(&xt);
                    evals += 1;
                    let gt = linalg::dot(&ft, &ft);
                    if gt <= g0 + cfg.ls_damping * step * slope {
                        accepted = Some((xt, ft));
                        break;
                    }
                    last = Some((xt, ft));
                    step *= params.shrink;
                }
            } else {
                record.step_kind = StepKind::ProjectedGradient;
                for _ in 0..cfg.ls_max_trials {
                    let mut xt = x.clone();
                    linalg::axpy(-step, &grad, &mut xt);
                    let xt = bounds.project(&xt);
                    let ft = p.residual(&xt);
                    evals += 1;
                    let gt = linalg::dot(&ft, &ft);
                    let decrease = linalg::dot(&grad, &linalg::sub(&xt, &x));
                    if gt <= g0 + cfg.ls_damping * decrease {
                        accepted = Some((xt, ft));
                        break;
                    }
                    last = Some((xt, ft));
                    step *= params.shrink;
                }
            }
            run.f_evals += evals;
            record.ls_evals = evals;
            match accepted {
                Some(point) => point,
                None => {
                    record.ls_exhausted = true;
                    last.expect("ls_max_trials >= 1")
                }
            }
        };

        run.trace.push(record);
        x = x_next;
        f = f_next;
    }
    Ok(run.finish(x, cfg))
}
