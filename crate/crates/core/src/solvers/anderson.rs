use serde::Serialize;

use crate::diagnostics::theta_gain;
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{IterationRecord, NonlinearProblem, SolveOutcome, SolverConfig, StepKind};

use super::linesearch::{armijo_search, merit_slope, LineSearchResult};
use super::newton::newton_direction;
use super::run::{residual_norm, Run};

/// `x_k + w_next - γ (x_k - x_km1 + w_next - w_prev)`
pub fn anderson_combine(x_k: &[f64], x_km1: &[f64], w_next: &[f64], w_prev: &[f64], gamma: f64) -> Vec<f64> {
    let mut d = anderson_direction(x_k, x_km1, w_next, w_prev, gamma);
    linalg::axpy(1.0, x_k, &mut d);
    d
}

/// The update `x_{k+1} - x_k` of a depth-one Anderson step.
fn anderson_direction(x_k: &[f64], x_km1: &[f64], w_next: &[f64], w_prev: &[f64], gamma: f64) -> Vec<f64> {
    if gamma == 0.0 {
        return w_next.to_vec();
    }
    x_k.iter()
        .zip(x_km1)
        .zip(w_next.iter().zip(w_prev))
        .map(|((xk, xm), (wn, wp))| wn - gamma * (xk - xm + wn - wp))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SafeguardDecision {
    /// Scaling applied to γ; 1 when no scaling or a Newton step was taken.
    pub lambda: f64,
    pub took_newton_step: bool,
    /// `r ‖w_next‖ / ‖w_prev‖`
    pub beta: f64,
    /// Whether the `|γ|/|1-γ| > β` branch fired.
    pub scaled: bool,
}

/// γ-safeguarding: choose `λ ∈ (0, 1]` so that `|λγ|/|1-λγ| ≤ β`, or fall
/// back to a Newton step when `γ = 0` or `γ ≥ 1`.
pub fn gamma_safeguard(gamma: f64, w_next_norm: f64, w_prev_norm: f64, r: f64) -> SafeguardDecision {
    let beta = r * w_next_norm / w_prev_norm;
    let mut decision = SafeguardDecision {
        lambda: 1.0,
        took_newton_step: false,
        beta,
        scaled: false,
    };
    if gamma == 0.0 || gamma >= 1.0 {
        decision.took_newton_step = true;
        return decision;
    }
    if gamma.abs() / (1.0 - gamma).abs() > beta {
        decision.scaled = true;
        if gamma > 0.0 {
            let l = beta / (gamma * (1.0 + beta));
            if l < 1.0 {
                decision.lambda = l;
            }
        } else {
            let l = beta / (gamma * (beta - 1.0));
            if (0.0..1.0).contains(&l) {
                decision.lambda = l;
            }
        }
    }
    decision
}

/// Depth-one Newton-Anderson. The first step is always a plain Newton step.
///
/// With `safeguard`, each coefficient passes through [`gamma_safeguard`]
/// with `cfg.r`. With `linesearch`, a step after the first that fails to
/// reduce the residual by `cfg.ls_trigger` is replaced by an Armijo search
/// along the same direction. An exhausted search leaves the iterate where it
/// was, so the following step falls back to Newton.
/// The initial Newton step is never searched.
pub fn newton_anderson_solve(
    p: &NonlinearProblem,
    cfg: &SolverConfig,
    safeguard: bool,
    linesearch: bool,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    let mut run = Run::new(cfg);
    let mut x = p.start.clone();
    let mut f = p.residual(&x);
    run.f_evals += 1;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None; // (x_{k-1}, w_k)

    for k in 0.. {
        let res = residual_norm(&f);
        if run.visit(&x, res, cfg) {
            break;
        }
        let jac = p.jacobian(&x);
        let w = match newton_direction(&jac, &f) {
            Ok(w) => w,
            Err(e) => {
                run.failure = Some(e);
                break;
            }
        };
        let w_norm = linalg::norm(&w);

        let mut record = IterationRecord::newton(k, res, w_norm, None);
        let direction = match &prev {
            None => w.clone(),
            Some((x_prev, w_prev)) => match linalg::lstsq_gamma(&w, w_prev) {
                Err(Error::DegenerateSteps { .. }) => w.clone(),
                Err(e) => return Err(e),
                Ok(gamma) => {
                    record.gamma_raw = Some(gamma);
                    let lambda = if safeguard {
                        let dec = gamma_safeguard(gamma, w_norm, linalg::norm(w_prev), cfg.r);
                        (!dec.took_newton_step).then_some(dec.lambda)
                    } else {
                        Some(1.0)
                    };
                    match lambda {
                        None => w.clone(),
                        Some(lambda) => {
                            let gamma_used = lambda * gamma;
                            record.lambda = lambda;
                            record.gamma_used = gamma_used;
                            record.theta = theta_gain(&w, w_prev, gamma_used).unwrap_or(1.0);
                            record.step_kind = StepKind::Anderson;
                            anderson_direction(&x, x_prev, &w, w_prev, gamma_used)
                        }
                    }
                }
            },
        };

        let mut x_next = x.clone();
        linalg::axpy(1.0, &direction, &mut x_next);
        let mut f_next = p.residual(&x_next);
        run.f_evals += 1;

        if linesearch && k > 0 && residual_norm(&f_next) > cfg.ls_trigger * res {
            let slope = merit_slope(&jac, &f, &direction);
            let ls = armijo_search(p, &x, &f, slope, &direction, cfg, cfg.ls_step0);
            run.f_evals += ls.evals();
            record.ls_evals = ls.evals();
            record.step_kind = StepKind::AndersonLinesearch;
            match ls {
                LineSearchResult::Accepted { x, f, .. } => {
                    x_next = x;
                    f_next = f;
                }
                LineSearchResult::Exhausted { .. } => {
                    record.ls_exhausted = true;
                    x_next = x.clone();
                    f_next = f.clone();
                }
            }
        }

        run.trace.push(record);
        let x_prev = std::mem::replace(&mut x, x_next);
        prev = Some((x_prev, w));
        f = f_next;
    }
    Ok(run.finish(x, cfg))
}
