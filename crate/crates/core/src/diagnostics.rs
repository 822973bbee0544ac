//! Error-geometry diagnostics for problems with a known root and null space.
//!
//! Everything here is computed from iterates, Newton steps and the supplied
//! ground truth; no second derivatives are needed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm, sub};
use crate::problem::{IterationRecord, NonlinearProblem};

/// Default dominance factor for [`classify_pair`].
pub const DEFAULT_DOMINANCE: f64 = 3.0;

/// Orthogonal split of the error `e = x - x*` into null and range parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorSplit {
    pub e: Vec<f64>,
    pub pn: Vec<f64>,
    pub pr: Vec<f64>,
    /// `‖pr‖ / ‖pn‖`; infinite when `pn = 0`.
    pub sigma: f64,
}

impl ErrorSplit {
    pub fn null_norm(&self) -> f64 {
        norm(&self.pn)
    }

    pub fn range_norm(&self) -> f64 {
        norm(&self.pr)
    }

    pub fn error_norm(&self) -> f64 {
        norm(&self.e)
    }
}

fn ground_truth(p: &NonlinearProblem) -> Result<(&[f64], &[Vec<f64>])> {
    match (&p.known_root, &p.null_basis) {
        (Some(r), Some(b)) => Ok((r, b)),
        _ => Err(Error::MissingGroundTruth {
            problem: p.name.clone(),
        }),
    }
}

/// `B Bᵀ v` for an orthonormal basis `B`.
pub fn project_null(basis: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for b in basis {
        linalg::axpy(dot(b, v), b, &mut out);
    }
    out
}

pub fn split_error(x: &[f64], p: &NonlinearProblem) -> Result<ErrorSplit> {
    let (root, basis) = ground_truth(p)?;
    let e = sub(x, root);
    let pn = project_null(basis, &e);
    let pr = sub(&e, &pn);
    let pn_norm = norm(&pn);
    let sigma = if pn_norm == 0.0 {
        f64::INFINITY
    } else {
        norm(&pr) / pn_norm
    };
    Ok(ErrorSplit { e, pn, pr, sigma })
}

/// Optimization gain `‖w_next - γ (w_next - w_prev)‖ / ‖w_next‖`.
pub fn theta_gain(w_next: &[f64], w_prev: &[f64], gamma_used: f64) -> Result<f64> {
    let wn = norm(w_next);
    if wn == 0.0 {
        return Err(Error::ZeroStep);
    }
    let mixed: Vec<f64> = w_next
        .iter()
        .zip(w_prev)
        .map(|(a, b)| a - gamma_used * (a - b))
        .collect();
    Ok(norm(&mixed) / wn)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NuRatio {
    pub nu: f64,
}

/// `min/max` of `|1-γ|·a` and `|γ|·b`; zero when either product vanishes.
pub fn nu_ratio(gamma_used: f64, a: f64, b: f64) -> NuRatio {
    let p = (1.0 - gamma_used).abs() * a;
    let q = gamma_used.abs() * b;
    if p == 0.0 || q == 0.0 {
        return NuRatio { nu: 0.0 };
    }
    NuRatio {
        nu: p.min(q) / p.max(q),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairType {
    NPair,
    RPair,
    NrPair,
    RnPair,
    Undominated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairLabel {
    pub kind: PairType,
    pub strong: bool,
}

/// Which term of the one-step expansion of `e_i + w_{i+1}` dominates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    N,
    R,
    Neither,
}

/// The two competing terms for iterate `i`: the null half-error `½ P_N e_i`
/// and the proxy `P_N(e_i + w_{i+1}) - ½ P_N e_i` for the range coupling.
fn competing_terms(basis: &[Vec<f64>], split: &ErrorSplit, w_after: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let half_null = linalg::scale(0.5, &split.pn);
    let pn_sum = project_null(basis, &linalg::add(&split.e, w_after));
    let coupling = sub(&pn_sum, &half_null);
    (half_null, coupling)
}

fn dominant(n_term: f64, r_term: f64, factor: f64) -> Side {
    if n_term == 0.0 && r_term == 0.0 {
        Side::Neither
    } else if n_term == 0.0 || r_term >= factor * n_term {
        Side::R
    } else if r_term == 0.0 || n_term >= factor * r_term {
        Side::N
    } else {
        Side::Neither
    }
}

/// Classify the pair `(x_k, x_{k-1})` by which expansion term dominates at
/// each index, using `dominance` as the separation factor.
///
/// `w_next = w_{k+1}` is the Newton step from `x_k` and `w_k` the one from
/// `x_{k-1}`. The pair is strong when the Newton-Anderson combination (with
/// `gamma_used`) of the dominant terms still dominates the combination of
/// the remaining ones.
pub fn classify_pair(
    split_k: &ErrorSplit,
    split_km1: &ErrorSplit,
    w_next: &[f64],
    w_k: &[f64],
    gamma_used: f64,
    p: &NonlinearProblem,
    dominance: f64,
) -> Result<PairLabel> {
    let (_, basis) = ground_truth(p)?;
    let (n_k, r_k) = competing_terms(basis, split_k, w_next);
    let (n_km1, r_km1) = competing_terms(basis, split_km1, w_k);
    let side_k = dominant(norm(&n_k), norm(&r_k), dominance);
    let side_km1 = dominant(norm(&n_km1), norm(&r_km1), dominance);

    let kind = match (side_k, side_km1) {
        (Side::N, Side::N) => PairType::NPair,
        (Side::R, Side::R) => PairType::RPair,
        (Side::N, Side::R) => PairType::NrPair,
        (Side::R, Side::N) => PairType::RnPair,
        _ => {
            return Ok(PairLabel {
                kind: PairType::Undominated,
                strong: false,
            })
        }
    };
    let pick = |side: Side, n: &[f64], r: &[f64]| -> (Vec<f64>, Vec<f64>) {
        match side {
            Side::N => (n.to_vec(), r.to_vec()),
            _ => (r.to_vec(), n.to_vec()),
        }
    };
    let (dom_k, rest_k) = pick(side_k, &n_k, &r_k);
    let (dom_km1, rest_km1) = pick(side_km1, &n_km1, &r_km1);
    let mix = |a: &[f64], b: &[f64]| -> f64 {
        let v: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(x, y)| (1.0 - gamma_used) * x + gamma_used * y)
            .collect();
        norm(&v)
    };
    let dom = mix(&dom_k, &dom_km1);
    let rest = mix(&rest_k, &rest_km1);
    let strong = dom > 0.0 && dom >= dominance * rest;
    Ok(PairLabel { kind, strong })
}

/// Flags steps satisfying `‖P_N e_{k+1}‖ ≤ C θ_{k+1} ‖w_{k+1}‖`.
///
/// `splits[i]` is the split of iterate `x_i`; record `k` of `trace` is
/// checked against `splits[k + 1]`. Records without a successor split are
/// dropped.
pub fn compatibility_monitor(trace: &[IterationRecord], splits: &[ErrorSplit], c: f64) -> Vec<bool> {
    trace
        .iter()
        .filter_map(|rec| {
            let next = splits.get(rec.k + 1)?;
            let lhs = next.null_norm();
            Some(lhs == 0.0 || lhs <= c * rec.theta * rec.step_norm)
        })
        .collect()
}

/// Geometric-mean contraction ratio of a linearly convergent tail.
///
/// Non-positive and non-finite entries are dropped first; at least four
/// must remain.
pub fn estimate_rate(seq: &[f64]) -> Result<f64> {
    let kept: Vec<f64> = seq.iter().copied().filter(|v| v.is_finite() && *v > 0.0).collect();
    if kept.len() < 4 {
        return Err(Error::InsufficientTail {
            needed: 4,
            got: kept.len(),
        });
    }
    let log_sum: f64 = kept.windows(2).map(|w| (w[1] / w[0]).ln()).sum();
    Ok((log_sum / (kept.len() - 1) as f64).exp())
}

/// Root order `d` from a Newton contraction ratio `ρ = d/(d+1)`.
pub fn estimate_root_order(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::OutOfRange {
            value: rho,
            range: "(0, 1)",
        });
    }
    Ok(rho / (1.0 - rho))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientTail {
            needed: 3,
            got: pts.len(),
        });
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (u, v)| (a + u, b + v));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(n, d), (u, v)| {
        (n + (u - mx) * (v - my), d + (u - mx) * (u - mx))
    });
    if den == 0.0 {
        return Err(Error::OutOfRange {
            value: 0.0,
            range: "non-degenerate abscissae",
        });
    }
    Ok(num / den)
}

/// Per-step diagnostics for a recorded solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub k: usize,
    pub sigma: f64,
    pub null_norm: f64,
    pub range_norm: f64,
    pub error_norm: f64,
    /// Label of `(x_k, x_{k-1})`; absent for `k = 0`.
    pub pair: Option<PairLabel>,
    /// Whether step `k → k+1` was compatible; absent on the last iterate.
    pub compatible: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub steps: Vec<StepDiagnostics>,
    /// Contraction estimate of `‖P_N e_k‖` over the second half of the run.
    pub null_rate: Option<f64>,
    pub root_order: Option<f64>,
}

/// Diagnose a solve recorded with iterate history. Newton steps are
/// recomputed from the iterates for the pair labels.
pub fn diagnose(
    p: &NonlinearProblem,
    iterates: &[Vec<f64>],
    trace: &[IterationRecord],
    compat_c: f64,
) -> Result<DiagnosticsReport> {
    let splits = iterates.iter().map(|x| split_error(x, p)).collect::<Result<Vec<_>>>()?;
    let compat = compatibility_monitor(trace, &splits, compat_c);
    let steps_w: Vec<Option<Vec<f64>>> = iterates
        .iter()
        .take(trace.len())
        .map(|x| crate::solvers::newton_step(p, x).ok().map(|(w, _)| w))
        .collect();

    let mut steps = Vec::with_capacity(splits.len());
    for (k, s) in splits.iter().enumerate() {
        let pair = if k >= 1 && k < trace.len() {
            match (&steps_w[k], &steps_w[k - 1]) {
                (Some(wn), Some(wk)) => Some(classify_pair(
                    s,
                    &splits[k - 1],
                    wn,
                    wk,
                    trace[k].gamma_used,
                    p,
                    DEFAULT_DOMINANCE,
                )?),
                _ => None,
            }
        } else {
            None
        };
        steps.push(StepDiagnostics {
            k,
            sigma: s.sigma,
            null_norm: s.null_norm(),
            range_norm: s.range_norm(),
            error_norm: s.error_norm(),
            pair,
            compatible: compat.get(k).copied(),
        });
    }
    let null_norms: Vec<f64> = steps.iter().map(|s| s.null_norm).collect();
    let tail = &null_norms[null_norms.len() / 2..];
    let null_rate = estimate_rate(tail).ok();
    let root_order = null_rate.and_then(|r| estimate_root_order(r).ok());
    Ok(DiagnosticsReport {
        steps,
        null_rate,
        root_order,
    })
}
