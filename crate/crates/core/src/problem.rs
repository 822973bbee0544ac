//! Problem description, solver configuration and per-solve records.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, JacobianMatrix};

/// Residual and Jacobian of a square system `f: ℝⁿ → ℝⁿ`.
pub trait System: Send + Sync {
    fn dim(&self) -> usize;
    fn residual(&self, x: &[f64]) -> Vec<f64>;
    fn jacobian(&self, x: &[f64]) -> JacobianMatrix;
}

type ResidualFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacobianFn = dyn Fn(&[f64]) -> JacobianMatrix + Send + Sync;

/// A [`System`] assembled from two closures.
pub struct FnSystem {
    dim: usize,
    residual: Box<ResidualFn>,
    jacobian: Box<JacobianFn>,
}

impl FnSystem {
    pub fn new<F, J>(dim: usize, residual: F, jacobian: J) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        J: Fn(&[f64]) -> JacobianMatrix + Send + Sync + 'static,
    {
        Self {
            dim,
            residual: Box::new(residual),
            jacobian: Box::new(jacobian),
        }
    }
}

impl System for FnSystem {
    fn dim(&self) -> usize {
        self.dim
    }
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        (self.residual)(x)
    }
    fn jacobian(&self, x: &[f64]) -> JacobianMatrix {
        (self.jacobian)(x)
    }
}

/// Box constraints `lower ≤ x ≤ upper`; infinite entries are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self { lower, upper }
    }

    pub fn unbounded(n: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| v.max(*l).min(*u))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| l <= v && v <= u)
    }
}

/// An immutable problem instance, cheap to clone and share across threads.
#[derive(Clone)]
pub struct NonlinearProblem {
    pub name: String,
    system: Arc<dyn System>,
    pub start: Vec<f64>,
    pub known_root: Option<Vec<f64>>,
    /// Orthonormal basis of the null space of `f'(x*)`, one vector per entry.
    pub null_basis: Option<Vec<Vec<f64>>>,
    pub root_order: Option<u32>,
    pub bounds: Option<Bounds>,
}

impl fmt::Debug for NonlinearProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearProblem")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("has_root", &self.known_root.is_some())
            .field("has_null_basis", &self.null_basis.is_some())
            .field("root_order", &self.root_order)
            .field("bounded", &self.bounds.is_some())
            .finish()
    }
}

impl NonlinearProblem {
    pub fn new(name: impl Into<String>, system: Arc<dyn System>, start: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            system,
            start,
            known_root: None,
            null_basis: None,
            root_order: None,
            bounds: None,
        }
    }

    pub fn from_fns<F, J>(name: impl Into<String>, dim: usize, residual: F, jacobian: J, start: Vec<f64>) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        J: Fn(&[f64]) -> JacobianMatrix + Send + Sync + 'static,
    {
        Self::new(name, Arc::new(FnSystem::new(dim, residual, jacobian)), start)
    }

    pub fn with_known_root(mut self, root: Vec<f64>) -> Self {
        self.known_root = Some(root);
        self
    }

    pub fn with_null_basis(mut self, basis: Vec<Vec<f64>>) -> Self {
        self.null_basis = Some(basis);
        self
    }

    pub fn with_root_order(mut self, d: u32) -> Self {
        self.root_order = Some(d);
        self
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn with_start(mut self, start: Vec<f64>) -> Self {
        self.start = start;
        self
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.system.residual(x)
    }

    pub fn jacobian(&self, x: &[f64]) -> JacobianMatrix {
        self.system.jacobian(x)
    }

    pub fn system(&self) -> &Arc<dyn System> {
        &self.system
    }
}

/// A failed problem invariant together with the quantity that failed it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub invariant: &'static str,
    pub measured: f64,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} (measured {:e})", self.invariant, self.detail, self.measured)
    }
}

/// Check every [`NonlinearProblem`] invariant; an empty list means valid.
pub fn validate_problem(p: &NonlinearProblem) -> Vec<Violation> {
    let n = p.dim();
    let mut out = Vec::new();
    let mut dim_ok = |what: &'static str, len: usize| {
        if len != n {
            out.push(Violation {
                invariant: "dimension",
                measured: len as f64,
                detail: format!("{what} has length {len}, problem dimension is {n}"),
            });
            false
        } else {
            true
        }
    };
    if n == 0 {
        return vec![Violation {
            invariant: "dimension",
            measured: 0.0,
            detail: "dimension must be positive".into(),
        }];
    }
    let start_ok = dim_ok("start", p.start.len());
    let root_ok = p.known_root.as_ref().map(|r| dim_ok("known_root", r.len()));
    let bounds_ok = p
        .bounds
        .as_ref()
        .map(|b| dim_ok("bounds.lower", b.lower.len()) & dim_ok("bounds.upper", b.upper.len()));
    let basis_ok = p.null_basis.as_ref().map(|basis| {
        basis
            .iter()
            .map(|v| dim_ok("null_basis column", v.len()))
            .fold(true, |acc, ok| acc & ok)
    });

    if let (Some(root), Some(true)) = (&p.known_root, root_ok) {
        let res = linalg::norm(&p.residual(root));
        let limit = 1e-10 * (1.0 + linalg::norm(root));
        if !(res <= limit) {
            out.push(Violation {
                invariant: "residual_at_root",
                measured: res,
                detail: format!("‖f(x*)‖ exceeds {limit:e}"),
            });
        }
    }

    if let (Some(basis), Some(true)) = (&p.null_basis, basis_ok) {
        let mut worst: f64 = 0.0;
        for (i, u) in basis.iter().enumerate() {
            for (j, v) in basis.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((linalg::dot(u, v) - target).abs());
            }
        }
        if worst > 1e-12 {
            out.push(Violation {
                invariant: "null_basis_orthonormal",
                measured: worst,
                detail: "null basis columns are not orthonormal".into(),
            });
        }
        if let (Some(root), Some(true)) = (&p.known_root, root_ok) {
            let jac = p.jacobian(root);
            let scale = jacobian_max_abs(&jac).max(1.0);
            let worst = basis
                .iter()
                .map(|v| linalg::norm(&jac.matvec(v)))
                .fold(0.0_f64, f64::max);
            if worst > 1e-8 * scale {
                out.push(Violation {
                    invariant: "null_basis_annihilated",
                    measured: worst / scale,
                    detail: "f'(x*) does not annihilate the null basis".into(),
                });
            }
        }
    }

    if let (Some(b), Some(true), true) = (&p.bounds, bounds_ok, start_ok) {
        let gap = p
            .start
            .iter()
            .zip(b.lower.iter().zip(&b.upper))
            .map(|(x, (l, u))| (l - x).max(x - u).max(0.0))
            .fold(0.0_f64, f64::max);
        if !b.contains(&p.start) {
            out.push(Violation {
                invariant: "bounds",
                measured: gap,
                detail: "start lies outside the box [l, u]".into(),
            });
        }
    }

    if p.root_order == Some(0) {
        out.push(Violation {
            invariant: "root_order",
            measured: 0.0,
            detail: "root order must be a positive integer".into(),
        });
    }
    out
}

fn jacobian_max_abs(j: &JacobianMatrix) -> f64 {
    match j {
        JacobianMatrix::Dense(a) => a.max_abs(),
        JacobianMatrix::UpperBidiagonal(a) => a
            .diag
            .iter()
            .chain(&a.superdiag)
            .fold(a.corner.abs(), |m, v| m.max(v.abs())),
        JacobianMatrix::Operator(_) => j.to_dense().max_abs(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop once `‖f(x_k)‖ < tol`.
    pub tol: f64,
    pub max_iters: usize,
    /// Safeguard parameter `r ∈ (0, 1)`.
    pub r: f64,
    /// A line search runs only if the tentative step leaves
    /// `‖f‖ > ls_trigger · ‖f(x_k)‖`.
    pub ls_trigger: f64,
    pub ls_damping: f64,
    pub ls_step0: f64,
    pub ls_shrink: f64,
    /// Trial points per search, `j = 0..ls_max_trials`.
    pub ls_max_trials: usize,
    pub keep_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 50,
            r: 0.9,
            ls_trigger: 0.99,
            ls_damping: 1e-4,
            ls_step0: 0.5,
            ls_shrink: 0.3,
            ls_max_trials: 31,
            keep_history: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if self.max_iters < 1 {
            return bad("max_iters must be at least 1");
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return bad("r must lie in (0, 1)");
        }
        if !(self.ls_damping > 0.0 && self.ls_damping < 1.0) {
            return bad("ls_damping must lie in (0, 1)");
        }
        if !(self.ls_step0 > 0.0 && self.ls_step0 <= 1.0) {
            return bad("ls_step0 must lie in (0, 1]");
        }
        if !(self.ls_shrink > 0.0 && self.ls_shrink < 1.0) {
            return bad("ls_shrink must lie in (0, 1)");
        }
        if self.ls_max_trials < 1 {
            return bad("ls_max_trials must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Newton,
    Anderson,
    AndersonLinesearch,
    Lm,
    LmLinesearch,
    ProjectedGradient,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Newton => "newton",
            StepKind::Anderson => "anderson",
            StepKind::AndersonLinesearch => "anderson_linesearch",
            StepKind::Lm => "lm",
            StepKind::LmLinesearch => "lm_linesearch",
            StepKind::ProjectedGradient => "projected_gradient",
        }
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One step `x_k → x_{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// `‖f(x_k)‖`
    pub res_norm: f64,
    /// `‖w_{k+1}‖`, the Newton (or LM) step norm
    pub step_norm: f64,
    /// Mixing coefficient before safeguarding; `None` when none was formed.
    pub gamma_raw: Option<f64>,
    pub lambda: f64,
    pub gamma_used: f64,
    pub theta: f64,
    pub step_kind: StepKind,
    pub ls_evals: usize,
    /// The line search ran out of trials.
    pub ls_exhausted: bool,
}

impl IterationRecord {
    pub(crate) fn newton(k: usize, res_norm: f64, step_norm: f64, gamma_raw: Option<f64>) -> Self {
        Self {
            k,
            res_norm,
            step_norm,
            gamma_raw,
            lambda: 1.0,
            gamma_used: 0.0,
            theta: 1.0,
            step_kind: StepKind::Newton,
            ls_evals: 0,
            ls_exhausted: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOutcome {
    pub converged: bool,
    pub iterations: usize,
    pub final_res: f64,
    pub final_x: Vec<f64>,
    pub trace: Vec<IterationRecord>,
    /// `‖f(x_k)‖` for every iterate `k = 0..=iterations`.
    pub residual_history: Vec<f64>,
    pub iterate_history: Option<Vec<Vec<f64>>>,
    /// Residual evaluations, including line-search and acceptance trials.
    pub f_evals: usize,
    pub wall_time: f64,
    /// Why the solve stopped early, if it did for a reason other than the cap.
    #[serde(serialize_with = "failure_message")]
    pub failure: Option<Error>,
}

fn failure_message<S: serde::Serializer>(e: &Option<Error>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match e {
        Some(e) => s.serialize_some(&e.to_string()),
        None => s.serialize_none(),
    }
}

impl SolveOutcome {
    pub fn count_kind(&self, kind: StepKind) -> usize {
        self.trace.iter().filter(|r| r.step_kind == kind).count()
    }

    /// Steps on which a line search ran.
    pub fn linesearch_steps(&self) -> usize {
        self.trace.iter().filter(|r| r.ls_evals > 0).count()
    }
}
