use newton_anderson::problems::{h_equation, multipoly, registry, registry_entry, HEquationSpec, MultipolySpec};
use newton_anderson::{solve, IterationRecord, MethodId, NonlinearProblem, SolverConfig, StepKind};
use serde::Serialize;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemSelector {
    HEquation(HEquationSpec),
    Multipoly(MultipolySpec),
    /// A registry entry by name; see [`registry`].
    Registry(String),
}

/// Settings that replace the defaults, which come from [`SolverConfig`] and,
/// for registry problems, from the entry's `r` and line-search step.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConfigOverrides {
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub r: Option<f64>,
    pub ls_step0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub problem: ProblemSelector,
    pub methods: Vec<MethodId>,
    pub overrides: ConfigOverrides,
    /// Keep every iterate, not only the per-step scalars.
    pub keep_history: bool,
    /// Run the methods on separate threads.
    pub parallel: bool,
}

impl ExperimentSpec {
    pub fn new(problem: ProblemSelector, methods: Vec<MethodId>) -> Self {
        Self {
            problem,
            methods,
            overrides: ConfigOverrides::default(),
            keep_history: false,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(HarnessError::NoMethods);
        }
        match &self.problem {
            ProblemSelector::HEquation(s) => s.validate()?,
            ProblemSelector::Multipoly(s) => s.validate()?,
            ProblemSelector::Registry(name) => {
                registry_entry(name)?;
            }
        }
        self.resolve_config(&SolverConfig::default()).validate()?;
        Ok(())
    }

    fn resolve_config(&self, base: &SolverConfig) -> SolverConfig {
        let o = &self.overrides;
        SolverConfig {
            tol: o.tol.unwrap_or(base.tol),
            max_iters: o.max_iters.unwrap_or(base.max_iters),
            r: o.r.unwrap_or(base.r),
            ls_step0: o.ls_step0.unwrap_or(base.ls_step0),
            keep_history: self.keep_history,
            ..base.clone()
        }
    }

    /// Build the problem with its display name and solver settings.
    fn instantiate(&self) -> Result<(String, NonlinearProblem, SolverConfig)> {
        let defaults = SolverConfig::default();
        match &self.problem {
            ProblemSelector::HEquation(s) => {
                let p = h_equation(*s)?;
                Ok((p.name.clone(), p, self.resolve_config(&defaults)))
            }
            ProblemSelector::Multipoly(s) => {
                let p = multipoly(*s)?;
                Ok((p.name.clone(), p, self.resolve_config(&defaults)))
            }
            ProblemSelector::Registry(name) => {
                let entry = registry_entry(name)?;
                let p = entry.build()?;
                let base = SolverConfig {
                    r: entry.r,
                    ls_step0: entry.ls_step0,
                    ..defaults
                };
                Ok((entry.name.to_string(), p, self.resolve_config(&base)))
            }
        }
    }
}

/// The outcome of one method on one problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodResult {
    pub method: MethodId,
    pub label: String,
    pub converged: bool,
    pub iterations: usize,
    pub f_evals: usize,
    pub final_res: f64,
    /// LM, LM line-search and projected-gradient step counts.
    pub lm_ls_pg: Option<(usize, usize, usize)>,
    /// Steps on which an Armijo search ran (Armijo variants only).
    pub ls_steps: Option<usize>,
    pub failure: Option<String>,
    pub trace: Vec<IterationRecord>,
    pub iterates: Option<Vec<Vec<f64>>>,
}

impl MethodResult {
    /// The step-split column: `lm/ls/pg` for LM, the search count for
    /// Armijo variants, `-` otherwise.
    pub fn split_column(&self) -> String {
        match (self.lm_ls_pg, self.ls_steps) {
            (Some((a, b, c)), _) => format!("{a}/{b}/{c}"),
            (None, Some(ls)) => ls.to_string(),
            (None, None) => "-".into(),
        }
    }

    fn failed(method: MethodId, label: String, err: newton_anderson::Error) -> Self {
        Self {
            method,
            label,
            converged: false,
            iterations: 0,
            f_evals: 0,
            final_res: f64::NAN,
            lm_ls_pg: None,
            ls_steps: None,
            failure: Some(err.to_string()),
            trace: Vec::new(),
            iterates: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub problem: String,
    pub config: SolverConfig,
    pub methods: Vec<MethodResult>,
}

fn run_method(method: MethodId, p: &NonlinearProblem, cfg: &SolverConfig) -> MethodResult {
    let label = method.label(cfg.r);
    let out = match solve(method, p, cfg) {
        Ok(out) => out,
        Err(e) => return MethodResult::failed(method, label, e),
    };
    let lm_ls_pg = (method == MethodId::ProjLm).then(|| {
        (
            out.count_kind(StepKind::Lm),
            out.count_kind(StepKind::LmLinesearch),
            out.count_kind(StepKind::ProjectedGradient),
        )
    });
    MethodResult {
        method,
        label,
        converged: out.converged,
        iterations: out.iterations,
        f_evals: out.f_evals,
        final_res: out.final_res,
        lm_ls_pg,
        ls_steps: method.linesearch().then(|| out.linesearch_steps()),
        failure: out.failure.as_ref().map(|e| e.to_string()),
        trace: out.trace,
        iterates: out.iterate_history,
    }
}

/// Run every requested method from the problem's start point. Solver
/// failures become non-converged rows; only an invalid experiment aborts.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunReport> {
    spec.validate()?;
    let (name, p, cfg) = spec.instantiate()?;
    let methods = if spec.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = spec
                .methods
                .iter()
                .map(|&m| {
                    let (p, cfg) = (&p, &cfg);
                    s.spawn(move || run_method(m, p, cfg))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("solver thread panicked"))
                .collect()
        })
    } else {
        spec.methods.iter().map(|&m| run_method(m, &p, &cfg)).collect()
    };
    Ok(RunReport {
        problem: name,
        config: cfg,
        methods,
    })
}

/// A registry entry left out of a matrix run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub problem: String,
    pub reason: String,
}

/// Run `methods` on every registry entry, in table order. Entries without
/// a transcribed system are skipped and listed.
pub fn run_registry(
    methods: &[MethodId],
    overrides: &ConfigOverrides,
    parallel: bool,
) -> Result<(Vec<RunReport>, Vec<Skipped>)> {
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for entry in registry() {
        if let Err(e) = entry.build() {
            skipped.push(Skipped {
                problem: entry.name.to_string(),
                reason: e.to_string(),
            });
            continue;
        }
        let spec = ExperimentSpec {
            overrides: overrides.clone(),
            parallel,
            ..ExperimentSpec::new(ProblemSelector::Registry(entry.name.to_string()), methods.to_vec())
        };
        reports.push(run_experiment(&spec)?);
    }
    Ok((reports, skipped))
}

/// Replace plain and safeguarded Newton-Anderson by their Armijo variants.
pub fn with_linesearch(methods: &[MethodId]) -> Vec<MethodId> {
    let mut out: Vec<MethodId> = Vec::with_capacity(methods.len());
    for &m in methods {
        let m = match m {
            MethodId::NAnderson => MethodId::ArmijoNAnderson,
            MethodId::GammaNAnderson => MethodId::GammaArmijoNAnderson,
            m => m,
        };
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn himmelblau(methods: Vec<MethodId>) -> ExperimentSpec {
        ExperimentSpec::new(ProblemSelector::Registry("Himmelbau".into()), methods)
    }

    #[test]
    fn empty_method_list_is_rejected() {
        assert!(matches!(
            run_experiment(&himmelblau(vec![])),
            Err(HarnessError::NoMethods)
        ));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let spec = ExperimentSpec::new(
            ProblemSelector::Multipoly(MultipolySpec { n: 1, k: 2 }),
            vec![MethodId::Newton],
        );
        assert!(matches!(spec.validate(), Err(HarnessError::Core(_))));
        let mut spec = himmelblau(vec![MethodId::Newton]);
        spec.overrides.r = Some(1.5);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn registry_settings_apply_unless_overridden() {
        let report = run_experiment(&himmelblau(vec![MethodId::GammaNAnderson])).unwrap();
        assert_eq!(report.config.r, 0.5);
        assert_eq!(report.methods[0].label, "γ-N.Anderson(0.5)");
        let mut spec = himmelblau(vec![MethodId::GammaNAnderson]);
        spec.overrides.r = Some(0.7);
        assert_eq!(run_experiment(&spec).unwrap().config.r, 0.7);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let mut spec = ExperimentSpec::new(
            ProblemSelector::Multipoly(MultipolySpec { n: 200, k: 3 }),
            MethodId::ALL.to_vec(),
        );
        let seq = run_experiment(&spec).unwrap();
        spec.parallel = true;
        let par = run_experiment(&spec).unwrap();
        assert_eq!(seq.methods.len(), par.methods.len());
        for (a, b) in seq.methods.iter().zip(&par.methods) {
            assert_eq!((a.method, a.iterations, a.f_evals), (b.method, b.iterations, b.f_evals));
            assert_eq!(a.final_res.to_bits(), b.final_res.to_bits());
        }
    }

    #[test]
    fn split_column_by_method() {
        let report = run_experiment(&himmelblau(MethodId::ALL.to_vec())).unwrap();
        let col: Vec<String> = report.methods.iter().map(|m| m.split_column()).collect();
        assert_eq!(col, ["-", "-", "-", "0", "0", "6/0/0"]);
    }

    #[test]
    fn linesearch_swaps_anderson_variants() {
        let m = with_linesearch(&[MethodId::Newton, MethodId::NAnderson, MethodId::ArmijoNAnderson]);
        assert_eq!(m, [MethodId::Newton, MethodId::ArmijoNAnderson]);
    }

    #[test]
    fn unavailable_entries_are_skipped_not_run() {
        let (reports, skipped) = run_registry(&[MethodId::Newton], &ConfigOverrides::default(), false).unwrap();
        assert_eq!(reports.len() + skipped.len(), registry().len());
        assert!(skipped.iter().any(|s| s.problem == "Decker1"));
    }
}
