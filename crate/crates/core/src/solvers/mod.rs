//! Plain Newton, depth-one Newton-Anderson with optional γ-safeguarding and
//! Armijo line search, and a projected Levenberg-Marquardt comparator.

mod anderson;
mod linesearch;
mod lm;
mod newton;
mod run;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use anderson::{anderson_combine, gamma_safeguard, newton_anderson_solve, SafeguardDecision};
pub use linesearch::{armijo_search, merit_slope, LineSearchResult};
pub use lm::{projected_lm_solve, projected_lm_solve_with, LmParams};
pub use newton::{newton_solve, newton_step};

use crate::problem::{NonlinearProblem, SolveOutcome, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodId {
    Newton,
    NAnderson,
    GammaNAnderson,
    ArmijoNAnderson,
    GammaArmijoNAnderson,
    ProjLm,
}

impl MethodId {
    pub const ALL: [MethodId; 6] = [
        MethodId::Newton,
        MethodId::NAnderson,
        MethodId::GammaNAnderson,
        MethodId::ArmijoNAnderson,
        MethodId::GammaArmijoNAnderson,
        MethodId::ProjLm,
    ];

    /// The four Newton-Anderson variants.
    pub const ANDERSON: [MethodId; 4] = [
        MethodId::NAnderson,
        MethodId::GammaNAnderson,
        MethodId::ArmijoNAnderson,
        MethodId::GammaArmijoNAnderson,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodId::Newton => "newton",
            MethodId::NAnderson => "n_anderson",
            MethodId::GammaNAnderson => "gamma_n_anderson",
            MethodId::ArmijoNAnderson => "armijo_n_anderson",
            MethodId::GammaArmijoNAnderson => "gamma_armijo_n_anderson",
            MethodId::ProjLm => "proj_lm",
        }
    }

    pub fn safeguarded(self) -> bool {
        matches!(self, MethodId::GammaNAnderson | MethodId::GammaArmijoNAnderson)
    }

    pub fn linesearch(self) -> bool {
        matches!(self, MethodId::ArmijoNAnderson | MethodId::GammaArmijoNAnderson)
    }

    /// Human-readable label; safeguarded variants carry `r`.
    pub fn label(self, r: f64) -> String {
        match self {
            MethodId::Newton => "Newton".into(),
            MethodId::NAnderson => "N.Anderson".into(),
            MethodId::GammaNAnderson => format!("γ-N.Anderson({r})"),
            MethodId::ArmijoNAnderson => "Armijo-N.Anderson".into(),
            MethodId::GammaArmijoNAnderson => format!("γ-Armijo-N.Anderson({r})"),
            MethodId::ProjLm => "Proj-Lev-Marq".into(),
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MethodId::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| {
            let names: Vec<_> = MethodId::ALL.iter().map(|m| m.as_str()).collect();
            format!("unknown method `{s}` (expected one of {})", names.join(", "))
        })
    }
}

/// Run `method` on `p`.
pub fn solve(method: MethodId, p: &NonlinearProblem, cfg: &SolverConfig) -> crate::Result<SolveOutcome> {
    match method {
        MethodId::Newton => newton_solve(p, cfg),
        MethodId::ProjLm => projected_lm_solve(p, cfg),
        m => newton_anderson_solve(p, cfg, m.safeguarded(), m.linesearch()),
    }
}
