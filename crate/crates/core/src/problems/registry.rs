//! Small-scale benchmark systems, looked up by name.
//!
//! Entries whose definitions have not been transcribed stay in the list with
//! a reason, so callers can report them as skipped.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, JacobianMatrix};
use crate::problem::{Bounds, NonlinearProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkGroup {
    Nonsingular,
    Singular,
}

#[derive(Debug, Clone, Copy)]
enum Source {
    Transcribed(fn() -> NonlinearProblem),
    Unavailable(&'static str),
}

/// A named benchmark with its per-problem solver settings.
#[derive(Debug, Clone, Copy)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub group: BenchmarkGroup,
    /// Safeguard parameter used for this problem.
    pub r: f64,
    /// Initial Armijo step for the Anderson variants.
    pub ls_step0: f64,
    source: Source,
}

impl RegistryEntry {
    pub fn is_available(&self) -> bool {
        matches!(self.source, Source::Transcribed(_))
    }

    pub fn build(&self) -> Result<NonlinearProblem> {
        match self.source {
            Source::Transcribed(ctor) => Ok(ctor()),
            Source::Unavailable(reason) => Err(Error::ProblemUnavailable {
                name: self.name.to_string(),
                reason: reason.to_string(),
            }),
        }
    }
}

const UNKNOWN_SOURCE: &str = "system and starting point are defined only in the cited source, which is not transcribed";

const DAYTON_SOURCE: &str = "the only published candidate with this name and a (0.9, 0.9, 0.9, 0.9) start converges to a nonsingular root, so it is not the benchmark system";

const fn entry(name: &'static str, group: BenchmarkGroup, r: f64, source: Source) -> RegistryEntry {
    RegistryEntry {
        name,
        group,
        r,
        ls_step0: 0.5,
        source,
    }
}

pub fn registry() -> Vec<RegistryEntry> {
    use BenchmarkGroup::*;
    use Source::*;
    vec![
        entry("Himmelbau", Nonsingular, 0.5, Transcribed(himmelblau)),
        entry("Eq-Combustion", Nonsingular, 0.5, Transcribed(combustion)),
        entry("Bullard-Biegler", Nonsingular, 0.5, Transcribed(bullard_biegler)),
        entry("Ferraris-Tronconi", Nonsingular, 0.5, Transcribed(ferraris_tronconi)),
        entry("Brown's Al. Lin.", Nonsingular, 0.5, Transcribed(brown_almost_linear)),
        entry("Robot Kin. Sys.", Nonsingular, 0.5, Transcribed(robot_kinematics)),
        entry("Decker1", Singular, 0.9, Unavailable(UNKNOWN_SOURCE)),
        entry("Decker2", Singular, 0.9, Unavailable(UNKNOWN_SOURCE)),
        entry("Ojika1", Singular, 0.9, Unavailable(UNKNOWN_SOURCE)),
        entry("Ojika2", Singular, 0.9, Unavailable(UNKNOWN_SOURCE)),
        entry("Pollock1", Singular, 0.9, Unavailable(UNKNOWN_SOURCE)),
        RegistryEntry {
            ls_step0: 0.8,
            ..entry("Dayton10", Singular, 0.5, Unavailable(DAYTON_SOURCE))
        },
        entry("Hueso1", Singular, 0.9, Unavailable(UNKNOWN_SOURCE)),
        entry("Hueso6", Singular, 0.9, Unavailable(UNKNOWN_SOURCE)),
    ]
}

pub fn registry_entry(name: &str) -> Result<RegistryEntry> {
    registry()
        .into_iter()
        .find(|e| e.name.eq_ignore_ascii_case(name) || slug(e.name) == slug(name))
        .ok_or_else(|| Error::ProblemUnavailable {
            name: name.to_string(),
            reason: "not in the registry".into(),
        })
}

/// Lower-case alphanumeric form used for forgiving lookups, e.g.
/// `brownsallin` for "Brown's Al. Lin.".
pub fn slug(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

fn dense(rows: Vec<Vec<f64>>) -> JacobianMatrix {
    JacobianMatrix::Dense(DenseMatrix::from_rows(&rows).expect("square rows"))
}

fn boxed(
    name: &str,
    n: usize,
    residual: fn(&[f64]) -> Vec<f64>,
    jacobian: fn(&[f64]) -> JacobianMatrix,
    bounds: Bounds,
) -> NonlinearProblem {
    NonlinearProblem::from_fns(name, n, residual, jacobian, bounds.lower.clone()).with_bounds(bounds)
}

fn himmelblau() -> NonlinearProblem {
    fn f(x: &[f64]) -> Vec<f64> {
        let (a, b) = (x[0], x[1]);
        vec![
            4.0 * a.powi(3) + 4.0 * a * b + 2.0 * b * b - 42.0 * a - 14.0,
            4.0 * b.powi(3) + 2.0 * a * a + 4.0 * a * b - 26.0 * b - 22.0,
        ]
    }
    fn j(x: &[f64]) -> JacobianMatrix {
        let (a, b) = (x[0], x[1]);
        dense(vec![
            vec![12.0 * a * a + 4.0 * b - 42.0, 4.0 * a + 4.0 * b],
            vec![4.0 * a + 4.0 * b, 12.0 * b * b + 4.0 * a - 26.0],
        ])
    }
    boxed("Himmelbau", 2, f, j, Bounds::new(vec![-5.0; 2], vec![5.0; 2]))
}

mod combustion_consts {
    pub const R: f64 = 10.0;
    pub const R5: f64 = 0.193;
    pub fn r6() -> f64 {
        0.002597 / 40f64.sqrt()
    }
    pub fn r7() -> f64 {
        0.003448 / 40f64.sqrt()
    }
    pub const R8: f64 = 0.00001799 / 40.0;
    pub fn r9() -> f64 {
        0.0002155 / 40f64.sqrt()
    }
    pub const R10: f64 = 0.00003846 / 40.0;
}

fn combustion() -> NonlinearProblem {
    use combustion_consts::*;
    fn f(x: &[f64]) -> Vec<f64> {
        let (x1, x2, x3, x4, x5) = (x[0], x[1], x[2], x[3], x[4]);
        let (r6, r7, r9) = (r6(), r7(), r9());
        vec![
            x1 * x2 + x1 - 3.0 * x5,
            2.0 * x1 * x2 + x1 + x2 * x3 * x3 + R8 * x2 - R * x5 + 2.0 * R10 * x2 * x2 + r7 * x2 * x3 + r9 * x2 * x4,
            2.0 * x2 * x3 * x3 + 2.0 * R5 * x3 * x3 - 8.0 * x5 + r6 * x3 + r7 * x2 * x3,
            r9 * x2 * x4 + 2.0 * x4 * x4 - 4.0 * R * x5,
            x1 * (x2 + 1.0) + R10 * x2 * x2 + x2 * x3 * x3 + R8 * x2 + R5 * x3 * x3 + x4 * x4 - 1.0
                + r6 * x3
                + r7 * x2 * x3
                + r9 * x2 * x4,
        ]
    }
    fn j(x: &[f64]) -> JacobianMatrix {
        let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
        let (r6, r7, r9) = (r6(), r7(), r9());
        dense(vec![
            vec![x2 + 1.0, x1, 0.0, 0.0, -3.0],
            vec![
                2.0 * x2 + 1.0,
                2.0 * x1 + x3 * x3 + R8 + 4.0 * R10 * x2 + r7 * x3 + r9 * x4,
                2.0 * x2 * x3 + r7 * x2,
                r9 * x2,
                -R,
            ],
            vec![
                0.0,
                2.0 * x3 * x3 + r7 * x3,
                4.0 * x2 * x3 + 4.0 * R5 * x3 + r6 + r7 * x2,
                0.0,
                -8.0,
            ],
            vec![0.0, r9 * x4, 0.0, r9 * x2 + 4.0 * x4, -4.0 * R],
            vec![
                x2 + 1.0,
                x1 + 2.0 * R10 * x2 + x3 * x3 + R8 + r7 * x3 + r9 * x4,
                2.0 * x2 * x3 + 2.0 * R5 * x3 + r6 + r7 * x2,
                2.0 * x4 + r9 * x2,
                0.0,
            ],
        ])
    }
    boxed("Eq-Combustion", 5, f, j, Bounds::new(vec![1e-4; 5], vec![100.0; 5]))
}

fn bullard_biegler() -> NonlinearProblem {
    fn f(x: &[f64]) -> Vec<f64> {
        vec![1e4 * x[0] * x[1] - 1.0, (-x[0]).exp() + (-x[1]).exp() - 1.001]
    }
    fn j(x: &[f64]) -> JacobianMatrix {
        dense(vec![vec![1e4 * x[1], 1e4 * x[0]], vec![-(-x[0]).exp(), -(-x[1]).exp()]])
    }
    boxed(
        "Bullard-Biegler",
        2,
        f,
        j,
        Bounds::new(vec![5.49e-6, 2.196e-3], vec![4.553, 18.21]),
    )
}

fn ferraris_tronconi() -> NonlinearProblem {
    fn f(x: &[f64]) -> Vec<f64> {
        let (a, b) = (x[0], x[1]);
        vec![
            0.5 * (a * b).sin() - 0.25 * b / PI - 0.5 * a,
            (1.0 - 0.25 / PI) * ((2.0 * a).exp() - E) + E * b / PI - 2.0 * E * a,
        ]
    }
    fn j(x: &[f64]) -> JacobianMatrix {
        let (a, b) = (x[0], x[1]);
        let c = (a * b).cos();
        dense(vec![
            vec![0.5 * b * c - 0.5, 0.5 * a * c - 0.25 / PI],
            vec![(1.0 - 0.25 / PI) * 2.0 * (2.0 * a).exp() - 2.0 * E, E / PI],
        ])
    }
    boxed(
        "Ferraris-Tronconi",
        2,
        f,
        j,
        Bounds::new(vec![0.25, 1.5], vec![1.0, 2.0 * PI]),
    )
}

fn brown_almost_linear() -> NonlinearProblem {
    const N: usize = 5;
    fn f(x: &[f64]) -> Vec<f64> {
        let sum: f64 = x.iter().sum();
        let mut out: Vec<f64> = x[..N - 1].iter().map(|xi| xi + sum - (N as f64 + 1.0)).collect();
        out.push(x.iter().product::<f64>() - 1.0);
        out
    }
    fn j(x: &[f64]) -> JacobianMatrix {
        let mut rows: Vec<Vec<f64>> = (0..N - 1)
            .map(|i| (0..N).map(|c| if c == i { 2.0 } else { 1.0 }).collect())
            .collect();
        rows.push(
            (0..N)
                .map(|c| x.iter().enumerate().filter(|(i, _)| *i != c).map(|(_, v)| v).product())
                .collect(),
        );
        dense(rows)
    }
    boxed("Brown's Al. Lin.", N, f, j, Bounds::new(vec![-2.0; N], vec![2.0; N]))
}

fn robot_kinematics() -> NonlinearProblem {
    fn f(x: &[f64]) -> Vec<f64> {
        let (x1, x2, x3, x4, x5, x6, x7, x8) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]);
        vec![
            4.731e-3 * x1 * x3 - 0.3578 * x2 * x3 - 0.1238 * x1 + x7 - 1.637e-3 * x2 - 0.9338 * x4 - 0.3571,
            0.2238 * x1 * x3 + 0.7623 * x2 * x3 + 0.2638 * x1 - x7 - 0.07745 * x2 - 0.6734 * x4 - 0.6022,
            x6 * x8 + 0.3578 * x1 + 4.731e-3 * x2,
            -0.7623 * x1 + 0.2238 * x2 + 0.3461,
            x1 * x1 + x2 * x2 - 1.0,
            x3 * x3 + x4 * x4 - 1.0,
            x5 * x5 + x6 * x6 - 1.0,
            x7 * x7 + x8 * x8 - 1.0,
        ]
    }
    fn j(x: &[f64]) -> JacobianMatrix {
        let (x1, x2, x3, x4, x5, x6, x7, x8) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]);
        dense(vec![
            vec![
                4.731e-3 * x3 - 0.1238,
                -0.3578 * x3 - 1.637e-3,
                4.731e-3 * x1 - 0.3578 * x2,
                -0.9338,
                0.0,
                0.0,
                1.0,
                0.0,
            ],
            vec![
                0.2238 * x3 + 0.2638,
                0.7623 * x3 - 0.07745,
                0.2238 * x1 + 0.7623 * x2,
                -0.6734,
                0.0,
                0.0,
                -1.0,
                0.0,
            ],
            vec![0.3578, 4.731e-3, 0.0, 0.0, 0.0, x8, 0.0, x6],
            vec![-0.7623, 0.2238, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![2.0 * x1, 2.0 * x2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 2.0 * x3, 2.0 * x4, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 2.0 * x5, 2.0 * x6, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0 * x7, 2.0 * x8],
        ])
    }
    boxed("Robot Kin. Sys.", 8, f, j, Bounds::new(vec![-1.0; 8], vec![1.0; 8]))
}
