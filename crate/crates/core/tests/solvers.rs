use newton_anderson::diagnostics::theta_gain;
use newton_anderson::linalg::{dot, lu_solve, norm, sub, DenseMatrix, JacobianMatrix};
use newton_anderson::problems::{h_equation, multipoly, registry, HEquationSpec, MultipolySpec};
use newton_anderson::solvers::{gamma_safeguard, newton_step};
use newton_anderson::{solve, MethodId, NonlinearProblem, SolveOutcome, SolverConfig, StepKind};
use proptest::prelude::*;

fn square() -> NonlinearProblem {
    NonlinearProblem::from_fns(
        "square",
        1,
        |x| vec![x[0] * x[0]],
        |x| JacobianMatrix::Dense(DenseMatrix::from_rows(&[vec![2.0 * x[0]]]).unwrap()),
        vec![1.0],
    )
}

fn history_cfg() -> SolverConfig {
    SolverConfig {
        keep_history: true,
        ..SolverConfig::default()
    }
}

fn sample_runs() -> Vec<(NonlinearProblem, MethodId, SolveOutcome)> {
    let mut problems = vec![
        multipoly(MultipolySpec { n: 50, k: 2 }).unwrap(),
        multipoly(MultipolySpec { n: 50, k: 7 }).unwrap(),
        h_equation(HEquationSpec { n: 40, omega: 1.0 }).unwrap(),
    ];
    problems.extend(
        registry()
            .iter()
            .filter(|e| e.is_available())
            .map(|e| e.build().unwrap()),
    );
    let mut out = Vec::new();
    for p in problems {
        for m in MethodId::ALL {
            let o = solve(m, &p, &history_cfg()).unwrap();
            out.push((p.clone(), m, o));
        }
    }
    out
}

#[test]
fn newton_on_square_halves_until_k14() {
    let o = solve(MethodId::Newton, &square(), &SolverConfig::default()).unwrap();
    assert!(o.converged);
    assert_eq!(o.iterations, 14);
    assert_eq!(o.final_x[0], 0.5f64.powi(14));
}

#[test]
fn anderson_on_square_hits_zero_then_one_sixth() {
    let cfg = history_cfg();
    let plain = solve(MethodId::NAnderson, &square(), &cfg).unwrap();
    assert!(plain.converged);
    assert_eq!(plain.iterations, 2);
    assert_eq!(plain.final_x[0], 0.0);

    let safe = SolverConfig { r: 0.5, ..cfg };
    let o = solve(MethodId::GammaNAnderson, &square(), &safe).unwrap();
    let x2 = o.iterate_history.unwrap()[2][0];
    assert!((x2 - 1.0 / 6.0).abs() <= 1e-15);
}

#[test]
fn traces_are_gapless_and_newton_records_are_plain() {
    for (p, m, o) in sample_runs() {
        assert_eq!(o.trace.len(), o.iterations, "{} {m}", p.name);
        assert_eq!(o.residual_history.len(), o.iterations + 1);
        for (i, r) in o.trace.iter().enumerate() {
            assert_eq!(r.k, i);
            if r.step_kind == StepKind::Newton {
                assert_eq!((r.gamma_used, r.theta), (0.0, 1.0), "{} {m} k={i}", p.name);
            }
        }
    }
}

#[test]
fn f_evals_follow_the_cost_model() {
    for (p, m, o) in sample_runs() {
        match m {
            MethodId::Newton | MethodId::NAnderson | MethodId::GammaNAnderson => {
                assert_eq!(o.f_evals, o.iterations + 1, "{} {m}", p.name)
            }
            _ => {
                let extra: usize = o.trace.iter().map(|r| r.ls_evals).sum();
                assert!(o.f_evals >= o.iterations + 1 + extra, "{} {m}", p.name);
            }
        }
    }
}

#[test]
fn safeguard_bound_and_theta_range_on_runs() {
    for (p, m, o) in sample_runs() {
        for (i, r) in o.trace.iter().enumerate() {
            assert!(
                (0.0..=1.0 + 1e-12).contains(&r.theta),
                "{} {m} k={i} theta={}",
                p.name,
                r.theta
            );
            if m.safeguarded() && r.lambda < 1.0 {
                let beta = 0.9 * r.step_norm / o.trace[i - 1].step_norm;
                let g = r.gamma_used;
                assert!(g.abs() / (1.0 - g).abs() <= beta + 1e-12, "{} {m} k={i}", p.name);
            }
        }
    }
}

#[test]
fn theta_is_the_sine_against_the_new_step() {
    let p = multipoly(MultipolySpec { n: 30, k: 3 }).unwrap();
    let o = solve(MethodId::NAnderson, &p, &history_cfg()).unwrap();
    let xs = o.iterate_history.unwrap();
    for (i, r) in o.trace.iter().enumerate().skip(1) {
        if r.step_kind != StepKind::Anderson {
            continue;
        }
        let (w_next, _) = newton_step(&p, &xs[i]).unwrap();
        let (w_prev, _) = newton_step(&p, &xs[i - 1]).unwrap();
        let d = sub(&w_next, &w_prev);
        let cos = dot(&d, &w_next) / (norm(&d) * norm(&w_next));
        let sine = (1.0 - cos * cos).max(0.0).sqrt();
        assert!((r.theta - sine).abs() <= 1e-10, "k={i}: {} vs {sine}", r.theta);
    }
}

#[test]
fn h_equation_newton_step_matches_fd_jacobian_solve() {
    let p = h_equation(HEquationSpec { n: 500, omega: 1.0 }).unwrap();
    let x = p.start.clone();
    let (w, f) = newton_step(&p, &x).unwrap();
    assert!(norm(&w).is_finite());
    let n = p.dim();
    let mut cols = Vec::with_capacity(n);
    let mut xp = x.clone();
    for j in 0..n {
        let h = f64::EPSILON.cbrt() * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let fp = p.residual(&xp);
        xp[j] = x[j] - h;
        let fm = p.residual(&xp);
        xp[j] = x[j];
        cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>());
    }
    let data: Vec<f64> = (0..n * n).map(|idx| cols[idx % n][idx / n]).collect();
    let fd = DenseMatrix::from_row_major(n, n, data).unwrap();
    let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
    let w_fd = lu_solve(&fd, &rhs).unwrap();
    assert!(norm(&sub(&w, &w_fd)) <= 1e-6 * norm(&w_fd));
}

#[test]
fn himmelblau_lm_takes_six_pure_steps() {
    let p = registry()
        .into_iter()
        .find(|e| e.name == "Himmelbau")
        .unwrap()
        .build()
        .unwrap();
    let o = solve(MethodId::ProjLm, &p, &SolverConfig::default()).unwrap();
    assert!(o.converged);
    assert_eq!(o.iterations, 6);
    assert_eq!(o.count_kind(StepKind::Lm), 6);
    assert_eq!(o.f_evals, 7);
}

#[test]
fn lm_on_multipoly_slows_with_root_order() {
    let cfg = SolverConfig {
        max_iters: 200,
        ..SolverConfig::default()
    };
    let its: Vec<usize> = [2, 3, 7]
        .iter()
        .map(|&k| {
            let p = multipoly(MultipolySpec { n: 100, k }).unwrap();
            let o = solve(MethodId::ProjLm, &p, &cfg).unwrap();
            assert!(o.converged, "k={k}");
            o.iterations
        })
        .collect();
    assert!(its[0] <= its[1] && its[1] <= its[2], "{its:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn safeguard_case_law(gamma in -5.0f64..5.0, a in 1e-6f64..10.0, b in 1e-6f64..10.0, r in 0.01f64..0.99) {
        let d = gamma_safeguard(gamma, a, b, r);
        let beta = r * a / b;
        prop_assert_eq!(d.beta, beta);
        prop_assert_eq!(d.took_newton_step, gamma == 0.0 || gamma >= 1.0);
        prop_assert!(d.lambda > 0.0 && d.lambda <= 1.0);
        if d.scaled && !d.took_newton_step {
            let g = d.lambda * gamma;
            prop_assert!(g.abs() / (1.0 - g).abs() <= beta + 1e-12);
        }
        if !d.scaled {
            prop_assert_eq!(d.lambda, 1.0);
        }
    }

    #[test]
    fn theta_is_minimal_at_the_raw_coefficient(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..20);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = newton_anderson::linalg::lstsq_gamma(&w, &v).unwrap();
        let best = theta_gain(&w, &v, g).unwrap();
        for i in -2000..=2000 {
            prop_assert!(best <= theta_gain(&w, &v, i as f64 * 1e-3).unwrap() + 1e-14);
        }
    }
}
