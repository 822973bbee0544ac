use crate::problem::NonlinearProblem;

/// Largest entrywise discrepancy `|J - J_fd| / (1 + |J|)` between the
/// analytic Jacobian at `x` and a central-difference approximation with
/// column steps `h_j = ε^{1/3} (1 + |x_j|)`.
pub fn fd_jacobian_check(p: &NonlinearProblem, x: &[f64]) -> f64 {
    let n = p.dim();
    let analytic = p.jacobian(x).to_dense();
    let h0 = f64::EPSILON.cbrt();
    let mut worst: f64 = 0.0;
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = h0 * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let fp = p.residual(&xp);
        xp[j] = x[j] - h;
        let fm = p.residual(&xp);
        xp[j] = x[j];
        // the realized step, which can differ from 2h by rounding
        let width = (x[j] + h) - (x[j] - h);
        for i in 0..n {
            let fd = (fp[i] - fm[i]) / width;
            let a = analytic[(i, j)];
            worst = worst.max((a - fd).abs() / (1.0 + a.abs()));
        }
    }
    worst
}
