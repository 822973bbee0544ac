//! Small dense and structured linear algebra kernel.
//!
//! Vectors are plain `&[f64]` / `Vec<f64>`. Matrices come in the three
//! shapes the solvers need: dense row-major, upper bidiagonal with a
//! distinguished `(n, n)` entry, and an opaque operator with its own solve.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm, scaled to avoid overflow on large entries.
pub fn norm(a: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let ss: f64 = a.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * ss.sqrt()
}

/// `a - b`
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + b`
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

/// Dense square or rectangular matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ x`
    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "matvec_transpose dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            axpy(*xi, self.row(i), &mut out);
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `AᵀA + shift·I`
    pub fn gram_shifted(&self, shift: f64) -> DenseMatrix {
        let n = self.cols;
        let mut g = DenseMatrix::zeros(n, n);
        for k in 0..self.rows {
            let row = self.row(k);
            for i in 0..n {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                let gi = &mut g.data[i * n..(i + 1) * n];
                for j in 0..n {
                    gi[j] += ri * row[j];
                }
            }
        }
        for i in 0..n {
            g[(i, i)] += shift;
        }
        g
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", &self.row(i)[..self.cols.min(8)])?;
        }
        write!(f, "]")
    }
}

/// LU factors `PA = LU` with partial (row) pivoting.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    /// Factor `a`. Fails with `SingularMatrix` when a pivot falls below
    /// `eps * max|A|`.
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        Self::with_threshold(a, f64::EPSILON * a.max_abs())
    }

    /// Factor `a`, failing only when a pivot is not above `threshold`.
    pub(crate) fn with_threshold(a: &DenseMatrix, threshold: f64) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::DimensionMismatch {
                expected: a.rows,
                got: a.cols,
            });
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|i| (i, lu[i * n + k].abs()))
                    .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if !(pivot > threshold) {
                return Err(Error::SingularMatrix {
                    column: k,
                    pivot,
                    threshold,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pkk = lu[k * n + k];
            for i in (k + 1)..n {
                let l = lu[i * n + k] / pkk;
                lu[i * n + k] = l;
                if l != 0.0 {
                    let (head, tail) = lu.split_at_mut(i * n);
                    let rk = &head[k * n + k + 1..k * n + n];
                    let ri = &mut tail[k + 1..n];
                    for (x, y) in ri.iter_mut().zip(rk) {
                        *x -= l * y;
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            x[i] -= dot(row, &x[..i]);
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s = dot(row, &x[i + 1..]);
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }

    /// Solve `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        // Uᵀ z = b
        let mut z = b.to_vec();
        for i in 0..n {
            z[i] /= self.lu[i * n + i];
            let zi = z[i];
            for (zj, l) in z[i + 1..].iter_mut().zip(&self.lu[i * n + i + 1..(i + 1) * n]) {
                *zj -= l * zi;
            }
        }
        // Lᵀ y = z
        for i in (0..n).rev() {
            let yi = z[i];
            for (zj, l) in z[..i].iter_mut().zip(&self.lu[i * n..i * n + i]) {
                *zj -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }
}

pub fn lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows {
        return Err(Error::DimensionMismatch {
            expected: a.rows,
            got: b.len(),
        });
    }
    Ok(LuFactors::new(a)?.solve(b))
}

/// Upper bidiagonal matrix whose last diagonal entry is stored separately.
///
/// Row `i < n-1` holds `diag[i]` at column `i` and `superdiag[i]` at column
/// `i+1`; row `n-1` holds only `corner` at column `n-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBidiagonal {
    pub diag: Vec<f64>,
    pub superdiag: Vec<f64>,
    pub corner: f64,
}

impl UpperBidiagonal {
    pub fn new(diag: Vec<f64>, superdiag: Vec<f64>, corner: f64) -> Result<Self> {
        if diag.len() != superdiag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len(),
                got: superdiag.len(),
            });
        }
        Ok(Self {
            diag,
            superdiag,
            corner,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len() + 1
    }

    fn pivot(&self, i: usize) -> f64 {
        if i + 1 == self.dim() {
            self.corner
        } else {
            self.diag[i]
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n - 1 {
            y[i] = self.diag[i] * x[i] + self.superdiag[i] * x[i + 1];
        }
        y[n - 1] = self.corner * x[n - 1];
        y
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        y[0] = self.pivot(0) * x[0];
        for j in 1..n {
            y[j] = self.pivot(j) * x[j] + self.superdiag[j - 1] * x[j - 1];
        }
        y
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n - 1 {
            a[(i, i)] = self.diag[i];
            a[(i, i + 1)] = self.superdiag[i];
        }
        a[(n - 1, n - 1)] = self.corner;
        a
    }
}

/// Back substitution on an [`UpperBidiagonal`] matrix, O(n).
///
/// Only an exactly zero (or non-finite) pivot is reported as singular:
/// triangular back substitution is backward stable for any nonzero pivot,
/// and near a high-order root the corner entry is legitimately tiny.
pub fn structured_solve(a: &UpperBidiagonal, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let threshold = 0.0;
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let p = a.pivot(i);
        if !(p.abs() > threshold) {
            return Err(Error::SingularMatrix {
                column: i,
                pivot: p.abs(),
                threshold,
            });
        }
        let rhs = if i + 1 < n {
            b[i] - a.superdiag[i] * x[i + 1]
        } else {
            b[i]
        };
        x[i] = rhs / p;
    }
    Ok(x)
}

/// Matrix-free Jacobian: products with `J` and `Jᵀ` plus a solve.
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn apply_transpose(&self, x: &[f64]) -> Vec<f64>;
    fn solve(&self, b: &[f64]) -> Result<Vec<f64>>;
}

/// A Jacobian in one of the supported representations.
#[derive(Clone)]
pub enum JacobianMatrix {
    Dense(DenseMatrix),
    UpperBidiagonal(UpperBidiagonal),
    Operator(Arc<dyn LinearOperator>),
}

impl fmt::Debug for JacobianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JacobianMatrix::Dense(a) => a.fmt(f),
            JacobianMatrix::UpperBidiagonal(a) => a.fmt(f),
            JacobianMatrix::Operator(op) => write!(f, "Operator(dim={})", op.dim()),
        }
    }
}

impl JacobianMatrix {
    pub fn dim(&self) -> usize {
        match self {
            JacobianMatrix::Dense(a) => a.rows(),
            JacobianMatrix::UpperBidiagonal(a) => a.dim(),
            JacobianMatrix::Operator(op) => op.dim(),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        match self {
            JacobianMatrix::Dense(a) => a.matvec(x),
            JacobianMatrix::UpperBidiagonal(a) => a.matvec(x),
            JacobianMatrix::Operator(op) => op.apply(x),
        }
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        match self {
            JacobianMatrix::Dense(a) => a.matvec_transpose(x),
            JacobianMatrix::UpperBidiagonal(a) => a.matvec_transpose(x),
            JacobianMatrix::Operator(op) => op.apply_transpose(x),
        }
    }

    /// Solve `J x = b` with the representation's own solver.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            JacobianMatrix::Dense(a) => lu_solve(a, b),
            JacobianMatrix::UpperBidiagonal(a) => structured_solve(a, b),
            JacobianMatrix::Operator(op) => op.solve(b),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            JacobianMatrix::Dense(a) => a.clone(),
            JacobianMatrix::UpperBidiagonal(a) => a.to_dense(),
            JacobianMatrix::Operator(op) => {
                let n = op.dim();
                let mut a = DenseMatrix::zeros(n, n);
                let mut e = vec![0.0; n];
                for j in 0..n {
                    e[j] = 1.0;
                    let col = op.apply(&e);
                    e[j] = 0.0;
                    for (i, v) in col.into_iter().enumerate() {
                        a[(i, j)] = v;
                    }
                }
                a
            }
        }
    }

    /// Solve the regularized normal equations `(JᵀJ + mu·I) d = -Jᵀ r`.
    ///
    /// The bidiagonal form yields a symmetric tridiagonal system solved in
    /// O(n); the other forms are densified. For `mu > 0` the matrix is
    /// positive definite, so only a non-positive pivot counts as singular.
    pub fn normal_equations_solve(&self, r: &[f64], mu: f64) -> Result<Vec<f64>> {
        let rhs: Vec<f64> = self.matvec_transpose(r).into_iter().map(|v| -v).collect();
        match self {
            JacobianMatrix::UpperBidiagonal(a) => {
                let n = a.dim();
                let mut main = vec![0.0; n];
                let mut off = vec![0.0; n - 1];
                for j in 0..n {
                    let p = a.pivot(j);
                    main[j] = p * p + mu;
                    if j > 0 {
                        main[j] += a.superdiag[j - 1] * a.superdiag[j - 1];
                    }
                    if j + 1 < n {
                        off[j] = a.diag[j] * a.superdiag[j];
                    }
                }
                tridiagonal_solve(&main, &off, &rhs)
            }
            _ => {
                let g = self.to_dense().gram_shifted(mu);
                Ok(LuFactors::with_threshold(&g, 0.0)?.solve(&rhs))
            }
        }
    }
}

/// Thomas algorithm for a symmetric tridiagonal system.
fn tridiagonal_solve(main: &[f64], off: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = main.len();
    let threshold = 0.0;
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = main[0];
    for i in 0..n {
        if i > 0 {
            denom = main[i] - off[i - 1] * c[i - 1];
        }
        if !(denom.abs() > threshold) {
            return Err(Error::SingularMatrix {
                column: i,
                pivot: denom.abs(),
                threshold,
            });
        }
        if i + 1 < n {
            c[i] = off[i] / denom;
        }
        let prev = if i > 0 { off[i - 1] * d[i - 1] } else { 0.0 };
        d[i] = (b[i] - prev) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Mixing coefficient minimizing `‖w_next - γ (w_next - w_prev)‖`.
pub fn lstsq_gamma(w_next: &[f64], w_prev: &[f64]) -> Result<f64> {
    let diff = sub(w_next, w_prev);
    let diff_norm = norm(&diff);
    if diff_norm <= f64::EPSILON * (norm(w_next) + norm(w_prev)) || diff_norm == 0.0 {
        return Err(Error::DegenerateSteps { diff_norm });
    }
    Ok(dot(&diff, w_next) / dot(&diff, &diff))
}

/// Smallest singular values of `a` with their right singular vectors, by
/// deflated inverse iteration on `AᵀA`. Returned in increasing order.
pub fn smallest_singular_pairs(a: &DenseMatrix, count: usize, max_iters: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let lu = LuFactors::new(a)?;
    let n = lu.dim();
    let mut found: Vec<(f64, Vec<f64>)> = Vec::with_capacity(count);
    for c in 0..count.min(n) {
        // deterministic, not orthogonal to anything in particular
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7 + c * 13) % 11) as f64 / 11.0).collect();
        let mut prev_sigma = f64::INFINITY;
        for _ in 0..max_iters {
            for (_, u) in &found {
                let p = dot(&v, u);
                axpy(-p, u, &mut v);
            }
            let nv = norm(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            let z = lu.solve_transpose(&v);
            v = lu.solve(&z);
            for (_, u) in &found {
                let p = dot(&v, u);
                axpy(-p, u, &mut v);
            }
            let nv = norm(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            let sigma = norm(&a.matvec(&v));
            if (sigma - prev_sigma).abs() <= 1e-14 * sigma.max(f64::MIN_POSITIVE) {
                break;
            }
            prev_sigma = sigma;
        }
        let sigma = norm(&a.matvec(&v));
        found.push((sigma, v));
    }
    Ok(found)
}
