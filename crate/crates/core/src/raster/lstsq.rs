//! Linear least squares with a streaming triangular accumulator.
//!
//! Rows are folded one at a time into the upper-triangular factor of the
//! augmented system `[A | y]` with Givens rotations, so memory stays
//! `O(k^2)` however many pixels are regressed. The final triangular system is
//! solved with a column-pivoted Householder QR; when it is rank deficient the
//! minimum-norm solution is taken through a second QR of the transposed
//! trapezoid (a complete orthogonal decomposition).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Relative threshold on the pivoted diagonal below which columns count as dependent.
const RANK_TOLERANCE: f64 = 1e-10;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::PayloadSizeMismatch { expected: rows * cols, actual: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Matrix whose columns are the given equal-length slices.
    pub fn from_columns(columns: &[&[f64]]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidArgument("columns of unequal length".into()));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            data.extend(columns.iter().map(|c| c[i]));
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }
}

/// Result of a least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresFit {
    /// One coefficient per design column.
    pub coefficients: Vec<f64>,
    /// Fitted constant term, when the intercept was requested.
    pub intercept: Option<f64>,
    /// Coefficient of determination; `None` when the target is constant.
    pub r_squared: Option<f64>,
    pub rank: usize,
    pub residual_sum_squares: f64,
    pub total_sum_squares: f64,
}

/// Streaming regression of a target on `k` regressors (plus optional intercept).
#[derive(Debug, Clone)]
pub struct Regression {
    regressors: usize,
    intercept: bool,
    /// Upper-triangular `(p + 1) x (p + 1)` factor of `[A | y]`, row-major.
    tri: Vec<f64>,
    scratch: Vec<f64>,
    rows: usize,
    // Welford accumulators for the total sum of squares.
    y_mean: f64,
    y_m2: f64,
}

impl Regression {
    pub fn new(regressors: usize, intercept: bool) -> Self {
        let p = regressors + intercept as usize;
        Self {
            regressors,
            intercept,
            tri: vec![0.0; (p + 1) * (p + 1)],
            scratch: vec![0.0; p + 1],
            rows: 0,
            y_mean: 0.0,
            y_m2: 0.0,
        }
    }

    /// Number of unknowns, including the intercept.
    #[inline]
    fn unknowns(&self) -> usize {
        self.regressors + self.intercept as usize
    }

    pub fn observations(&self) -> usize {
        self.rows
    }

    /// Adds one observation.
    pub fn push(&mut self, regressors: &[f64], target: f64) {
        assert_eq!(regressors.len(), self.regressors, "regressor count");
        let p = self.unknowns();
        let n = p + 1;
        self.scratch[..self.regressors].copy_from_slice(regressors);
        if self.intercept {
            self.scratch[self.regressors] = 1.0;
        }
        self.scratch[p] = target;

        for i in 0..n {
            let vi = self.scratch[i];
            if vi == 0.0 {
                continue;
            }
            let rii = self.tri[i * n + i];
            let h = math::hypot(rii, vi);
            let (c, s) = (rii / h, vi / h);
            self.tri[i * n + i] = h;
            for j in i + 1..n {
                let rij = self.tri[i * n + j];
                let vj = self.scratch[j];
                self.tri[i * n + j] = c * rij + s * vj;
                self.scratch[j] = c * vj - s * rij;
            }
        }

        self.rows += 1;
        let delta = target - self.y_mean;
        self.y_mean += delta / self.rows as f64;
        self.y_m2 += delta * (target - self.y_mean);
    }

    pub fn finish(&self) -> Result<LeastSquaresFit> {
        let p = self.unknowns();
        let n = p + 1;
        if self.rows < p + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} observations for {p} unknowns",
                self.rows
            )));
        }
        let base = self.tri[p * n + p];
        let mut a = Matrix::zeros(p, p);
        let mut rhs = vec![0.0; p];
        for i in 0..p {
            for j in i..p {
                a.set(i, j, self.tri[i * n + j]);
            }
            rhs[i] = self.tri[i * n + p];
        }
        let (solution, rank, extra) = solve_min_norm(a, rhs);
        let residual_sum_squares = base * base + extra;
        let total_sum_squares = self.y_m2;
        let r_squared =
            (total_sum_squares > 0.0).then(|| 1.0 - residual_sum_squares / total_sum_squares);
        let mut coefficients = solution;
        let intercept = if self.intercept { coefficients.pop() } else { None };
        Ok(LeastSquaresFit {
            coefficients,
            intercept,
            r_squared,
            rank,
            residual_sum_squares,
            total_sum_squares,
        })
    }
}

/// Ordinary least squares of `target` on the columns of `design`.
///
/// With `intercept` a constant column is appended internally and reported
/// separately in [`LeastSquaresFit::intercept`].
pub fn least_squares(design: &Matrix, target: &[f64], intercept: bool) -> Result<LeastSquaresFit> {
    if design.rows() != target.len() {
        return Err(Error::GeometryMismatch(format!(
            "{} design rows for {} targets",
            design.rows(),
            target.len()
        )));
    }
    let mut reg = Regression::new(design.cols(), intercept);
    for (i, &y) in target.iter().enumerate() {
        reg.push(design.row(i), y);
    }
    reg.finish()
}

/// Householder reflector for `x`, returned as `(v, beta, alpha)` such that
/// `(I - beta v v^T) x = alpha e1`. `beta == 0` means identity.
fn householder(x: &[f64]) -> (Vec<f64>, f64, f64) {
    let norm = math::sqrt(x.iter().map(|v| v * v).sum());
    let mut v = x.to_vec();
    if norm == 0.0 {
        return (v, 0.0, 0.0);
    }
    let alpha = if x[0] >= 0.0 { -norm } else { norm };
    v[0] -= alpha;
    let vtv: f64 = v.iter().map(|e| e * e).sum();
    let beta = if vtv == 0.0 { 0.0 } else { 2.0 / vtv };
    (v, beta, alpha)
}

fn reflect_vec(v: &[f64], beta: f64, x: &mut [f64]) {
    let s: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let f = beta * s;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= f * vi;
    }
}

/// Solves `min ||A x - b||` for square `A` returning the minimum-norm
/// solution, the numerical rank, and the residual sum of squares.
fn solve_min_norm(mut a: Matrix, mut b: Vec<f64>) -> (Vec<f64>, usize, f64) {
    let n = a.cols();
    let m = a.rows();
    let mut perm: Vec<usize> = (0..n).collect();
    let steps = m.min(n);
    let mut col = vec![0.0; m];

    for j in 0..steps {
        // Pivot on the largest remaining column norm.
        let mut best = j;
        let mut best_norm = -1.0;
        for q in j..n {
            let s: f64 = (j..m).map(|i| a.get(i, q) * a.get(i, q)).sum();
            if s > best_norm {
                best_norm = s;
                best = q;
            }
        }
        a.swap_cols(j, best);
        perm.swap(j, best);

        let x: Vec<f64> = (j..m).map(|i| a.get(i, j)).collect();
        let (v, beta, alpha) = householder(&x);
        if beta == 0.0 {
            continue;
        }
        for q in j + 1..n {
            for (k, i) in (j..m).enumerate() {
                col[k] = a.get(i, q);
            }
            reflect_vec(&v, beta, &mut col[..m - j]);
            for (k, i) in (j..m).enumerate() {
                a.set(i, q, col[k]);
            }
        }
        reflect_vec(&v, beta, &mut b[j..]);
        a.set(j, j, alpha);
        for i in j + 1..m {
            a.set(i, j, 0.0);
        }
    }

    let lead = if steps > 0 { a.get(0, 0).abs() } else { 0.0 };
    let mut rank = 0;
    while rank < steps && lead > 0.0 && a.get(rank, rank).abs() > RANK_TOLERANCE * lead {
        rank += 1;
    }
    let extra: f64 = b[rank..].iter().map(|v| v * v).sum();

    let mut y = vec![0.0; n];
    if rank == n {
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a.get(i, j) * y[j]).sum();
            y[i] = (b[i] - s) / a.get(i, i);
        }
    } else if rank > 0 {
        // Minimum-norm solution of the r x n trapezoid T y = b[..r] via
        // T^T = Q L, so T = L^T Q^T and y = Q [L^-T b; 0].
        let mut trap = Matrix::zeros(rank, n);
        for i in 0..rank {
            for j in i..n {
                trap.set(i, j, a.get(i, j));
            }
        }
        let mut tt = trap.transpose();
        let mut reflectors = Vec::with_capacity(rank);
        for j in 0..rank {
            let x: Vec<f64> = (j..n).map(|i| tt.get(i, j)).collect();
            let (v, beta, alpha) = householder(&x);
            if beta != 0.0 {
                for q in j + 1..rank {
                    for (k, i) in (j..n).enumerate() {
                        col[k] = tt.get(i, q);
                    }
                    reflect_vec(&v, beta, &mut col[..n - j]);
                    for (k, i) in (j..n).enumerate() {
                        tt.set(i, q, col[k]);
                    }
                }
                tt.set(j, j, alpha);
            }
            reflectors.push((v, beta));
        }
        // Forward substitution with L^T (lower triangular).
        let mut w = vec![0.0; rank];
        for i in 0..rank {
            let s: f64 = (0..i).map(|j| tt.get(j, i) * w[j]).sum();
            w[i] = (b[i] - s) / tt.get(i, i);
        }
        y[..rank].copy_from_slice(&w);
        for (j, (v, beta)) in reflectors.iter().enumerate().rev() {
            if *beta != 0.0 {
                reflect_vec(v, *beta, &mut y[j..]);
            }
        }
    }

    let mut x = vec![0.0; n];
    for (j, &p) in perm.iter().enumerate() {
        x[p] = y[j];
    }
    (x, rank, extra)
}
