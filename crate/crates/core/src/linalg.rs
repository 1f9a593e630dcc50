//! Dense real matrices and the handful of kernels the solvers are built on.
//!
//! Storage is row-major, `data[i * cols + j] = A[i, j]`. Every reduction
//! runs in a fixed loop order so results are bit-reproducible from run to
//! run; nothing here is parallel.

use std::fmt;

use thiserror::Error;

/// Errors raised by the matrix kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("{op}: shape mismatch ({}x{} vs {}x{})", .left.0, .left.1, .right.0, .right.1)]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{op}: expected a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("data length {got} does not match {rows}x{cols}")]
    DataLength {
        rows: usize,
        cols: usize,
        got: usize,
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("Cholesky breakdown at pivot {pivot} (value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("matrix is singular (pivot {pivot})")]
    Singular { pivot: usize },
    #[error(
        "power iteration did not converge in {iterations} iterations (last estimate {estimate})"
    )]
    NoConvergence { iterations: usize, estimate: f64 },
    #[error("{0}")]
    Domain(&'static str),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// A dense, row-major `f64` matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::DataLength {
                rows,
                cols,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices.
    ///
    /// Panics on ragged input; meant for literals in tests and examples.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n * m);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), m, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: n,
            cols: m,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
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
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip_with(
        &self,
        other: &Self,
        op: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        self.check_same(other, op)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    fn check_same(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(LinalgError::Shape {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "hadamard", |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &Self) -> Result<()> {
        self.check_same(other, "add_scaled")?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    /// `self + shift * I` for a square matrix.
    pub fn shift_diag(&self, shift: f64) -> Result<Self> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                op: "shift_diag",
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut m = self.clone();
        for i in 0..self.rows {
            m.data[i * self.cols + i] += shift;
        }
        Ok(m)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius inner product `<self, other>`.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_same(other, "dot")?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn abs_sum(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            0.0
        } else {
            self.sum() / self.data.len() as f64
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same(other, "max_abs_diff")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Largest `|A - Aᵀ|` entry; `None` for non-square matrices.
    pub fn max_asymmetry(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let mut m = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        Some(m)
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetrize(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                op: "symmetrize",
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut m = self.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        Ok(m)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        matmul(self, other)
    }
}

/// Standard matrix product with a fixed i-k-j loop nest.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.rows {
        return Err(LinalgError::Shape {
            op: "matmul",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let (n, m, p) = (a.rows, a.cols, b.cols);
    let mut out = DenseMatrix::zeros(n, p);
    for i in 0..n {
        let out_row = &mut out.data[i * p..(i + 1) * p];
        for k in 0..m {
            let aik = a.data[i * m + k];
            if aik == 0.0 {
                continue;
            }
            let b_row = &b.data[k * p..(k + 1) * p];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

/// `aᵀ b` without materializing the transpose.
pub fn t_matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows != b.rows {
        return Err(LinalgError::Shape {
            op: "t_matmul",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let (n, m, p) = (a.rows, a.cols, b.cols);
    let mut out = DenseMatrix::zeros(m, p);
    for k in 0..n {
        let a_row = &a.data[k * m..(k + 1) * m];
        let b_row = &b.data[k * p..(k + 1) * p];
        for (i, &aki) in a_row.iter().enumerate() {
            if aki == 0.0 {
                continue;
            }
            let out_row = &mut out.data[i * p..(i + 1) * p];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aki * bkj;
            }
        }
    }
    Ok(out)
}

/// `UᵀU`, computed on the upper triangle and mirrored so it is exactly
/// symmetric.
pub fn gram(u: &DenseMatrix) -> DenseMatrix {
    let (n, r) = u.shape();
    let mut g = DenseMatrix::zeros(r, r);
    for i in 0..r {
        for j in i..r {
            let mut s = 0.0;
            for k in 0..n {
                s += u.data[k * r + i] * u.data[k * r + j];
            }
            g.data[i * r + j] = s;
            g.data[j * r + i] = s;
        }
    }
    g
}

pub fn fro_norm(a: &DenseMatrix) -> f64 {
    fro_norm_sq(a).sqrt()
}

pub fn fro_norm_sq(a: &DenseMatrix) -> f64 {
    a.data.iter().map(|v| v * v).sum()
}

/// Activation pattern of a ReLU: `true` where the input was strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluMask {
    rows: usize,
    cols: usize,
    active: Vec<bool>,
}

impl ReluMask {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_active(&self, i: usize, j: usize) -> bool {
        self.active[i * self.cols + j]
    }

    /// Zeroes the entries of `g` where the unit was inactive.
    pub fn gate(&self, g: &DenseMatrix) -> Result<DenseMatrix> {
        if g.shape() != self.shape() {
            return Err(LinalgError::Shape {
                op: "relu_gate",
                left: self.shape(),
                right: g.shape(),
            });
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: g
                .data
                .iter()
                .zip(&self.active)
                .map(|(&v, &on)| if on { v } else { 0.0 })
                .collect(),
        })
    }
}

/// Elementwise `max(x, 0)` plus the mask needed for the backward pass.
/// The subgradient at exactly zero is taken as zero.
pub fn relu(a: &DenseMatrix) -> (DenseMatrix, ReluMask) {
    let active: Vec<bool> = a.data.iter().map(|&v| v > 0.0).collect();
    let out = a.map(|v| if v > 0.0 { v } else { 0.0 });
    (
        out,
        ReluMask {
            rows: a.rows,
            cols: a.cols,
            active,
        },
    )
}

/// Lower-triangular Cholesky factor `L` with `S = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    dim: usize,
    /// Unit lower-triangular factor.
    lower: DenseMatrix,
    diag: Vec<f64>,
}

impl SpdFactor {
    /// Square-root-free Cholesky `S = L D Lᵀ`; fails unless every pivot of
    /// `D` is positive.
    pub fn new(s: &DenseMatrix) -> Result<Self> {
        if !s.is_square() {
            return Err(LinalgError::NotSquare {
                op: "cholesky",
                rows: s.rows,
                cols: s.cols,
            });
        }
        let n = s.rows;
        let mut l = DenseMatrix::identity(n);
        let mut diag = vec![0.0; n];
        for j in 0..n {
            let mut d = s.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k) * diag[k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { pivot: j, value: d });
            }
            diag[j] = d;
            for i in (j + 1)..n {
                let mut v = s.get(i, j);
                for k in 0..j {
                    v -= l.get(i, k) * l.get(j, k) * diag[k];
                }
                l.set(i, j, v / d);
            }
        }
        Ok(Self {
            dim: n,
            lower: l,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Solves `S X = B`.
    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.dim;
        if b.rows != n {
            return Err(LinalgError::Shape {
                op: "cholesky_solve",
                left: (n, n),
                right: b.shape(),
            });
        }
        let l = &self.lower;
        let mut x = b.clone();
        for c in 0..b.cols {
            for i in 0..n {
                let mut v = x.get(i, c);
                for k in 0..i {
                    v -= l.get(i, k) * x.get(k, c);
                }
                x.set(i, c, v);
            }
            for i in 0..n {
                x.set(i, c, x.get(i, c) / self.diag[i]);
            }
            for i in (0..n).rev() {
                let mut v = x.get(i, c);
                for k in (i + 1)..n {
                    v -= l.get(k, i) * x.get(k, c);
                }
                x.set(i, c, v);
            }
        }
        Ok(x)
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let ld = DenseMatrix::from_fn(self.dim, self.dim, |i, j| {
            self.lower.get(i, j) * self.diag[j]
        });
        matmul(&ld, &self.lower.transpose()).expect("square factor")
    }
}

/// `(S + λI)⁻¹` for a Gram-type matrix `S`, via `LDLᵀ` and triangular
/// solves against the identity. The result is symmetrized.
pub fn spd_inverse(s: &DenseMatrix, lambda: f64) -> Result<DenseMatrix> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(LinalgError::Domain("spd_inverse requires lambda > 0"));
    }
    let shifted = s.shift_diag(lambda)?;
    let factor = SpdFactor::new(&shifted)?;
    let inv = factor.solve(&DenseMatrix::identity(s.rows))?;
    inv.symmetrize()
}

/// General inverse by Gauss-Jordan elimination with partial pivoting.
pub fn inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            op: "inverse",
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut inv = DenseMatrix::identity(n);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m.get(i, col).abs().total_cmp(&m.get(j, col).abs()))
            .unwrap();
        if m.get(pivot, col).abs() <= scale * 1e-14 {
            return Err(LinalgError::Singular { pivot: col });
        }
        if pivot != col {
            for j in 0..n {
                m.data.swap(pivot * n + j, col * n + j);
                inv.data.swap(pivot * n + j, col * n + j);
            }
        }
        let p = m.get(col, col);
        for j in 0..n {
            m.data[col * n + j] /= p;
            inv.data[col * n + j] /= p;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m.get(i, col);
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                m.data[i * n + j] -= f * m.data[col * n + j];
                inv.data[i * n + j] -= f * inv.data[col * n + j];
            }
        }
    }
    Ok(inv)
}

/// Largest singular value by power iteration on `AᵀA`, started from the
/// normalized all-ones vector. Converged when two successive estimates
/// differ by less than `tol` relatively. A zero matrix has norm 0.
pub fn spectral_norm(a: &DenseMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(LinalgError::Domain("spectral_norm requires tol > 0"));
    }
    let (n, m) = a.shape();
    if n == 0 || m == 0 || a.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let mut v = vec![1.0 / (m as f64).sqrt(); m];
    let mut av = vec![0.0; n];
    let mut estimate = 0.0f64;
    for _ in 0..max_iter {
        // av = A v
        for i in 0..n {
            av[i] = a.row(i).iter().zip(&v).map(|(x, y)| x * y).sum();
        }
        let sigma = av.iter().map(|x| x * x).sum::<f64>().sqrt();
        // v = Aᵀ av / ||Aᵀ av||
        v.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..n {
            let s = av[i];
            for (vj, &aij) in v.iter_mut().zip(a.row(i)) {
                *vj += aij * s;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(sigma);
        }
        v.iter_mut().for_each(|x| *x /= norm);
        if estimate > 0.0 && (sigma - estimate).abs() <= tol * sigma {
            return Ok(sigma);
        }
        estimate = sigma;
    }
    Err(LinalgError::NoConvergence {
        iterations: max_iter,
        estimate,
    })
}

/// Spectral norm with the tolerances used throughout the crate.
pub fn spectral_norm_default(a: &DenseMatrix) -> Result<f64> {
    spectral_norm(a, 1e-12, 20_000)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted in
/// descending order. Only the upper triangle is trusted.
pub fn symmetric_eigenvalues(s: &DenseMatrix) -> Result<Vec<f64>> {
    if !s.is_square() {
        return Err(LinalgError::NotSquare {
            op: "symmetric_eigenvalues",
            rows: s.rows,
            cols: s.cols,
        });
    }
    let n = s.rows;
    let mut a = s.symmetrize()?;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a.get(i, j) * a.get(i, j);
            }
        }
        let diag: f64 = (0..n).map(|i| a.get(i, i) * a.get(i, i)).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - sn * akq);
                    a.set(k, q, sn * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - sn * aqk);
                    a.set(q, k, sn * apk + c * aqk);
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

/// Singular values in descending order, from the eigenvalues of the
/// smaller of `AᵀA` and `AAᵀ`.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    let g = if a.cols <= a.rows {
        gram(a)
    } else {
        gram(&a.transpose())
    };
    Ok(symmetric_eigenvalues(&g)?
        .into_iter()
        .map(|e| e.max(0.0).sqrt())
        .collect())
}

/// Exact (eigen-decomposition based) spectral norm; an independent route to
/// [`spectral_norm`].
pub fn spectral_norm_exact(a: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}
