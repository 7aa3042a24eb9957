//! Dense column-major linear algebra used by every other module.
//!
//! Only what the sketching pipeline needs lives here: Householder QR,
//! triangular solves, least squares, rank-one inverse updates, the fast
//! Walsh-Hadamard transform and a power-iteration spectral norm. Symmetric
//! eigenvalues and singular values of small matrices are delegated to
//! `nalgebra`.

use std::ops::{Deref, DerefMut};

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Relative tolerance on `|R_jj| / ||A||_F` below which a QR is declared rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// Real matrix stored column by column.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Wraps column-major data, rejecting wrong lengths and non-finite entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{} values for a {rows}x{cols} matrix", data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let n = rows.len();
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        Self::from_fn(n, d, |i, j| {
            let row = rows[i].as_ref();
            assert_eq!(row.len(), d, "ragged rows");
            row[j]
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    /// Copies columns `start..end` into a new matrix.
    pub fn columns(&self, start: usize, end: usize) -> DenseMatrix {
        DenseMatrix { rows: self.rows, cols: end - start, data: self.data[start * self.rows..end * self.rows].to_vec() }
    }

    /// `[self | other]`
    pub fn hstack(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!("hstack of {} and {} rows", self.rows, other.rows)));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(DenseMatrix { rows: self.rows, cols: self.cols + other.cols, data })
    }

    /// Appends `v` as a trailing column.
    pub fn with_column(&self, v: &[f64]) -> Result<DenseMatrix> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!("column of length {} for {} rows", v.len(), self.rows)));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(v);
        Ok(DenseMatrix { rows: self.rows, cols: self.cols + 1, data })
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scaled(&self, s: f64) -> DenseMatrix {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// `self * other`
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in other.col(j).iter().enumerate() {
                if b != 0.0 {
                    axpy(b, self.col(k), dst);
                }
            }
        }
        out
    }

    /// `selfᵀ * other`
    pub fn tr_matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, other.rows, "tr_matmul dimension mismatch");
        DenseMatrix::from_fn(self.cols, other.cols, |i, j| dot(self.col(i), other.col(j)))
    }

    /// `selfᵀ * self`, filled symmetrically.
    pub fn gram(&self) -> DenseMatrix {
        let d = self.cols;
        let mut g = DenseMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = dot(self.col(i), self.col(j));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.col(j), &mut out);
            }
        }
        out
    }

    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len(), "tr_matvec dimension mismatch");
        (0..self.cols).map(|j| dot(self.col(j), x)).collect()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.rows, self.cols, &self.data)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

/// Real vector; derefs to `[f64]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Deref for DenseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for DenseVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Thin QR factors of an `N x d` matrix: `Q` is `N x d` with orthonormal
/// columns, `R` is `d x d` upper triangular with nonnegative diagonal.
#[derive(Clone, Debug)]
pub struct ThinQR {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
}

impl ThinQR {
    /// Least-squares solution `R⁻¹ Qᵀ b`.
    pub fn solve(&self, b: &[f64]) -> DenseVector {
        let qtb = self.q.tr_matvec(b);
        DenseVector(solve_upper(&self.r, &qtb))
    }

    /// Squared row norms of `Q`; these are the leverage scores of the input.
    pub fn row_norms_sq(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.q.rows()];
        for j in 0..self.q.cols() {
            for (o, v) in out.iter_mut().zip(self.q.col(j)) {
                *o += v * v;
            }
        }
        out
    }
}

/// Householder thin QR.
pub fn qr_thin(a: &DenseMatrix) -> Result<ThinQR> {
    let (n, d) = (a.rows(), a.cols());
    if n < d {
        return Err(Error::DimensionMismatch(format!("qr_thin needs rows >= cols, got {n}x{d}")));
    }
    let scale = a.frobenius_norm();
    let mut work = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(d);

    for j in 0..d {
        let x = &work.col(j)[j..];
        let xnorm = norm2(x);
        let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vnorm = norm2(&v);
        if vnorm > 0.0 {
            v.iter_mut().for_each(|e| *e /= vnorm);
            for c in j..d {
                let col = &mut work.col_mut(c)[j..];
                let s = 2.0 * dot(&v, col);
                axpy(-s, &v, col);
            }
        } else {
            v.iter_mut().for_each(|e| *e = 0.0);
        }
        reflectors.push(v);
    }

    let mut r = DenseMatrix::from_fn(d, d, |i, j| if i <= j { work[(i, j)] } else { 0.0 });
    for j in 0..d {
        let pivot = r[(j, j)].abs();
        if !(pivot >= RANK_TOL * scale) || scale == 0.0 {
            return Err(Error::RankDeficient { column: j, pivot });
        }
    }

    let mut q = DenseMatrix::from_fn(n, d, |i, j| if i == j { 1.0 } else { 0.0 });
    for (j, v) in reflectors.iter().enumerate().rev() {
        for c in 0..d {
            let col = &mut q.col_mut(c)[j..];
            let s = 2.0 * dot(v, col);
            if s != 0.0 {
                axpy(-s, v, col);
            }
        }
    }

    for j in 0..d {
        if r[(j, j)] < 0.0 {
            for c in j..d {
                r[(j, c)] = -r[(j, c)];
            }
            q.col_mut(j).iter_mut().for_each(|e| *e = -*e);
        }
    }
    Ok(ThinQR { q, r })
}

/// Solves `R x = b` for upper-triangular `R`.
pub fn solve_upper(r: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let d = r.cols();
    let mut x = b.to_vec();
    for i in (0..d).rev() {
        let mut s = x[i];
        for j in i + 1..d {
            s -= r[(i, j)] * x[j];
        }
        x[i] = s / r[(i, i)];
    }
    x
}

/// Solves `Rᵀ x = b` for upper-triangular `R`.
pub fn solve_upper_transpose(r: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let d = r.cols();
    let mut x = b.to_vec();
    for i in 0..d {
        let mut s = x[i];
        for j in 0..i {
            s -= r[(j, i)] * x[j];
        }
        x[i] = s / r[(i, i)];
    }
    x
}

/// `A R⁻¹` by forward substitution over columns.
pub fn right_solve_upper(a: &DenseMatrix, r: &DenseMatrix) -> DenseMatrix {
    let d = r.cols();
    assert_eq!(a.cols(), d);
    let mut x = a.clone();
    for j in 0..d {
        for k in 0..j {
            let rkj = r[(k, j)];
            if rkj != 0.0 {
                let (left, right) = x.data.split_at_mut(j * x.rows);
                axpy(-rkj, &left[k * x.rows..(k + 1) * x.rows], &mut right[..x.rows]);
            }
        }
        let rjj = r[(j, j)];
        x.col_mut(j).iter_mut().for_each(|e| *e /= rjj);
    }
    x
}

/// Minimizer of `‖a w − b‖²` via Householder QR.
pub fn solve_least_squares(a: &DenseMatrix, b: &[f64]) -> Result<DenseVector> {
    if a.rows() != b.len() {
        return Err(Error::DimensionMismatch(format!("{} rows vs rhs of length {}", a.rows(), b.len())));
    }
    Ok(qr_thin(a)?.solve(b))
}

/// `(A + u vᵀ)⁻¹` from `A⁻¹`.
pub fn sherman_morrison_inverse_update(ainv: &DenseMatrix, u: &[f64], v: &[f64]) -> Result<DenseMatrix> {
    let d = ainv.rows();
    if ainv.cols() != d || u.len() != d || v.len() != d {
        return Err(Error::DimensionMismatch("sherman-morrison operands".into()));
    }
    let ainv_u = ainv.matvec(u);
    let vt_ainv = ainv.tr_matvec(v);
    let denom = 1.0 + dot(v, &ainv_u);
    if denom.abs() < 1e-12 {
        return Err(Error::SingularUpdate { denominator: denom });
    }
    Ok(DenseMatrix::from_fn(d, d, |i, j| ainv[(i, j)] - ainv_u[i] * vt_ainv[j] / denom))
}

/// Unnormalized Walsh-Hadamard transform in place. Applying it twice
/// multiplies the input by its length.
pub fn fwht_inplace(x: &mut [f64]) -> Result<()> {
    let n = x.len();
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut h = 1;
    while h < n {
        for block in x.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        h *= 2;
    }
    Ok(())
}

const POWER_MAX_ITER: usize = 1000;
const POWER_REL_TOL: f64 = 1e-8;

/// Largest singular value by power iteration on `AᵀA`.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    let d = a.cols();
    if d == 0 || a.rows() == 0 {
        return 0.0;
    }
    let mut rng = stream_rng(0x005E_ED0F_5EC7, 0);
    let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut nv = norm2(&v);
    v.iter_mut().for_each(|e| *e /= nv);
    let mut sigma_sq = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let w = a.tr_matvec(&a.matvec(&v));
        nv = norm2(&w);
        if nv == 0.0 {
            return 0.0;
        }
        let converged = (nv - sigma_sq).abs() <= POWER_REL_TOL * nv;
        sigma_sq = nv;
        v = w.into_iter().map(|e| e / nv).collect();
        if converged {
            break;
        }
    }
    sigma_sq.sqrt()
}

/// `‖A‖_F² / ‖A‖²`.
pub fn stable_rank(a: &DenseMatrix) -> Result<f64> {
    let fro = a.frobenius_norm_sq();
    if fro == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let s = spectral_norm(a);
    Ok(fro / (s * s))
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Singular values, descending.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = m.to_nalgebra().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Orthonormal basis for the column span of `m` (Gram-Schmidt, two passes),
/// dropping columns whose residual falls below `rel_tol` times the largest
/// column norm.
pub fn orthonormal_basis(m: &DenseMatrix, rel_tol: f64) -> DenseMatrix {
    let max_norm = (0..m.cols()).map(|j| norm2(m.col(j))).fold(0.0, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    if max_norm == 0.0 {
        return DenseMatrix::zeros(m.rows(), 0);
    }
    for j in 0..m.cols() {
        let mut v = m.col(j).to_vec();
        for _ in 0..2 {
            for q in &basis {
                let s = dot(q, &v);
                axpy(-s, q, &mut v);
            }
        }
        let nv = norm2(&v);
        if nv > rel_tol * max_norm && basis.len() < m.rows() {
            v.iter_mut().for_each(|e| *e /= nv);
            basis.push(v);
        }
    }
    let cols = basis.len();
    DenseMatrix { rows: m.rows(), cols, data: basis.concat() }
}
