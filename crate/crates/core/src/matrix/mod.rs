//! Dense complex matrices and the norms, products and interpretation maps
//! built on top of them.
//!
//! A matrix `X` is read in four ways: as a linear map `F_X` from `C^n` (with
//! the sup norm) into `C^m`, as a bilinear form `B_X`, as a Schur multiplier
//! `S_X` and as the mixed bilinear map `T_X`. The `apply_*` functions evaluate
//! those maps pointwise.

mod json;
pub(crate) mod svd;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use svd::Svd;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Dense complex vector.
#[derive(Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// All-ones `rows x cols` matrix.
    pub fn ones(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ONE; rows * cols],
        }
    }

    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_row_major(
            rows,
            cols,
            data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Single matrix unit `E_(i,j)`.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m[(i, j)] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        ComplexVector::from_vec((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn set_column(&mut self, j: usize, v: &[Complex64]) {
        for (i, z) in v.iter().enumerate() {
            self[(i, j)] = *z;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    /// Matrix product; panics on incompatible shapes (internal use). See
    /// [`ComplexMatrix::try_matmul`] for the checked version.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn try_matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(self.matmul(rhs))
    }

    /// `self^* rhs` without materialising the adjoint.
    pub fn adjoint_matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "adjoint_matmul shape mismatch");
        let mut out = Self::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = self.data[k * self.cols + i].conj();
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self^* v`.
    pub fn adjoint_matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.rows, v.len(), "adjoint_matvec shape mismatch");
        let mut out = vec![ZERO; self.cols];
        for (i, vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * vi;
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == ZERO)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation from Hermitian symmetry, `max |M - M^*|`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Replaces the matrix with `(M + M^*)/2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.rows;
        Self::from_fn(n, n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Copies out the block starting at `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    /// Columns `cols` of `self`, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self[(i, cols[j])])
    }

    /// Hermitian block matrix `[[p, x], [x^*, q]]`.
    pub fn block_hermitian(p: &Self, x: &Self, q: &Self) -> Self {
        let (m, n) = x.shape();
        let mut z = Self::zeros(m + n, m + n);
        z.set_block(0, 0, p);
        z.set_block(0, m, x);
        z.set_block(m, 0, &x.adjoint());
        z.set_block(m, m, q);
        z
    }

    pub fn singular_values(&self) -> Vec<f64> {
        Svd::new(self).sigma
    }

    pub fn svd(&self) -> Svd {
        Svd::new(self)
    }

    /// Numerical rank at the default threshold, see [`RankRule`].
    pub fn rank(&self) -> usize {
        RankRule::default().rank(self)
    }

    pub fn relative_distance(&self, other: &Self) -> f64 {
        let scale = hs_norm(self).max(hs_norm(other)).max(f64::MIN_POSITIVE);
        hs_norm(&(self - other)) / scale
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:>10.5}{:+.5}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexVector {
    pub fn from_vec(data: Vec<Complex64>) -> Self {
        Self { data }
    }

    /// Checked constructor used for external input.
    pub fn new(data: Vec<Complex64>) -> Result<Self> {
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { data })
    }

    pub fn from_real(data: &[f64]) -> Self {
        Self::from_vec(data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_vec(vec![ZERO; dim])
    }

    /// The all-ones vector `Omega_n`.
    pub fn ones(dim: usize) -> Self {
        Self::from_vec(vec![ONE; dim])
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[k] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm1(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_vec(self.data.iter().map(|z| z * s).collect())
    }

    /// `xi_|`, the `n x 1` column matrix.
    pub fn as_column(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.dim(),
            cols: 1,
            data: self.data.clone(),
        }
    }

    /// `xi_-`, the `1 x n` row matrix.
    pub fn as_row(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: 1,
            cols: self.dim(),
            data: self.data.clone(),
        }
    }

    /// Inner product `<self, other>`, linear in `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b.conj())
            .sum()
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.data[i]
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.data.iter().map(|z| (z.re, z.im)))
            .finish()
    }
}

/// Rank decision shared by every factor extraction: a singular value counts
/// when it exceeds `max(dim_factor * max(m, n) * eps * sigma_max, floor)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankRule {
    pub floor: f64,
}

impl Default for RankRule {
    fn default() -> Self {
        Self { floor: 1e-9 }
    }
}

impl RankRule {
    pub fn with_floor(floor: f64) -> Self {
        Self { floor }
    }

    pub fn threshold(&self, sigma_max: f64, dim: usize) -> f64 {
        (dim as f64 * f64::EPSILON * sigma_max).max(self.floor)
    }

    /// Number of entries of the (descending) `sigma` above the threshold.
    pub fn count(&self, sigma: &[f64], dim: usize) -> usize {
        let smax = sigma.first().copied().unwrap_or(0.0);
        let tau = self.threshold(smax, dim);
        sigma.iter().take_while(|&&s| s > tau).count()
    }

    pub fn rank(&self, x: &ComplexMatrix) -> usize {
        let sigma = x.singular_values();
        self.count(&sigma, x.rows().max(x.cols()))
    }
}

/// Operator norm `||X||_inf` (largest singular value).
pub fn op_norm(x: &ComplexMatrix) -> f64 {
    x.singular_values().first().copied().unwrap_or(0.0)
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(x: &ComplexMatrix) -> f64 {
    x.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Column norm: largest Euclidean norm of a column.
pub fn col_norm(x: &ComplexMatrix) -> f64 {
    column_norms(x).into_iter().fold(0.0, f64::max)
}

/// Row norm: the column norm of `X^*`.
pub fn row_norm(x: &ComplexMatrix) -> f64 {
    row_norms(x).into_iter().fold(0.0, f64::max)
}

pub fn column_norms(x: &ComplexMatrix) -> Vec<f64> {
    let mut acc = vec![0.0; x.cols()];
    for i in 0..x.rows() {
        for (a, z) in acc.iter_mut().zip(x.row(i)) {
            *a += z.norm_sqr();
        }
    }
    acc.into_iter().map(f64::sqrt).collect()
}

pub fn row_norms(x: &ComplexMatrix) -> Vec<f64> {
    (0..x.rows())
        .map(|i| x.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect()
}

/// Nuclear (trace) norm, the sum of singular values.
pub fn nuclear_norm(x: &ComplexMatrix) -> f64 {
    x.singular_values().iter().sum()
}

fn check_same_shape(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<()> {
    if x.shape() != y.shape() {
        return Err(Error::ShapeMismatch {
            left: x.shape(),
            right: y.shape(),
        });
    }
    Ok(())
}

/// Trace pairing `<X, Y> = Tr(Y^* X)`; linear in `X`, conjugate-linear in `Y`.
pub fn pairing(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<Complex64> {
    check_same_shape(x, y)?;
    Ok(pairing_unchecked(x, y))
}

pub(crate) fn pairing_unchecked(x: &ComplexMatrix, y: &ComplexMatrix) -> Complex64 {
    x.as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(a, b)| a * b.conj())
        .sum()
}

/// Entrywise (Schur) product.
pub fn schur_product(x: &ComplexMatrix, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_shape(x, a)?;
    Ok(schur_unchecked(x, a))
}

pub(crate) fn schur_unchecked(x: &ComplexMatrix, a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix {
        rows: x.rows,
        cols: x.cols,
        data: x.data.iter().zip(&a.data).map(|(p, q)| p * q).collect(),
    }
}

fn check_dim(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Dimension(format!(
            "{what}: expected dimension {want}, got {got}"
        )));
    }
    Ok(())
}

/// `F_X(a) = X a`.
pub fn apply_f(x: &ComplexMatrix, a: &ComplexVector) -> Result<ComplexVector> {
    check_dim("apply_F argument", a.dim(), x.cols())?;
    Ok(ComplexVector::from_vec(x.matvec(a.as_slice())))
}

/// `G_X(a) = a_- X`, returned as a vector of length `n`.
pub fn apply_g(x: &ComplexMatrix, a: &ComplexVector) -> Result<ComplexVector> {
    check_dim("apply_G argument", a.dim(), x.rows())?;
    let mut out = vec![ZERO; x.cols()];
    for (i, ai) in a.as_slice().iter().enumerate() {
        for (o, z) in out.iter_mut().zip(x.row(i)) {
            *o += ai * z;
        }
    }
    Ok(ComplexVector::from_vec(out))
}

/// `B_X(a, b) = sum_ij X_ij a_i b_j` (no conjugation).
pub fn apply_b(x: &ComplexMatrix, a: &ComplexVector, b: &ComplexVector) -> Result<Complex64> {
    check_dim("apply_B first argument", a.dim(), x.rows())?;
    check_dim("apply_B second argument", b.dim(), x.cols())?;
    let xb = x.matvec(b.as_slice());
    Ok(a.as_slice().iter().zip(&xb).map(|(p, q)| p * q).sum())
}

/// `T_X(a, B)_j = sum_i a_i X_ij B_ij`.
pub fn apply_t(x: &ComplexMatrix, a: &ComplexVector, b: &ComplexMatrix) -> Result<ComplexVector> {
    check_dim("apply_T vector argument", a.dim(), x.rows())?;
    check_same_shape(x, b)?;
    let mut out = vec![ZERO; x.cols()];
    for i in 0..x.rows() {
        let ai = a[i];
        for j in 0..x.cols() {
            out[j] += ai * x[(i, j)] * b[(i, j)];
        }
    }
    Ok(ComplexVector::from_vec(out))
}

/// `Delta_n(xi)`, the diagonal matrix carrying `xi`.
pub fn diag_embed(xi: &ComplexVector) -> Result<ComplexMatrix> {
    if xi.dim() == 0 {
        return Err(Error::Empty("diag_embed of an empty vector"));
    }
    Ok(diag_unchecked(xi.as_slice()))
}

pub(crate) fn diag_unchecked(xi: &[Complex64]) -> ComplexMatrix {
    let mut d = ComplexMatrix::zeros(xi.len(), xi.len());
    for (i, z) in xi.iter().enumerate() {
        d[(i, i)] = *z;
    }
    d
}

/// Scales row `i` by `w[i]`.
pub(crate) fn scale_rows(x: &ComplexMatrix, w: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] * w[i])
}

/// Scales column `j` by `w[j]`.
pub(crate) fn scale_cols(x: &ComplexMatrix, w: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] * w[j])
}

/// Unit-modulus phase of `z`, with `phase(0) = 1`.
pub(crate) fn phase(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r > 0.0 {
        z / r
    } else {
        ONE
    }
}
