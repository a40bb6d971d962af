//! Hermitian matrix values and the trace/norm primitives used by every
//! estimator in the crate.
//!
//! All covariance-like objects are stored densely as complex matrices.
//! Real-valued data is represented with zero imaginary parts.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{dim_mismatch, Error, Result};

pub type ComplexScalar = Complex64;
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Absolute per-entry tolerance for the Hermitian symmetry check.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Default relative tolerance of [`is_psd`].
pub const DEFAULT_PSD_TOL: f64 = 1e-10;

/// Dense `N x N` complex Hermitian matrix.
///
/// Construction symmetrizes the input as `(A + A^H) / 2`, so round-off that
/// accumulates in sums of outer products never breaks the invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    data: CMatrix,
}

impl HermitianMatrix {
    /// Builds a Hermitian matrix from a square complex matrix, averaging it
    /// with its conjugate transpose.
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Empty("matrix"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::symmetrized(m))
    }

    /// Builds from a real square matrix (symmetrized the same way).
    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::from_matrix(m.map(|x| Complex64::new(x, 0.0)))
    }

    /// Row-major real entries, convenient for small literals.
    pub fn from_real_rows(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(dim_mismatch(n * n, entries.len()));
        }
        Self::from_real(&DMatrix::from_row_slice(n, n, entries))
    }

    /// Row-major complex entries.
    pub fn from_rows(n: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(dim_mismatch(n * n, entries.len()));
        }
        Self::from_matrix(DMatrix::from_row_slice(n, n, entries))
    }

    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let n = m.nrows();
        let mut data = m;
        for i in 0..n {
            let d = data[(i, i)];
            data[(i, i)] = Complex64::new(d.re, 0.0);
            for j in (i + 1)..n {
                let avg = (data[(i, j)] + data[(j, i)].conj()) * 0.5;
                data[(i, j)] = avg;
                data[(j, i)] = avg.conj();
            }
        }
        Self { data }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            data: CMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            data: CMatrix::zeros(n, n),
        }
    }

    pub fn scaled_identity(n: usize, scale: f64) -> Self {
        Self {
            data: CMatrix::from_diagonal_element(n, n, Complex64::new(scale, 0.0)),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Self {
            data: CMatrix::from_diagonal(&d),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    /// Real trace (the imaginary part of a Hermitian trace is zero).
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.data[(i, i)].re).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            data: self.data.map(|z| z * factor),
        }
    }

    /// `Re{y^H A y}`.
    pub fn quadratic_form(&self, y: &CVector) -> Result<f64> {
        if y.len() != self.dim() {
            return Err(dim_mismatch(self.dim(), y.len()));
        }
        Ok(y.dotc(&(&self.data * y)).re)
    }

    /// Sum of real multiples of Hermitian matrices of a common dimension.
    pub fn linear_combination(terms: &[(f64, &HermitianMatrix)]) -> Result<Self> {
        let first = terms.first().ok_or(Error::Empty("linear combination"))?;
        let n = first.1.dim();
        let mut acc = CMatrix::zeros(n, n);
        for (w, m) in terms {
            if m.dim() != n {
                return Err(dim_mismatch(n, m.dim()));
            }
            acc.zip_apply(&m.data, |a, b| *a += b * *w);
        }
        Ok(Self { data: acc })
    }

    pub fn add(&self, other: &HermitianMatrix) -> Result<Self> {
        Self::linear_combination(&[(1.0, self), (1.0, other)])
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Result<Self> {
        Self::linear_combination(&[(1.0, self), (-1.0, other)])
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(self).0
    }

    /// Largest absolute deviation from Hermitian symmetry of a raw matrix.
    pub fn asymmetry(m: &CMatrix) -> f64 {
        let n = m.nrows().min(m.ncols());
        let mut worst: f64 = 0.0;
        for i in 0..n {
            worst = worst.max(m[(i, i)].im.abs());
            for j in (i + 1)..n {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// `N x T` block of complex samples, one column per observation.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    data: CMatrix,
}

impl SampleSet {
    pub fn new(data: CMatrix) -> Result<Self> {
        if data.nrows() == 0 {
            return Err(Error::Empty("sample dimension"));
        }
        if data.ncols() == 0 {
            return Err(Error::Empty("sample set"));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { data })
    }

    pub fn from_columns(columns: &[CVector]) -> Result<Self> {
        let first = columns.first().ok_or(Error::Empty("sample set"))?;
        if let Some(bad) = columns.iter().find(|c| c.len() != first.len()) {
            return Err(dim_mismatch(first.len(), bad.len()));
        }
        Self::new(CMatrix::from_columns(columns))
    }

    pub fn from_real(data: &DMatrix<f64>) -> Result<Self> {
        Self::new(data.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn count(&self) -> usize {
        self.data.ncols()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn column(&self, t: usize) -> CVector {
        self.data.column(t).into_owned()
    }

    /// The sample set with column `t` removed.
    pub fn without(&self, t: usize) -> Result<Self> {
        if t >= self.count() {
            return Err(Error::IndexOutOfRange {
                index: t,
                len: self.count(),
            });
        }
        Self::new(self.data.clone().remove_column(t))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            data: self.data.map(|z| z * factor),
        }
    }

    /// Squared norms `||y_t||^2` of every column.
    pub fn squared_norms(&self) -> Vec<f64> {
        self.data
            .column_iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// `sum_t ||y_t||^4`, accumulated with compensated summation.
    pub fn fourth_moment_sum(&self) -> f64 {
        compensated_sum(self.squared_norms().into_iter().map(|s| s * s))
    }
}

/// `Re{tr(A B)}` in `O(N^2)` using `tr(AB) = sum_ij A_ij conj(B_ij)` for
/// Hermitian `B`.
pub fn real_trace_product(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(dim_mismatch(a.dim(), b.dim()));
    }
    Ok(a.data
        .iter()
        .zip(b.data.iter())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum())
}

pub fn frobenius_norm_sq(a: &HermitianMatrix) -> f64 {
    a.data.iter().map(|z| z.norm_sqr()).sum()
}

/// Rank-one matrix `y y^H`.
pub fn outer_product(y: &CVector) -> HermitianMatrix {
    let m = y * y.adjoint();
    HermitianMatrix::symmetrized(m)
}

/// True iff the smallest eigenvalue is at least `-tol * max(1, |lambda|_max)`.
pub fn is_psd(a: &HermitianMatrix, tol: f64) -> bool {
    let ev = a.eigenvalues();
    let min = ev.first().copied().unwrap_or(0.0);
    let max_abs = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    min >= -tol * max_abs.max(1.0)
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending and the
/// matching eigenvectors as columns.
pub fn eigh(a: &HermitianMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(a.data.clone());
    let mut order: Vec<usize> = (0..a.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

/// Rebuilds `V diag(f(lambda)) V^H` from a Hermitian eigendecomposition.
pub fn spectral_map(a: &HermitianMatrix, f: impl Fn(f64) -> f64) -> HermitianMatrix {
    let (values, vectors) = eigh(a);
    let n = a.dim();
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let w = f(lambda);
        for i in 0..n {
            scaled[(i, j)] *= w;
        }
    }
    HermitianMatrix::symmetrized(scaled * vectors.adjoint())
}

/// Moore-Penrose pseudo-inverse; eigenvalues with magnitude below
/// `rel_tol * max|lambda|` are treated as zero.
pub fn pseudo_inverse(a: &HermitianMatrix, rel_tol: f64) -> HermitianMatrix {
    let max_abs = a.eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = rel_tol * max_abs;
    spectral_map(a, |l| {
        if l.abs() > cutoff && l != 0.0 {
            1.0 / l
        } else {
            0.0
        }
    })
}

/// Spectral condition number of a Hermitian positive definite matrix;
/// infinite when the smallest eigenvalue is not positive.
pub fn condition_number(a: &HermitianMatrix) -> f64 {
    let ev = a.eigenvalues();
    let (min, max) = (ev[0], ev[ev.len() - 1]);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `A X = B` for Hermitian positive definite `A` via Cholesky.
pub fn solve_hpd(a: &HermitianMatrix, b: &CMatrix) -> Result<CMatrix> {
    if b.nrows() != a.dim() {
        return Err(dim_mismatch(a.dim(), b.nrows()));
    }
    let chol = a
        .data
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("Cholesky factorization failed".into()))?;
    Ok(chol.solve(b))
}

/// Neumaier compensated summation.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
