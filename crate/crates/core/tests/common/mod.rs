//! Brute-force reference computations shared by the integration tests.
//! Everything here works from raw entries with explicit loops so that it
//! shares no code path with the library.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use shrinkcov_core::datagen::{Field, RngStream};
use shrinkcov_core::{CMatrix, HermitianMatrix, SampleSet};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_matrix(rows: usize, cols: usize, field: Field, rng: &mut RngStream) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| match field {
        Field::Real => c(rng.normal(), 0.0),
        Field::Complex => c(rng.normal(), rng.normal()),
    })
}

pub fn random_samples(n: usize, t: usize, field: Field, rng: &mut RngStream) -> SampleSet {
    SampleSet::new(random_matrix(n, t, field, rng)).unwrap()
}

/// Random PSD matrix `G G^H / k` of rank `min(n, k)`.
pub fn random_psd(n: usize, k: usize, field: Field, rng: &mut RngStream) -> HermitianMatrix {
    let g = random_matrix(n, k, field, rng);
    HermitianMatrix::from_matrix(&g * g.adjoint() / c(k as f64, 0.0)).unwrap()
}

/// `Re tr(A B)` by explicit summation of `a_ij b_ji`.
pub fn dense_trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// `(1/k) sum_j y_j y_j^H` over the listed columns.
pub fn naive_scm(y: &CMatrix, columns: &[usize]) -> CMatrix {
    let n = y.nrows();
    let mut out = CMatrix::zeros(n, n);
    for &t in columns {
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += y[(i, t)] * y[(j, t)].conj();
            }
        }
    }
    out / c(columns.len() as f64, 0.0)
}

pub fn naive_loo_scms(y: &CMatrix) -> Vec<CMatrix> {
    let t = y.ncols();
    (0..t)
        .map(|skip| naive_scm(y, &(0..t).filter(|&j| j != skip).collect::<Vec<_>>()))
        .collect()
}

/// OLS covariance `H H^H + s2 I` refit from scratch on the listed columns.
pub fn naive_ols_covariance(x: &CMatrix, y: &CMatrix, columns: &[usize]) -> CMatrix {
    let xs = CMatrix::from_fn(x.nrows(), columns.len(), |i, j| x[(i, columns[j])]);
    let ys = CMatrix::from_fn(y.nrows(), columns.len(), |i, j| y[(i, columns[j])]);
    let gram_inv = (&xs * xs.adjoint()).try_inverse().expect("invertible Gram");
    let h = &ys * xs.adjoint() * gram_inv;
    let resid = &ys - &h * &xs;
    let n = y.nrows();
    let mut rss = 0.0;
    for z in resid.iter() {
        rss += z.re * z.re + z.im * z.im;
    }
    let s2 = rss / (n * columns.len()) as f64;
    &h * h.adjoint() + CMatrix::identity(n, n) * c(s2, 0.0)
}

pub fn naive_loo_ols(x: &CMatrix, y: &CMatrix) -> Vec<CMatrix> {
    let t = x.ncols();
    (0..t)
        .map(|skip| naive_ols_covariance(x, y, &(0..t).filter(|&j| j != skip).collect::<Vec<_>>()))
        .collect()
}

/// Leave-one-out cost coefficients `[a11, a12, a22, b1, b2, c]` from an
/// explicit list of leave-one-out estimates.
pub fn naive_moments(loo: &[CMatrix], y: &CMatrix, target: &CMatrix) -> [f64; 6] {
    let t = loo.len() as f64;
    let mut m = [0.0; 6];
    for (i, rt) in loo.iter().enumerate() {
        let st = naive_scm(y, &[i]);
        m[0] += dense_trace_product(rt, rt);
        m[1] += dense_trace_product(rt, target);
        m[3] += dense_trace_product(rt, &st);
        m[4] += dense_trace_product(target, &st);
        m[5] += dense_trace_product(&st, &st);
    }
    for v in m.iter_mut() {
        *v /= t;
    }
    m[2] = dense_trace_product(target, target);
    m
}

/// `(1/T) sum_t ||combo_t - S_t||_F^2` evaluated on dense matrices.
pub fn direct_cv_cost(
    loo: &[CMatrix],
    y: &CMatrix,
    targets: &[CMatrix],
    rho: f64,
    taus: &[f64],
) -> f64 {
    let mut total = 0.0;
    for (i, rt) in loo.iter().enumerate() {
        let mut e = rt * c(rho, 0.0) - naive_scm(y, &[i]);
        for (tk, &tau) in targets.iter().zip(taus) {
            e += tk * c(tau, 0.0);
        }
        total += e.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    total / loo.len() as f64
}

pub fn rel_close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * scale.max(f64::MIN_POSITIVE)
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}
