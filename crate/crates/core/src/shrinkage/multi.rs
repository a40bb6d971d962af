//! Multi-target shrinkage `rho R + sum_k tau_k T_k`.
//!
//! Coefficients minimize a `(K+1)`-variable convex quadratic subject to
//! nonnegativity. For the small `K` used in practice, the exact minimizer is
//! found by enumerating active sets: every subset of coefficients fixed at
//! zero gives a reduced unconstrained problem, and the best feasible
//! stationary point over all subsets is the constrained optimum.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{frobenius_norm_sq, real_trace_product, HermitianMatrix, SampleSet};

use super::{ExplicitLoo, LooFamily};

/// Largest number of coefficients accepted by the enumeration solver.
pub const MAX_COEFFICIENTS: usize = 16;
/// Relative tolerance for the equal-trace precondition of the convex variant.
pub const TRACE_TOL: f64 = 1e-8;

/// `J(x) = x^T A x - 2 x^T b + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiMoments {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
}

impl MultiMoments {
    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        (x.transpose() * &self.a * x)[(0, 0)] - 2.0 * self.b.dot(x) + self.c
    }

    /// `A x - b` (half the gradient).
    pub fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x - &self.b
    }

    fn scale(&self) -> f64 {
        self.a
            .iter()
            .chain(self.b.iter())
            .chain(std::iter::once(&self.c))
            .fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()))
    }

    /// Re-expresses moments over `x = [rho, tau]` in terms of `tau` alone
    /// under `rho = 1 - sum_k tau_k`.
    pub fn to_convex_form(&self) -> MultiMoments {
        let k = self.len() - 1;
        // x = e0 + D tau with D = [-1^T; I]
        let mut d = DMatrix::<f64>::zeros(k + 1, k);
        for j in 0..k {
            d[(0, j)] = -1.0;
            d[(j + 1, j)] = 1.0;
        }
        let a_col0 = self.a.column(0).into_owned();
        let a = d.transpose() * &self.a * &d;
        let b = d.transpose() * (&self.b - &a_col0);
        let c = self.c - 2.0 * self.b[0] + self.a[(0, 0)];
        MultiMoments { a, b, c }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.a.nrows() != n || self.a.ncols() != n {
            return Err(dim_mismatch(
                format!("{n}x{n}"),
                format!("{}x{}", self.a.nrows(), self.a.ncols()),
            ));
        }
        if n == 0 {
            return Err(Error::Empty("moments"));
        }
        if n > MAX_COEFFICIENTS {
            return Err(Error::TooManyTargets {
                count: n,
                limit: MAX_COEFFICIENTS,
            });
        }
        if self.a.iter().chain(self.b.iter()).any(|v| !v.is_finite()) || !self.c.is_finite() {
            return Err(Error::DegenerateMoments("non-finite entry".into()));
        }
        let sym = (&self.a + self.a.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let min = eig.eigenvalues.min();
        let max = eig.eigenvalues.amax();
        if min < -1e-10 * max.max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateMoments(format!(
                "A has eigenvalue {min:e}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiSolution {
    pub rho: f64,
    pub taus: Vec<f64>,
    /// Indices (into the target list) of targets with nonzero weight.
    pub active_targets: Vec<usize>,
}

impl MultiSolution {
    fn from_full(x: &DVector<f64>) -> Self {
        let taus: Vec<f64> = x.iter().skip(1).copied().collect();
        let active_targets = taus
            .iter()
            .enumerate()
            .filter(|(_, &t)| t > 0.0)
            .map(|(k, _)| k)
            .collect();
        Self {
            rho: x[0],
            taus,
            active_targets,
        }
    }

    /// All coefficients `[rho, tau_1, ..., tau_K]`.
    pub fn coefficients(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.taus.len() + 1,
            std::iter::once(self.rho).chain(self.taus.iter().copied()),
        )
    }
}

fn check_targets(n: usize, targets: &[HermitianMatrix]) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::Empty("target list"));
    }
    if targets.len() + 1 > MAX_COEFFICIENTS {
        return Err(Error::TooManyTargets {
            count: targets.len() + 1,
            limit: MAX_COEFFICIENTS,
        });
    }
    match targets.iter().find(|t| t.dim() != n) {
        Some(bad) => Err(dim_mismatch(n, bad.dim())),
        None => Ok(()),
    }
}

fn target_gram(targets: &[HermitianMatrix], a: &mut DMatrix<f64>, offset: usize) -> Result<()> {
    for (m, tm) in targets.iter().enumerate() {
        a[(m + offset, m + offset)] = frobenius_norm_sq(tm);
        for (n, tn) in targets.iter().enumerate().skip(m + 1) {
            let v = real_trace_product(tm, tn)?;
            a[(m + offset, n + offset)] = v;
            a[(n + offset, m + offset)] = v;
        }
    }
    Ok(())
}

/// Frobenius-error moments against a known covariance.
pub fn mt_oracle_moments(
    r: &HermitianMatrix,
    targets: &[HermitianMatrix],
    sigma: &HermitianMatrix,
) -> Result<MultiMoments> {
    check_targets(r.dim(), targets)?;
    let k = targets.len();
    let mut a = DMatrix::zeros(k + 1, k + 1);
    let mut b = DVector::zeros(k + 1);
    a[(0, 0)] = frobenius_norm_sq(r);
    b[0] = real_trace_product(r, sigma)?;
    for (i, t) in targets.iter().enumerate() {
        let v = real_trace_product(r, t)?;
        a[(0, i + 1)] = v;
        a[(i + 1, 0)] = v;
        b[i + 1] = real_trace_product(t, sigma)?;
    }
    target_gram(targets, &mut a, 1)?;
    Ok(MultiMoments {
        a,
        b,
        c: frobenius_norm_sq(sigma),
    })
}

/// LOOCV moments over `[rho, tau_1..tau_K]` for any leave-one-out family.
pub fn mt_loocv_moments<F: LooFamily + ?Sized>(
    family: &F,
    targets: &[HermitianMatrix],
) -> Result<MultiMoments> {
    check_targets(family.base().dim(), targets)?;
    let k = targets.len();
    let mut a = DMatrix::zeros(k + 1, k + 1);
    let mut b = DVector::zeros(k + 1);
    a[(0, 0)] = family.mean_rt_sq();
    b[0] = family.mean_rt_st();
    for (i, t) in targets.iter().enumerate() {
        let v = family.mean_rt_target(t)?;
        a[(0, i + 1)] = v;
        a[(i + 1, 0)] = v;
        b[i + 1] = family.mean_target_st(t)?;
    }
    target_gram(targets, &mut a, 1)?;
    Ok(MultiMoments {
        a,
        b,
        c: family.mean_st_sq(),
    })
}

/// [`mt_loocv_moments`] from explicitly supplied leave-one-out estimates.
pub fn mt_loocv_moments_general(
    leave_one_out: &[HermitianMatrix],
    samples: &SampleSet,
    targets: &[HermitianMatrix],
) -> Result<MultiMoments> {
    let base = leave_one_out
        .first()
        .cloned()
        .ok_or(Error::Empty("leave-one-out estimates"))?;
    mt_loocv_moments(
        &ExplicitLoo::new(base, leave_one_out.to_vec(), samples.clone())?,
        targets,
    )
}

/// LOOCV moments over `tau` alone for the convex design
/// `rho = 1 - sum_k tau_k`.
///
/// With `A_kt = T_k - R_t`, the cost is
/// `(1/T) sum_t ||sum_k tau_k A_kt + R_t - S_t||^2`, returned in the common
/// `tau^T A tau - 2 tau^T b + c` form, so
/// `b_k = (1/T) sum_t Re tr(A_kt (S_t - R_t))`. Every target must carry the
/// trace of the base estimate.
pub fn mt_constrained_moments<F: LooFamily + ?Sized>(
    family: &F,
    targets: &[HermitianMatrix],
) -> Result<MultiMoments> {
    let base = family.base();
    check_targets(base.dim(), targets)?;
    let tr_r = base.trace();
    for (index, t) in targets.iter().enumerate() {
        if (t.trace() - tr_r).abs() > TRACE_TOL * tr_r.abs() {
            return Err(Error::TraceMismatch {
                index,
                target_trace: t.trace(),
                expected_trace: tr_r,
            });
        }
    }
    let k = targets.len();
    let eta = family.mean_rt_sq();
    let b1 = family.mean_rt_st();
    let cross = targets
        .iter()
        .map(|t| family.mean_rt_target(t))
        .collect::<Result<Vec<_>>>()?;
    let mut gram = DMatrix::zeros(k, k);
    target_gram(targets, &mut gram, 0)?;
    let a = DMatrix::from_fn(k, k, |m, n| gram[(m, n)] - cross[m] - cross[n] + eta);
    let mut b = DVector::zeros(k);
    for (i, t) in targets.iter().enumerate() {
        b[i] = family.mean_target_st(t)? - cross[i] - b1 + eta;
    }
    Ok(MultiMoments {
        a,
        b,
        c: eta - 2.0 * b1 + family.mean_st_sq(),
    })
}

/// Minimum-norm solution of the consistent symmetric system `A x = b`.
fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let eig = SymmetricEigen::new(a.clone());
    let max = eig.eigenvalues.amax();
    let cutoff = 1e-12 * max;
    let coords = eig.eigenvectors.transpose() * b;
    let scaled = DVector::from_iterator(
        coords.len(),
        coords.iter().zip(eig.eigenvalues.iter()).map(|(c, &l)| {
            if l.abs() > cutoff && l != 0.0 {
                c / l
            } else {
                0.0
            }
        }),
    );
    &eig.eigenvectors * scaled
}

struct Best {
    x: DVector<f64>,
    objective: f64,
    norm: f64,
}

fn consider(best: &mut Option<Best>, m: &MultiMoments, x: DVector<f64>) {
    let objective = m.objective(&x);
    let norm = x.norm_squared();
    let tol = 1e-12 * m.scale();
    let better = match best {
        None => true,
        Some(b) => {
            objective < b.objective - tol
                || (objective <= b.objective + tol && norm < b.norm - 1e-14)
        }
    };
    if better {
        *best = Some(Best { x, objective, norm });
    }
}

/// Expands a reduced solution onto the full coordinate set, rejecting it if
/// any component is meaningfully negative and clamping round-off.
fn embed(n: usize, idx: &[usize], xf: &DVector<f64>) -> Option<DVector<f64>> {
    let tol = 1e-12 * (1.0 + xf.amax());
    if xf.iter().any(|&v| v < -tol || !v.is_finite()) {
        return None;
    }
    let mut x = DVector::zeros(n);
    for (pos, &i) in idx.iter().enumerate() {
        x[i] = xf[pos].max(0.0);
    }
    Some(x)
}

fn enumerate(m: &MultiMoments, budget: bool) -> DVector<f64> {
    let n = m.len();
    let mut best: Option<Best> = None;
    for mask in 0u32..(1u32 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if idx.is_empty() {
            consider(&mut best, m, DVector::zeros(n));
            continue;
        }
        let af = DMatrix::from_fn(idx.len(), idx.len(), |i, j| m.a[(idx[i], idx[j])]);
        let bf = DVector::from_iterator(idx.len(), idx.iter().map(|&i| m.b[i]));
        if let Some(x) = embed(n, &idx, &pinv_solve(&af, &bf)) {
            if !budget || x.sum() <= 1.0 + 1e-12 {
                consider(&mut best, m, x);
            }
        }
        if budget {
            // Stationary point on the face sum_F x = 1 via the KKT system.
            let f = idx.len();
            let mut kkt = DMatrix::zeros(f + 1, f + 1);
            kkt.view_mut((0, 0), (f, f)).copy_from(&af);
            for i in 0..f {
                kkt[(i, f)] = 1.0;
                kkt[(f, i)] = 1.0;
            }
            let mut rhs = DVector::zeros(f + 1);
            rhs.rows_mut(0, f).copy_from(&bf);
            rhs[f] = 1.0;
            let sol = pinv_solve(&kkt, &rhs);
            let xf = sol.rows(0, f).into_owned();
            if (xf.sum() - 1.0).abs() <= 1e-9 {
                if let Some(x) = embed(n, &idx, &xf) {
                    let s = x.sum();
                    consider(&mut best, m, x / s);
                }
            }
        }
    }
    best.expect("the empty active set is always feasible").x
}

/// Exact minimizer of `x^T A x - 2 x^T b` over `x >= 0`.
pub fn solve_nonneg_qp(m: &MultiMoments) -> Result<DVector<f64>> {
    m.validate()?;
    Ok(enumerate(m, false))
}

/// Exact minimizer over `x >= 0, sum x <= 1`.
pub fn solve_budget_qp(m: &MultiMoments) -> Result<DVector<f64>> {
    m.validate()?;
    Ok(enumerate(m, true))
}

/// Solves full `[rho, tau]` moments under nonnegativity.
pub fn solve_multi(m: &MultiMoments) -> Result<MultiSolution> {
    Ok(MultiSolution::from_full(&solve_nonneg_qp(m)?))
}

/// Solves convex-form `tau` moments, mapping back to `rho = 1 - sum tau`.
pub fn solve_multi_convex(m: &MultiMoments) -> Result<MultiSolution> {
    let taus = solve_budget_qp(m)?;
    let rho = (1.0 - taus.sum()).max(0.0);
    let full = DVector::from_iterator(
        taus.len() + 1,
        std::iter::once(rho).chain(taus.iter().copied()),
    );
    Ok(MultiSolution::from_full(&full))
}

#[derive(Clone, Copy, Debug)]
pub enum MultiTargetMethod<'a> {
    Oracle {
        sigma: &'a HermitianMatrix,
    },
    /// Oracle restricted to `rho + sum tau = 1`.
    OracleConstrained {
        sigma: &'a HermitianMatrix,
    },
    LoocvUnconstrained,
    LoocvConstrained,
}

/// `rho R + sum_k tau_k T_k`
pub fn shrink_multi(
    r: &HermitianMatrix,
    targets: &[HermitianMatrix],
    sol: &MultiSolution,
) -> Result<HermitianMatrix> {
    if sol.taus.len() != targets.len() {
        return Err(dim_mismatch(targets.len(), sol.taus.len()));
    }
    let mut terms: Vec<(f64, &HermitianMatrix)> = vec![(sol.rho, r)];
    terms.extend(sol.taus.iter().copied().zip(targets.iter()));
    HermitianMatrix::linear_combination(&terms)
}

pub fn mt_select<F: LooFamily + ?Sized>(
    method: MultiTargetMethod<'_>,
    family: &F,
    targets: &[HermitianMatrix],
) -> Result<(MultiSolution, HermitianMatrix)> {
    let r = family.base();
    let sol = match method {
        MultiTargetMethod::Oracle { sigma } => solve_multi(&mt_oracle_moments(r, targets, sigma)?)?,
        MultiTargetMethod::OracleConstrained { sigma } => {
            solve_multi_convex(&mt_oracle_moments(r, targets, sigma)?.to_convex_form())?
        }
        MultiTargetMethod::LoocvUnconstrained => solve_multi(&mt_loocv_moments(family, targets)?)?,
        MultiTargetMethod::LoocvConstrained => {
            solve_multi_convex(&mt_constrained_moments(family, targets)?)?
        }
    };
    let estimate = shrink_multi(r, targets, &sol)?;
    Ok((sol, estimate))
}
