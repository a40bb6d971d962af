//! Single-target linear shrinkage `rho R + tau T0`.

use crate::error::{dim_mismatch, Error, Result};
use crate::estimators::LinearModelData;
use crate::linalg::{frobenius_norm_sq, real_trace_product, HermitianMatrix, SampleSet};

use super::{ExplicitLoo, LooFamily, OlsLoo, ScmLoo};

/// Coefficients of `J(rho, tau) = x^T A x - 2 x^T b + c` with `x = [rho, tau]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CvMoments {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    pub b1: f64,
    pub b2: f64,
    pub c: f64,
}

impl CvMoments {
    pub fn objective(&self, rho: f64, tau: f64) -> f64 {
        rho * rho * self.a11 + 2.0 * rho * tau * self.a12 + tau * tau * self.a22
            - 2.0 * (rho * self.b1 + tau * self.b2)
            + self.c
    }

    pub fn determinant(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    fn scale(&self) -> f64 {
        [self.a11, self.a22, self.a12, self.b1, self.b2, self.c]
            .iter()
            .fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()))
    }

    /// Rejects non-finite or clearly indefinite quadratic forms.
    pub fn validate(&self) -> Result<()> {
        let vals = [self.a11, self.a12, self.a22, self.b1, self.b2, self.c];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateMoments("non-finite entry".into()));
        }
        let tol = 1e-12 * self.scale();
        if self.a11 < -tol || self.a22 < -tol {
            return Err(Error::DegenerateMoments(format!(
                "negative diagonal (a11 = {:e}, a22 = {:e})",
                self.a11, self.a22
            )));
        }
        if self.determinant() < -1e-10 * (self.a11.abs() * self.a22.abs()).max(tol * tol) {
            return Err(Error::DegenerateMoments(format!(
                "negative determinant {:e}",
                self.determinant()
            )));
        }
        Ok(())
    }
}

/// Which boundary, if any, the returned coefficients were clipped to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clipping {
    None,
    TauZero,
    RhoZero,
    /// A convex-combination solution clipped to `rho = 0` or `rho = 1`.
    ConvexBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShrinkageSolution {
    pub rho: f64,
    pub tau: f64,
    pub clipped: Clipping,
}

impl ShrinkageSolution {
    pub fn new(rho: f64, tau: f64, clipped: Clipping) -> Self {
        Self { rho, tau, clipped }
    }
}

/// Feasible set for the coefficients. Both variants keep `rho, tau >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    Unconstrained,
    /// `rho + tau = 1`
    Convex,
}

/// `rho R + tau T0`
pub fn shrink(
    r: &HermitianMatrix,
    target: &HermitianMatrix,
    sol: &ShrinkageSolution,
) -> Result<HermitianMatrix> {
    HermitianMatrix::linear_combination(&[(sol.rho, r), (sol.tau, target)])
}

/// Frobenius-error moments against a known covariance `sigma`.
pub fn oracle_moments(
    r: &HermitianMatrix,
    target: &HermitianMatrix,
    sigma: &HermitianMatrix,
) -> Result<CvMoments> {
    if r.dim() != target.dim() {
        return Err(dim_mismatch(r.dim(), target.dim()));
    }
    Ok(CvMoments {
        a11: frobenius_norm_sq(r),
        a12: real_trace_product(r, target)?,
        a22: frobenius_norm_sq(target),
        b1: real_trace_product(r, sigma)?,
        b2: real_trace_product(target, sigma)?,
        c: frobenius_norm_sq(sigma),
    })
}

/// LOOCV moments for any leave-one-out family.
pub fn loocv_moments<F: LooFamily + ?Sized>(
    family: &F,
    target: &HermitianMatrix,
) -> Result<CvMoments> {
    if target.dim() != family.base().dim() {
        return Err(dim_mismatch(family.base().dim(), target.dim()));
    }
    Ok(CvMoments {
        a11: family.mean_rt_sq(),
        a12: family.mean_rt_target(target)?,
        a22: frobenius_norm_sq(target),
        b1: family.mean_rt_st(),
        b2: family.mean_target_st(target)?,
        c: family.mean_st_sq(),
    })
}

/// LOOCV moments from explicitly supplied leave-one-out estimates.
pub fn loocv_moments_general(
    leave_one_out: &[HermitianMatrix],
    samples: &SampleSet,
    target: &HermitianMatrix,
) -> Result<CvMoments> {
    let base = leave_one_out
        .first()
        .cloned()
        .ok_or(Error::Empty("leave-one-out estimates"))?;
    let family = ExplicitLoo::new(base, leave_one_out.to_vec(), samples.clone())?;
    loocv_moments(&family, target)
}

/// LOOCV moments of the SCM family from `R`, `tr(R^2)` and `sum ||y_t||^4`.
pub fn scm_fast_moments(samples: &SampleSet, target: &HermitianMatrix) -> Result<CvMoments> {
    loocv_moments(&ScmLoo::new(samples.clone())?, target)
}

/// LOOCV moments of the OLS family via the rank-one leave-one-out updates.
pub fn ols_fast_moments(data: &LinearModelData, target: &HermitianMatrix) -> Result<CvMoments> {
    loocv_moments(&OlsLoo::new(data)?, target)
}

/// Minimizes `J` over `rho, tau >= 0`, optionally with `rho + tau = 1`.
pub fn solve_quadratic_2d(m: &CvMoments, constraint: Constraint) -> Result<ShrinkageSolution> {
    m.validate()?;
    match constraint {
        Constraint::Unconstrained => Ok(solve_nonnegative(m)),
        Constraint::Convex => Ok(solve_convex(m)),
    }
}

fn ties(m: &CvMoments, j1: f64, j2: f64) -> bool {
    (j1 - j2).abs() <= 1e-12 * m.scale()
}

fn solve_nonnegative(m: &CvMoments) -> ShrinkageSolution {
    let det = m.determinant();
    if m.a11 > 0.0 && m.a22 > 0.0 && det > 1e-14 * m.a11 * m.a22 {
        let rho = (m.a22 * m.b1 - m.a12 * m.b2) / det;
        let tau = (m.a11 * m.b2 - m.a12 * m.b1) / det;
        if rho >= 0.0 && tau >= 0.0 {
            return ShrinkageSolution::new(rho, tau, Clipping::None);
        }
    }
    best_boundary(m)
}

/// Best of the two axis-restricted minimizers; exact ties keep `R`.
fn best_boundary(m: &CvMoments) -> ShrinkageSolution {
    let rho_only = tau_zero_candidate(m);
    let tau_only = rho_zero_candidate(m);
    let j_rho = m.objective(rho_only.rho, 0.0);
    let j_tau = m.objective(0.0, tau_only.tau);
    if j_rho <= j_tau || ties(m, j_rho, j_tau) {
        rho_only
    } else {
        tau_only
    }
}

fn tau_zero_candidate(m: &CvMoments) -> ShrinkageSolution {
    let rho = if m.a11 > 0.0 {
        (m.b1 / m.a11).max(0.0)
    } else {
        0.0
    };
    ShrinkageSolution::new(rho, 0.0, Clipping::TauZero)
}

fn rho_zero_candidate(m: &CvMoments) -> ShrinkageSolution {
    let tau = if m.a22 > 0.0 {
        (m.b2 / m.a22).max(0.0)
    } else {
        0.0
    };
    ShrinkageSolution::new(0.0, tau, Clipping::RhoZero)
}

fn solve_convex(m: &CvMoments) -> ShrinkageSolution {
    let denom = m.a11 - 2.0 * m.a12 + m.a22;
    let numer = m.a22 - m.a12 + m.b1 - m.b2;
    if denom > 1e-14 * m.scale() {
        let rho = numer / denom;
        if (0.0..=1.0).contains(&rho) {
            return ShrinkageSolution::new(rho, 1.0 - rho, Clipping::None);
        }
        let rho = if rho < 0.0 { 0.0 } else { 1.0 };
        return ShrinkageSolution::new(rho, 1.0 - rho, Clipping::ConvexBoundary);
    }
    // Objective is linear (or constant) along the segment.
    let j_r = m.objective(1.0, 0.0);
    let j_t = m.objective(0.0, 1.0);
    let rho = if j_r <= j_t || ties(m, j_r, j_t) {
        1.0
    } else {
        0.0
    };
    ShrinkageSolution::new(rho, 1.0 - rho, Clipping::ConvexBoundary)
}

/// Printed closed form for the SCM family: stationary `rho`, then
/// `tau = (1 - rho) Re tr(R T0) / tr(T0^2)`; `rho > 1` falls back to the
/// `tau = 0` boundary and `rho < 0` to the `rho = 0` boundary.
pub(crate) fn scm_rule_unconstrained(
    family: &ScmLoo,
    target: &HermitianMatrix,
) -> Result<ShrinkageSolution> {
    let m = loocv_moments(family, target)?;
    m.validate()?;
    if m.a22 <= 0.0 {
        return Ok(solve_nonnegative(&m));
    }
    let ratio = m.a12 * m.a12 / m.a22;
    let denom = m.a11 - ratio;
    if denom <= 1e-14 * m.a11.abs() {
        return Ok(solve_nonnegative(&m));
    }
    let rho = (m.b1 - ratio) / denom;
    if rho > 1.0 {
        Ok(tau_zero_candidate(&m))
    } else if rho < 0.0 {
        Ok(rho_zero_candidate(&m))
    } else {
        Ok(ShrinkageSolution::new(
            rho,
            (1.0 - rho) * m.a12 / m.a22,
            Clipping::None,
        ))
    }
}

/// Unconstrained LOOCV coefficients for the SCM estimator.
pub fn scm_solution_unconstrained(
    samples: &SampleSet,
    target: &HermitianMatrix,
) -> Result<ShrinkageSolution> {
    scm_rule_unconstrained(&ScmLoo::new(samples.clone())?, target)
}

/// Convex-combination LOOCV coefficients for the SCM estimator.
pub fn scm_solution_constrained(
    samples: &SampleSet,
    target: &HermitianMatrix,
) -> Result<ShrinkageSolution> {
    solve_quadratic_2d(&scm_fast_moments(samples, target)?, Constraint::Convex)
}

#[derive(Clone, Copy, Debug)]
pub enum SingleTargetMethod<'a> {
    /// Minimizes the true Frobenius error against `sigma`.
    OracleFro {
        sigma: &'a HermitianMatrix,
        constraint: Constraint,
    },
    LoocvUnconstrained,
    LoocvConstrained,
}

/// Selects coefficients for `family.base()` and the target, returning them
/// with the shrunk estimate.
pub fn select_single_target<F: LooFamily + ?Sized>(
    method: SingleTargetMethod<'_>,
    family: &F,
    target: &HermitianMatrix,
) -> Result<(ShrinkageSolution, HermitianMatrix)> {
    let sol = match method {
        SingleTargetMethod::OracleFro { sigma, constraint } => {
            solve_quadratic_2d(&oracle_moments(family.base(), target, sigma)?, constraint)?
        }
        SingleTargetMethod::LoocvUnconstrained => family.solve_single_unconstrained(target)?,
        SingleTargetMethod::LoocvConstrained => {
            solve_quadratic_2d(&loocv_moments(family, target)?, Constraint::Convex)?
        }
    };
    let estimate = shrink(family.base(), target, &sol)?;
    Ok((sol, estimate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CMatrix, CVector};
    use num_complex::Complex64;

    fn orthogonal_pair() -> SampleSet {
        SampleSet::new(CMatrix::identity(2, 2)).unwrap()
    }

    #[test]
    fn shrink_examples() {
        let r = HermitianMatrix::from_real_diagonal(&[2.0, 3.0]);
        let t0 = HermitianMatrix::identity(2);
        let s = |rho, tau| ShrinkageSolution::new(rho, tau, Clipping::None);
        assert_eq!(shrink(&r, &t0, &s(1.0, 0.0)).unwrap(), r);
        assert_eq!(shrink(&r, &t0, &s(0.0, 1.0)).unwrap(), t0);
        let i = HermitianMatrix::identity(2);
        assert_eq!(shrink(&i, &i, &s(0.5, 0.5)).unwrap(), i);
        assert!(shrink(&r, &HermitianMatrix::identity(3), &s(1.0, 0.0)).is_err());
    }

    #[test]
    fn oracle_moments_identity_and_zero() {
        let i = HermitianMatrix::identity(4);
        let m = oracle_moments(&i, &i, &i).unwrap();
        for v in [m.a11, m.a12, m.a22, m.b1, m.b2, m.c] {
            assert_eq!(v, 4.0);
        }
        let z = oracle_moments(&i, &i.scale(2.0), &HermitianMatrix::zeros(4)).unwrap();
        assert_eq!((z.b1, z.b2, z.c), (0.0, 0.0, 0.0));
    }

    #[test]
    fn oracle_recovers_exact_representations() {
        let r = HermitianMatrix::from_real_rows(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        let t0 = HermitianMatrix::identity(2);
        let sol = solve_quadratic_2d(
            &oracle_moments(&r, &t0, &r).unwrap(),
            Constraint::Unconstrained,
        )
        .unwrap();
        assert!((sol.rho - 1.0).abs() < 1e-12 && sol.tau.abs() < 1e-12);
        let sol = solve_quadratic_2d(
            &oracle_moments(&r, &t0, &t0).unwrap(),
            Constraint::Unconstrained,
        )
        .unwrap();
        assert!(sol.rho.abs() < 1e-12 && (sol.tau - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_samples_moments_by_hand() {
        // R_1 = S_2, R_2 = S_1, so every R_t is orthogonal to its S_t.
        let s = orthogonal_pair();
        let loo = vec![
            HermitianMatrix::from_real_diagonal(&[0.0, 1.0]),
            HermitianMatrix::from_real_diagonal(&[1.0, 0.0]),
        ];
        let m = loocv_moments_general(&loo, &s, &HermitianMatrix::identity(2)).unwrap();
        assert_eq!((m.a11, m.b1, m.b2, m.c), (1.0, 0.0, 1.0, 1.0));
        assert_eq!((m.a12, m.a22), (1.0, 2.0));
        // The closed-form SCM moments agree with the explicit ones at T = 2.
        let fast = scm_fast_moments(&s, &HermitianMatrix::identity(2)).unwrap();
        assert_eq!(fast, m);
    }

    #[test]
    fn identical_samples_have_b1_equal_a11() {
        let y = CVector::from_vec(vec![Complex64::new(1.0, 0.5), Complex64::new(-0.3, 0.0)]);
        let s = SampleSet::from_columns(&[y.clone(), y.clone(), y]).unwrap();
        let m = scm_fast_moments(&s, &HermitianMatrix::identity(2)).unwrap();
        assert!((m.a11 - m.b1).abs() < 1e-12 * m.a11);
    }

    #[test]
    fn single_sample_is_rejected() {
        let s = SampleSet::new(CMatrix::identity(2, 1)).unwrap();
        assert!(matches!(
            scm_fast_moments(&s, &HermitianMatrix::identity(2)),
            Err(Error::InsufficientSamples {
                required: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn indefinite_moments_are_rejected() {
        let m = CvMoments {
            a11: 1.0,
            a12: 2.0,
            a22: 1.0,
            b1: 0.0,
            b2: 0.0,
            c: 0.0,
        };
        assert!(matches!(
            solve_quadratic_2d(&m, Constraint::Unconstrained),
            Err(Error::DegenerateMoments(_))
        ));
        let m = CvMoments {
            a11: -1.0,
            a12: 0.0,
            a22: 1.0,
            b1: 0.0,
            b2: 0.0,
            c: 0.0,
        };
        assert!(solve_quadratic_2d(&m, Constraint::Convex).is_err());
    }

    #[test]
    fn boundary_clipping_picks_smaller_objective() {
        // Interior minimizer (2, -1) falls outside the quadrant.
        let m = CvMoments {
            a11: 1.0,
            a12: 0.5,
            a22: 1.0,
            b1: 1.5,
            b2: 0.0,
            c: 3.0,
        };
        let sol = solve_quadratic_2d(&m, Constraint::Unconstrained).unwrap();
        assert_eq!(sol.clipped, Clipping::TauZero);
        assert!((sol.rho - 1.5).abs() < 1e-15 && sol.tau == 0.0);
    }

    #[test]
    fn collinear_target_ties_keep_estimate() {
        // T0 = R: J depends on rho + tau only, both boundaries attain the minimum.
        let r = HermitianMatrix::from_real_rows(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        let sigma = r.scale(0.7);
        let m = oracle_moments(&r, &r, &sigma).unwrap();
        let sol = solve_quadratic_2d(&m, Constraint::Unconstrained).unwrap();
        assert_eq!(sol.clipped, Clipping::TauZero);
        assert!((sol.rho - 0.7).abs() < 1e-12);
    }

    #[test]
    fn zero_target_takes_tau_zero_path() {
        let m = CvMoments {
            a11: 2.0,
            a12: 0.0,
            a22: 0.0,
            b1: 1.0,
            b2: 0.0,
            c: 1.0,
        };
        let sol = solve_quadratic_2d(&m, Constraint::Unconstrained).unwrap();
        assert_eq!((sol.rho, sol.tau), (0.5, 0.0));
    }

    #[test]
    fn convex_clips_to_endpoints() {
        // Stationary rho = (a22 - a12 + b1 - b2) / (a11 - 2 a12 + a22) = 3 / 2.
        let m = CvMoments {
            a11: 1.0,
            a12: 0.0,
            a22: 1.0,
            b1: 2.0,
            b2: 0.0,
            c: 0.0,
        };
        let sol = solve_quadratic_2d(&m, Constraint::Convex).unwrap();
        assert_eq!(
            (sol.rho, sol.tau, sol.clipped),
            (1.0, 0.0, Clipping::ConvexBoundary)
        );
        let m = CvMoments {
            b1: 0.0,
            b2: 2.0,
            ..m
        };
        let sol = solve_quadratic_2d(&m, Constraint::Convex).unwrap();
        assert_eq!(
            (sol.rho, sol.tau, sol.clipped),
            (0.0, 1.0, Clipping::ConvexBoundary)
        );
    }
}
