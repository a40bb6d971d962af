//! Shrinkage targets.

use num_complex::Complex64;

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{is_psd, CMatrix, HermitianMatrix, SampleSet, DEFAULT_PSD_TOL};
use crate::shrinkage::single::{select_single_target, SingleTargetMethod};
use crate::shrinkage::ScmLoo;

/// How a target is derived from the base estimate.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetSpec {
    ScaledIdentity,
    DiagonalOfR,
    ToeplitzAverage,
    Explicit(HermitianMatrix),
}

impl TargetSpec {
    pub fn build(&self, r: &HermitianMatrix) -> Result<HermitianMatrix> {
        match self {
            TargetSpec::ScaledIdentity => Ok(scaled_identity_target(r)),
            TargetSpec::DiagonalOfR => diagonal_target(r),
            TargetSpec::ToeplitzAverage => checked_toeplitz_average_target(r),
            TargetSpec::Explicit(t) if t.dim() == r.dim() => Ok(t.clone()),
            TargetSpec::Explicit(t) => Err(dim_mismatch(r.dim(), t.dim())),
        }
    }
}

/// `(tr(R)/N) I`
pub fn scaled_identity_target(r: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix::scaled_identity(r.dim(), r.trace() / r.dim() as f64)
}

/// `Diag(R)`
pub fn diagonal_target(r: &HermitianMatrix) -> Result<HermitianMatrix> {
    let diag: Vec<f64> = (0..r.dim()).map(|i| r.get(i, i).re).collect();
    if let Some(&d) = diag.iter().find(|&&d| d < -1e-12) {
        return Err(Error::InvalidParameter(format!(
            "negative diagonal entry {d:e}"
        )));
    }
    Ok(HermitianMatrix::from_real_diagonal(
        &diag.iter().map(|d| d.max(0.0)).collect::<Vec<_>>(),
    ))
}

/// Symmetric Toeplitz matrix whose `b`-th band holds the mean of the real
/// parts of `R` on that band.
///
/// Band averaging does not preserve PSD: for an SCM with `T` well below `N`
/// the result is usually indefinite. [`checked_toeplitz_average_target`]
/// rejects such outputs.
pub fn toeplitz_average_target(r: &HermitianMatrix) -> HermitianMatrix {
    let n = r.dim();
    let band: Vec<f64> = (0..n)
        .map(|b| (b..n).map(|i| r.get(i, i - b).re).sum::<f64>() / (n - b) as f64)
        .collect();
    let m = CMatrix::from_fn(n, n, |i, j| Complex64::new(band[i.abs_diff(j)], 0.0));
    HermitianMatrix::symmetrized(m)
}

/// [`toeplitz_average_target`], failing with `NotPsd` when the band average
/// is indefinite.
pub fn checked_toeplitz_average_target(r: &HermitianMatrix) -> Result<HermitianMatrix> {
    let t = toeplitz_average_target(r);
    if !is_psd(&t, DEFAULT_PSD_TOL) {
        let min = t.eigenvalues()[0];
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(t)
}

/// SCM of past data shrunk toward the scaled identity by constrained LOOCV.
pub fn knowledge_aided_target(past_samples: &SampleSet) -> Result<HermitianMatrix> {
    let family = ScmLoo::new(past_samples.clone())?;
    let target = scaled_identity_target(crate::shrinkage::LooFamily::base(&family));
    let (_, estimate) =
        select_single_target(SingleTargetMethod::LoocvConstrained, &family, &target)?;
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::outer_product;
    use crate::linalg::CVector;

    #[test]
    fn scaled_identity_examples() {
        let t = scaled_identity_target(&HermitianMatrix::from_real_diagonal(&[1.0, 3.0]));
        assert_eq!(t, HermitianMatrix::scaled_identity(2, 2.0));
        let y = CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
        assert_eq!(
            scaled_identity_target(&outer_product(&y)),
            HermitianMatrix::identity(2)
        );
    }

    #[test]
    fn diagonal_drops_off_diagonal() {
        let i = Complex64::i();
        let r = HermitianMatrix::from_rows(2, &[2.0.into(), i, -i, 3.0.into()]).unwrap();
        assert_eq!(
            diagonal_target(&r).unwrap(),
            HermitianMatrix::from_real_diagonal(&[2.0, 3.0])
        );
        let bad = HermitianMatrix::from_real_diagonal(&[1.0, -1.0]);
        assert!(diagonal_target(&bad).is_err());
    }

    #[test]
    fn toeplitz_fixed_point_and_identity() {
        let r = HermitianMatrix::from_real_rows(3, &[2.0, 0.5, 0.1, 0.5, 2.0, 0.5, 0.1, 0.5, 2.0])
            .unwrap();
        assert_eq!(toeplitz_average_target(&r), r);
        let i4 = HermitianMatrix::identity(4);
        assert_eq!(toeplitz_average_target(&i4), i4);
    }

    #[test]
    fn toeplitz_rejects_indefinite_average() {
        // Diagonal mean 0.5 with band mean 1 is indefinite.
        let r = HermitianMatrix::from_real_rows(2, &[0.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            checked_toeplitz_average_target(&r),
            Err(Error::NotPsd { .. })
        ));
        assert!(toeplitz_average_target(&r).eigenvalues()[0] < 0.0);
    }

    #[test]
    fn knowledge_aided_on_identical_samples_is_psd() {
        let y = CVector::from_vec(vec![
            Complex64::new(1.0, 0.5),
            Complex64::new(-0.3, 0.0),
            Complex64::new(0.2, 0.2),
        ]);
        let s = SampleSet::from_columns(&[y.clone(), y.clone(), y]).unwrap();
        let t = knowledge_aided_target(&s).unwrap();
        assert!(is_psd(&t, 1e-10));
    }
}
