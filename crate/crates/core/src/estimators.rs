//! Base covariance estimates and their leave-one-out variants.
//!
//! Two families are supported: the sample covariance matrix (SCM) of
//! zero-mean samples, and the covariance implied by an ordinary least
//! squares fit of a linear observation model `y = H x + z`. For both, the
//! leave-one-out estimates are obtained from the full-data estimate by
//! cheap updates instead of refitting `T` times.

use num_complex::Complex64;

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{
    condition_number, outer_product, CMatrix, CVector, HermitianMatrix, SampleSet,
};

/// Largest admissible condition number of the training Gram matrix `X X^H`.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;
/// Leverages at or above `1 - LEVERAGE_MARGIN` make leave-one-out undefined.
pub const LEVERAGE_MARGIN: f64 = 1e-10;

/// Sample covariance `(1/T) sum_t y_t y_t^H`.
pub fn scm(samples: &SampleSet) -> HermitianMatrix {
    let y = samples.as_matrix();
    let t = samples.count() as f64;
    HermitianMatrix::symmetrized((y * y.adjoint()) / Complex64::new(t, 0.0))
}

/// SCM of all samples except column `t`, computed from the full SCM as
/// `T/(T-1) R - 1/(T-1) y_t y_t^H`.
pub fn scm_leave_one_out(
    r: &HermitianMatrix,
    samples: &SampleSet,
    t: usize,
) -> Result<HermitianMatrix> {
    let count = samples.count();
    if count < 2 {
        return Err(Error::InsufficientSamples {
            required: 2,
            got: count,
        });
    }
    if t >= count {
        return Err(Error::IndexOutOfRange {
            index: t,
            len: count,
        });
    }
    if r.dim() != samples.dim() {
        return Err(dim_mismatch(samples.dim(), r.dim()));
    }
    let tf = count as f64;
    let st = outer_product(&samples.column(t));
    HermitianMatrix::linear_combination(&[(tf / (tf - 1.0), r), (-1.0 / (tf - 1.0), &st)])
}

/// All `T` leave-one-out SCMs.
pub fn scm_leave_one_out_all(samples: &SampleSet) -> Result<Vec<HermitianMatrix>> {
    let r = scm(samples);
    (0..samples.count())
        .map(|t| scm_leave_one_out(&r, samples, t))
        .collect()
}

/// Paired training block `(X, Y)` of a linear model `y = H x + z`:
/// inputs are `M x T`, outputs `N x T`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModelData {
    inputs: CMatrix,
    outputs: CMatrix,
}

impl LinearModelData {
    pub fn new(inputs: CMatrix, outputs: CMatrix) -> Result<Self> {
        if inputs.ncols() != outputs.ncols() {
            return Err(dim_mismatch(
                format!("{} output columns", inputs.ncols()),
                outputs.ncols(),
            ));
        }
        if inputs.nrows() == 0 || outputs.nrows() == 0 {
            return Err(Error::Empty("linear model dimension"));
        }
        if inputs.ncols() <= inputs.nrows() {
            return Err(Error::InsufficientSamples {
                required: inputs.nrows() + 1,
                got: inputs.ncols(),
            });
        }
        let finite = |m: &CMatrix| m.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite(&inputs) || !finite(&outputs) {
            return Err(Error::NonFinite);
        }
        Ok(Self { inputs, outputs })
    }

    pub fn inputs(&self) -> &CMatrix {
        &self.inputs
    }

    pub fn outputs(&self) -> &CMatrix {
        &self.outputs
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.outputs.nrows()
    }

    pub fn count(&self) -> usize {
        self.inputs.ncols()
    }

    /// Observations as a sample set (the validation samples `y_t`).
    pub fn output_samples(&self) -> SampleSet {
        SampleSet::new(self.outputs.clone()).expect("validated at construction")
    }

    /// The training block with pair `t` removed.
    pub fn without(&self, t: usize) -> Result<Self> {
        if t >= self.count() {
            return Err(Error::IndexOutOfRange {
                index: t,
                len: self.count(),
            });
        }
        Self::new(
            self.inputs.clone().remove_column(t),
            self.outputs.clone().remove_column(t),
        )
    }
}

/// Result of an OLS fit of the channel matrix and noise variance.
#[derive(Clone, Debug, PartialEq)]
pub struct OlsFit {
    pub h_hat: CMatrix,
    pub sigma2_hat: f64,
    /// `(X X^H)^{-1}`, reused by the leave-one-out updates.
    pub gram_inverse: CMatrix,
    /// Diagonal of the hat matrix `X^H (X X^H)^{-1} X`.
    pub leverages: Vec<f64>,
}

/// OLS estimates `H = Y X^H (X X^H)^{-1}` and
/// `sigma^2 = ||Y - H X||_F^2 / (T N)`.
pub fn ols_fit(data: &LinearModelData) -> Result<OlsFit> {
    let x = data.inputs();
    let y = data.outputs();
    let gram = HermitianMatrix::from_matrix(x * x.adjoint())?;
    let cond = condition_number(&gram);
    if !(cond <= GRAM_CONDITION_LIMIT) {
        return Err(Error::IllConditioned {
            cond,
            limit: GRAM_CONDITION_LIMIT,
        });
    }
    let chol = gram
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("training Gram matrix".into()))?;
    let gram_inverse = chol.inverse();
    let h_hat = y * x.adjoint() * &gram_inverse;

    let n = data.output_dim() as f64;
    let t = data.count() as f64;
    let residual = y - &h_hat * x;
    let sigma2_hat = residual.iter().map(|z| z.norm_sqr()).sum::<f64>() / (t * n);

    let projected = &gram_inverse * x;
    let leverages: Vec<f64> = (0..data.count())
        .map(|j| x.column(j).dotc(&projected.column(j)).re)
        .collect();
    if let Some((index, &leverage)) = leverages
        .iter()
        .enumerate()
        .find(|(_, &l)| l >= 1.0 - LEVERAGE_MARGIN)
    {
        return Err(Error::DegenerateLeverage { index, leverage });
    }

    Ok(OlsFit {
        h_hat,
        sigma2_hat,
        gram_inverse,
        leverages,
    })
}

/// `R = H H^H + sigma^2 I`.
pub fn ols_covariance(fit: &OlsFit) -> HermitianMatrix {
    let n = fit.h_hat.nrows();
    let mut m = &fit.h_hat * fit.h_hat.adjoint();
    for i in 0..n {
        m[(i, i)] += Complex64::new(fit.sigma2_hat, 0.0);
    }
    HermitianMatrix::symmetrized(m)
}

/// Per-sample quantities of the rank-one leave-one-out OLS update.
///
/// With these, `R_t = R - delta I - e phi^H - psi e^H`.
#[derive(Clone, Debug, PartialEq)]
pub struct OlsLooTerms {
    /// `e_t = y_t - H x_t`
    pub residual: CVector,
    /// `f_t = (X X^H)^{-1} x_t / (1 - Phi_t)`
    pub gain: CVector,
    /// `phi_t = H f_t`
    pub phi: CVector,
    /// `psi_t = phi_t - ||f_t||^2 e_t`
    pub psi: CVector,
    /// Noise-variance shift `delta_t`, so that `sigma_t^2 = sigma^2 - delta_t`.
    pub delta: f64,
    /// Leverage `Phi_t`.
    pub leverage: f64,
}

impl OlsLooTerms {
    /// Reassembles `R_t` from the full-data OLS covariance.
    pub fn reconstruct(&self, r: &HermitianMatrix) -> Result<HermitianMatrix> {
        let n = r.dim();
        if self.residual.len() != n {
            return Err(dim_mismatch(n, self.residual.len()));
        }
        let mut m = r.as_matrix().clone();
        for i in 0..n {
            m[(i, i)] -= Complex64::new(self.delta, 0.0);
        }
        m -= &self.residual * self.phi.adjoint();
        m -= &self.psi * self.residual.adjoint();
        Ok(HermitianMatrix::symmetrized(m))
    }
}

/// Leave-one-out update terms for every training pair.
pub fn ols_loo_terms(data: &LinearModelData, fit: &OlsFit) -> Result<Vec<OlsLooTerms>> {
    let n = data.output_dim() as f64;
    let t_count = data.count();
    let tf = t_count as f64;
    if fit.leverages.len() != t_count {
        return Err(dim_mismatch(t_count, fit.leverages.len()));
    }
    (0..t_count)
        .map(|t| {
            let leverage = fit.leverages[t];
            if leverage >= 1.0 - LEVERAGE_MARGIN {
                return Err(Error::DegenerateLeverage { index: t, leverage });
            }
            let x_t = data.inputs().column(t);
            let y_t = data.outputs().column(t);
            let residual: CVector = y_t - &fit.h_hat * x_t;
            let gain: CVector = (&fit.gram_inverse * x_t) / Complex64::new(1.0 - leverage, 0.0);
            let phi: CVector = &fit.h_hat * &gain;
            let gain_sq = gain.norm_squared();
            let psi: CVector = &phi - &residual * Complex64::new(gain_sq, 0.0);
            let delta = residual.norm_squared() / (n * (tf - 1.0) * (1.0 - leverage))
                - fit.sigma2_hat / (tf - 1.0);
            Ok(OlsLooTerms {
                residual,
                gain,
                phi,
                psi,
                delta,
                leverage,
            })
        })
        .collect()
}

/// All leave-one-out OLS covariances, via the rank-one updates.
pub fn ols_leave_one_out_all(data: &LinearModelData) -> Result<Vec<HermitianMatrix>> {
    let fit = ols_fit(data)?;
    let r = ols_covariance(&fit);
    ols_loo_terms(data, &fit)?
        .iter()
        .map(|terms| terms.reconstruct(&r))
        .collect()
}
