//! Consumers of covariance estimates: MVDR beamforming, MMSE channel
//! estimation and LMMSE detection.

use num_complex::Complex64;

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{pseudo_inverse, solve_hpd, spectral_map, CMatrix, CVector, HermitianMatrix};

/// Eigenvalue ratio below which a matrix is rejected as singular for MVDR.
pub const MVDR_PD_TOL: f64 = 1e-12;
/// Relative eigenvalue cutoff of the pseudo-inverse MVDR variant.
pub const PINV_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SteeringVector {
    pub angle: f64,
    pub elements: CVector,
}

impl SteeringVector {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Half-wavelength uniform linear array response, `exp(-j pi n sin(angle))`.
pub fn ula_steering(angle: f64, n_elements: usize) -> SteeringVector {
    let phase = -std::f64::consts::PI * angle.sin();
    SteeringVector {
        angle,
        elements: CVector::from_iterator(
            n_elements,
            (0..n_elements).map(|n| Complex64::from_polar(1.0, phase * n as f64)),
        ),
    }
}

fn mvdr_from_inverse_applied(si_s: CVector, s: &SteeringVector) -> Result<CVector> {
    let den = s.elements.dotc(&si_s);
    if den.norm() < 1e-14 {
        return Err(Error::Singular(
            "steering vector lies in the null space of the covariance".into(),
        ));
    }
    Ok(si_s / den)
}

/// `w = S^{-1} s / (s^H S^{-1} s)`.
pub fn mvdr_weights(sigma_hat: &HermitianMatrix, s: &SteeringVector) -> Result<CVector> {
    if sigma_hat.dim() != s.len() {
        return Err(dim_mismatch(sigma_hat.dim(), s.len()));
    }
    let eig = sigma_hat.eigenvalues();
    let max = eig.last().copied().unwrap_or(0.0);
    if !(eig[0] > MVDR_PD_TOL * max) {
        return Err(Error::Singular(format!(
            "covariance estimate is not positive definite (min eigenvalue {:e}); use the pseudo-inverse variant",
            eig[0]
        )));
    }
    let b = CMatrix::from_column_slice(s.len(), 1, s.elements.as_slice());
    let si_s = solve_hpd(sigma_hat, &b)?.column(0).into_owned();
    mvdr_from_inverse_applied(si_s, s)
}

/// MVDR weights with the Moore-Penrose pseudo-inverse in place of the inverse.
pub fn mvdr_weights_pseudo(sigma_hat: &HermitianMatrix, s: &SteeringVector) -> Result<CVector> {
    if sigma_hat.dim() != s.len() {
        return Err(dim_mismatch(sigma_hat.dim(), s.len()));
    }
    let pinv = pseudo_inverse(sigma_hat, PINV_TOL);
    mvdr_from_inverse_applied(pinv.as_matrix() * &s.elements, s)
}

/// `P |w^H s|^2 / (w^H Q w)` in dB, with `Q` the interference-plus-noise
/// covariance.
pub fn output_sinr(
    w: &CVector,
    s: &SteeringVector,
    signal_power: f64,
    interference_plus_noise: &HermitianMatrix,
) -> Result<f64> {
    if w.len() != s.len() || w.len() != interference_plus_noise.dim() {
        return Err(dim_mismatch(s.len(), w.len()));
    }
    let den = interference_plus_noise.quadratic_form(w)?;
    if den <= 0.0 {
        return Err(Error::Singular("zero interference-plus-noise power".into()));
    }
    let gain = w.dotc(&s.elements).norm_sqr();
    Ok(10.0 * (signal_power * gain / den).log10())
}

/// Kronecker pilot operator `P^T (x) I_nr`, mapping `vec(H)` to `vec(H P)`.
pub fn pilot_kron(pilots: &CMatrix, n_rx: usize) -> CMatrix {
    pilots.transpose().kronecker(&CMatrix::identity(n_rx, n_rx))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelEstimate {
    pub h_hat: CVector,
}

/// `h = S P^H (P S P^H + I)^{-1} y` under unit noise covariance.
pub fn mmse_channel_estimate(
    sigma_h_hat: &HermitianMatrix,
    pilot_kron: &CMatrix,
    y: &CVector,
) -> Result<ChannelEstimate> {
    let n = sigma_h_hat.dim();
    if pilot_kron.ncols() != n {
        return Err(dim_mismatch(n, pilot_kron.ncols()));
    }
    if pilot_kron.nrows() != y.len() {
        return Err(dim_mismatch(pilot_kron.nrows(), y.len()));
    }
    let sp = sigma_h_hat.as_matrix() * pilot_kron.adjoint();
    let gram = pilot_kron * &sp + CMatrix::identity(y.len(), y.len());
    let gram = HermitianMatrix::from_matrix(gram)?;
    let rhs = CMatrix::from_column_slice(y.len(), 1, y.as_slice());
    let z = solve_hpd(&gram, &rhs)?;
    Ok(ChannelEstimate {
        h_hat: (sp * z).column(0).into_owned(),
    })
}

/// `S_LS - (1/P) I` with negative eigenvalues floored at zero.
pub fn ls_to_channel_cov(
    sigma_hls_hat: &HermitianMatrix,
    pilot_power: f64,
) -> Result<HermitianMatrix> {
    if !(pilot_power > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "pilot power must be positive, got {pilot_power}"
        )));
    }
    let shift = 1.0 / pilot_power;
    Ok(spectral_map(sigma_hls_hat, |l| (l - shift).max(0.0)))
}

/// `x = H^H S_y^{-1} y` for every column of `y`.
pub fn lmmse_detect(
    h_hat: &CMatrix,
    sigma_y_hat: &HermitianMatrix,
    y: &CMatrix,
) -> Result<CMatrix> {
    if h_hat.nrows() != sigma_y_hat.dim() {
        return Err(dim_mismatch(sigma_y_hat.dim(), h_hat.nrows()));
    }
    if y.nrows() != sigma_y_hat.dim() {
        return Err(dim_mismatch(sigma_y_hat.dim(), y.nrows()));
    }
    Ok(h_hat.adjoint() * solve_hpd(sigma_y_hat, y)?)
}
