//! Reference coefficient selectors: Ledoit-Wolf, general linear combination
//! and oracle-approximating shrinkage.

use crate::error::{Error, Result};
use crate::estimators::scm;
use crate::linalg::{
    compensated_sum, frobenius_norm_sq, outer_product, real_trace_product, HermitianMatrix,
    SampleSet,
};
use crate::shrinkage::single::{Clipping, ShrinkageSolution};

/// Relative threshold below which a dispersion is treated as zero.
const DEGENERATE_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LwStatistics {
    pub mu_hat: f64,
    pub delta2_hat: f64,
    pub beta2_hat: f64,
    pub alpha2_hat: f64,
}

/// `(1/T^2) sum_t ||y_t y_t^H - R||_F^2` evaluated term by term.
pub fn glc_beta2_direct(samples: &SampleSet) -> f64 {
    let r = scm(samples);
    let t = samples.count() as f64;
    let parts = (0..samples.count()).map(|i| {
        let d = outer_product(&samples.column(i))
            .sub(&r)
            .expect("outer products share the sample dimension");
        frobenius_norm_sq(&d)
    });
    compensated_sum(parts) / (t * t)
}

/// `(1/T^2) sum_t ||y_t||^4 - (1/T) ||R||_F^2`, clamped at zero.
pub fn glc_beta2_fast(samples: &SampleSet) -> f64 {
    let r = scm(samples);
    let t = samples.count() as f64;
    (samples.fourth_moment_sum() / (t * t) - frobenius_norm_sq(&r) / t).max(0.0)
}

pub fn lw_statistics(samples: &SampleSet) -> LwStatistics {
    let r = scm(samples);
    let n = r.dim();
    let mu_hat = r.trace() / n as f64;
    let centered = r
        .sub(&HermitianMatrix::scaled_identity(n, mu_hat))
        .expect("same dimension");
    let delta2_hat = frobenius_norm_sq(&centered);
    let beta2_hat = glc_beta2_fast(samples).min(delta2_hat);
    LwStatistics {
        mu_hat,
        delta2_hat,
        beta2_hat,
        alpha2_hat: delta2_hat - beta2_hat,
    }
}

/// Coefficients of `rho R + tau I` (unscaled identity target).
pub fn lw_coefficients(samples: &SampleSet) -> ShrinkageSolution {
    let s = lw_statistics(samples);
    if s.delta2_hat <= DEGENERATE_TOL * s.mu_hat * s.mu_hat * samples.dim() as f64 {
        return ShrinkageSolution::new(0.0, s.mu_hat, Clipping::RhoZero);
    }
    ShrinkageSolution::new(
        s.alpha2_hat / s.delta2_hat,
        s.beta2_hat / s.delta2_hat * s.mu_hat,
        Clipping::None,
    )
}

/// Coefficients of `rho R + tau T0` for an arbitrary target.
pub fn glc_coefficients(
    samples: &SampleSet,
    target: &HermitianMatrix,
) -> Result<ShrinkageSolution> {
    let r = scm(samples);
    let t0_sq = frobenius_norm_sq(target);
    if t0_sq <= 0.0 {
        return Err(Error::InvalidParameter(
            "target has zero Frobenius norm".into(),
        ));
    }
    let nu = real_trace_product(target, &r)? / t0_sq;
    if nu <= 0.0 {
        return Ok(ShrinkageSolution::new(1.0, 0.0, Clipping::TauZero));
    }
    let dist = frobenius_norm_sq(&r.sub(&target.scale(nu))?);
    if dist <= DEGENERATE_TOL * frobenius_norm_sq(&r) {
        return Ok(ShrinkageSolution::new(0.0, nu, Clipping::RhoZero));
    }
    let beta2 = glc_beta2_fast(samples).min(dist);
    let tau = nu * beta2 / dist;
    Ok(ShrinkageSolution::new(1.0 - tau / nu, tau, Clipping::None))
}

/// Closed-form OAS weight on the scaled-identity target.
pub fn oas_coefficient(r: &HermitianMatrix, t: usize) -> Result<ShrinkageSolution> {
    let n = r.dim() as f64;
    if r.dim() < 2 {
        return Err(Error::InvalidParameter("OAS needs N >= 2".into()));
    }
    if t == 0 {
        return Err(Error::InsufficientSamples {
            required: 1,
            got: 0,
        });
    }
    let tr = r.trace();
    let tr_sq = frobenius_norm_sq(r);
    let num = (1.0 - 2.0 / n) * tr_sq + tr * tr;
    let den = (t as f64 + 1.0 - 2.0 / n) * (tr_sq - tr * tr / n);
    let tau = if den <= 0.0 || num >= den {
        1.0
    } else {
        num / den
    };
    let clipped = if tau == 1.0 {
        Clipping::RhoZero
    } else {
        Clipping::None
    };
    Ok(ShrinkageSolution::new(1.0 - tau, tau, clipped))
}
