//! Shrinkage coefficient selection.
//!
//! Every leave-one-out cross-validation cost in this crate is a quadratic
//! form in the shrinkage coefficients whose coefficients are averages over
//! the `T` data splits of three kinds of quantities:
//!
//! * `(1/T) sum_t tr(R_t^2)`
//! * `(1/T) sum_t Re tr(R_t S_t)` with `S_t = y_t y_t^H`
//! * `(1/T) sum_t Re tr(R_t T)` for a target `T`
//!
//! plus terms that depend only on the validation samples. [`LooFamily`]
//! abstracts over how those averages are obtained: from an explicit list of
//! leave-one-out estimates, or by the closed-form shortcuts for the SCM and
//! OLS estimators.

pub mod multi;
pub mod single;

use crate::error::{dim_mismatch, Error, Result};
use crate::estimators::{
    ols_covariance, ols_fit, ols_loo_terms, scm, LinearModelData, OlsLooTerms,
};
use crate::linalg::{
    compensated_sum, frobenius_norm_sq, real_trace_product, HermitianMatrix, SampleSet,
};

pub use single::ShrinkageSolution;

/// A base estimate `R` together with its leave-one-out family `{R_t}` and
/// the validation samples `{y_t}`.
pub trait LooFamily {
    /// Full-data estimate `R`.
    fn base(&self) -> &HermitianMatrix;

    fn samples(&self) -> &SampleSet;

    /// `(1/T) sum_t tr(R_t^2)`
    fn mean_rt_sq(&self) -> f64;

    /// `(1/T) sum_t Re tr(R_t S_t)`
    fn mean_rt_st(&self) -> f64;

    /// `(1/T) sum_t Re tr(R_t T)`
    fn mean_rt_target(&self, target: &HermitianMatrix) -> Result<f64>;

    /// `(1/T) sum_t Re tr(T S_t)`
    fn mean_target_st(&self, target: &HermitianMatrix) -> Result<f64> {
        real_trace_product(target, self.validation_scm())
    }

    /// `(1/T) sum_t ||y_t||^4`
    fn mean_st_sq(&self) -> f64 {
        self.samples().fourth_moment_sum() / self.samples().count() as f64
    }

    /// `(1/T) sum_t S_t`
    fn validation_scm(&self) -> &HermitianMatrix;

    /// Unconstrained single-target solution. Families with a printed
    /// closed form override this.
    fn solve_single_unconstrained(&self, target: &HermitianMatrix) -> Result<ShrinkageSolution> {
        let m = single::loocv_moments(self, target)?;
        single::solve_quadratic_2d(&m, single::Constraint::Unconstrained)
    }
}

/// Leave-one-out family given by an explicit list of estimates.
#[derive(Clone, Debug)]
pub struct ExplicitLoo {
    base: HermitianMatrix,
    estimates: Vec<HermitianMatrix>,
    samples: SampleSet,
    validation_scm: HermitianMatrix,
}

impl ExplicitLoo {
    /// `base` is only used as the estimate shrunk by the selectors; the
    /// cost itself depends on `estimates` and `samples` alone.
    pub fn new(
        base: HermitianMatrix,
        estimates: Vec<HermitianMatrix>,
        samples: SampleSet,
    ) -> Result<Self> {
        if estimates.len() != samples.count() {
            return Err(dim_mismatch(
                format!("{} leave-one-out estimates", samples.count()),
                estimates.len(),
            ));
        }
        let n = samples.dim();
        if let Some(bad) = estimates
            .iter()
            .chain(std::iter::once(&base))
            .find(|e| e.dim() != n)
        {
            return Err(dim_mismatch(n, bad.dim()));
        }
        let validation_scm = scm(&samples);
        Ok(Self {
            base,
            estimates,
            samples,
            validation_scm,
        })
    }

    pub fn estimates(&self) -> &[HermitianMatrix] {
        &self.estimates
    }
}

impl LooFamily for ExplicitLoo {
    fn base(&self) -> &HermitianMatrix {
        &self.base
    }

    fn samples(&self) -> &SampleSet {
        &self.samples
    }

    fn mean_rt_sq(&self) -> f64 {
        let t = self.estimates.len() as f64;
        compensated_sum(self.estimates.iter().map(frobenius_norm_sq)) / t
    }

    fn mean_rt_st(&self) -> f64 {
        let t = self.estimates.len() as f64;
        compensated_sum(self.estimates.iter().enumerate().map(|(i, rt)| {
            rt.quadratic_form(&self.samples.column(i))
                .expect("dimensions validated at construction")
        })) / t
    }

    fn mean_rt_target(&self, target: &HermitianMatrix) -> Result<f64> {
        let t = self.estimates.len() as f64;
        let parts = self
            .estimates
            .iter()
            .map(|rt| real_trace_product(rt, target))
            .collect::<Result<Vec<_>>>()?;
        Ok(compensated_sum(parts) / t)
    }

    fn validation_scm(&self) -> &HermitianMatrix {
        &self.validation_scm
    }
}

/// SCM leave-one-out family evaluated from `R`, `tr(R^2)` and
/// `sum_t ||y_t||^4` only, without forming any `R_t`.
#[derive(Clone, Debug)]
pub struct ScmLoo {
    samples: SampleSet,
    r: HermitianMatrix,
    tr_r_sq: f64,
    fourth_sum: f64,
}

impl ScmLoo {
    pub fn new(samples: SampleSet) -> Result<Self> {
        if samples.count() < 2 {
            return Err(Error::InsufficientSamples {
                required: 2,
                got: samples.count(),
            });
        }
        let r = scm(&samples);
        let tr_r_sq = frobenius_norm_sq(&r);
        let fourth_sum = samples.fourth_moment_sum();
        Ok(Self {
            samples,
            r,
            tr_r_sq,
            fourth_sum,
        })
    }

    fn t(&self) -> f64 {
        self.samples.count() as f64
    }

    pub fn tr_r_sq(&self) -> f64 {
        self.tr_r_sq
    }

    /// `sum_t ||y_t||^4`
    pub fn fourth_sum(&self) -> f64 {
        self.fourth_sum
    }
}

impl LooFamily for ScmLoo {
    fn base(&self) -> &HermitianMatrix {
        &self.r
    }

    fn samples(&self) -> &SampleSet {
        &self.samples
    }

    fn mean_rt_sq(&self) -> f64 {
        let t = self.t();
        t * (t - 2.0) / ((t - 1.0) * (t - 1.0)) * self.tr_r_sq
            + self.fourth_sum / (t * (t - 1.0) * (t - 1.0))
    }

    fn mean_rt_st(&self) -> f64 {
        let t = self.t();
        t / (t - 1.0) * self.tr_r_sq - self.fourth_sum / (t * (t - 1.0))
    }

    fn mean_rt_target(&self, target: &HermitianMatrix) -> Result<f64> {
        real_trace_product(&self.r, target)
    }

    fn mean_st_sq(&self) -> f64 {
        self.fourth_sum / self.t()
    }

    fn validation_scm(&self) -> &HermitianMatrix {
        &self.r
    }

    fn solve_single_unconstrained(&self, target: &HermitianMatrix) -> Result<ShrinkageSolution> {
        single::scm_rule_unconstrained(self, target)
    }
}

/// OLS leave-one-out family using the rank-one updates of the channel fit.
#[derive(Clone, Debug)]
pub struct OlsLoo {
    samples: SampleSet,
    r: HermitianMatrix,
    terms: Vec<OlsLooTerms>,
    validation_scm: HermitianMatrix,
    mean_rt_sq: f64,
    mean_rt_st: f64,
    mean_delta: f64,
}

impl OlsLoo {
    pub fn new(data: &LinearModelData) -> Result<Self> {
        let fit = ols_fit(data)?;
        let r = ols_covariance(&fit);
        let terms = ols_loo_terms(data, &fit)?;
        let samples = data.output_samples();
        let validation_scm = scm(&samples);
        let n = r.dim() as f64;
        let tf = terms.len() as f64;
        let tr_r = r.trace();
        let tr_r_sq = frobenius_norm_sq(&r);
        let rm = r.as_matrix();

        let mut sq_parts = Vec::with_capacity(terms.len());
        let mut st_parts = Vec::with_capacity(terms.len());
        for (t, term) in terms.iter().enumerate() {
            let e = &term.residual;
            let phi = &term.phi;
            let psi = &term.psi;
            let d = term.delta;
            let e_sq = e.norm_squared();
            // tr(R_t^2) with R_t = (R - d I) - e phi^H - psi e^H
            let sum_pp = phi + psi;
            let q_pp = rm * &sum_pp - &sum_pp * num_complex::Complex64::new(d, 0.0);
            let cross = e.dotc(&q_pp) - e.dotc(psi) * e.dotc(phi);
            sq_parts.push(
                n * d * d - 2.0 * d * tr_r + e_sq * (phi.norm_squared() + psi.norm_squared())
                    - 2.0 * cross.re,
            );
            // y^H R_t y
            let y = samples.column(t);
            let y_r_y = y.dotc(&(rm * &y)).re;
            let corr = y.dotc(e) * phi.dotc(&y) + y.dotc(psi) * e.dotc(&y);
            st_parts.push(y_r_y - d * y.norm_squared() - corr.re);
        }
        let mean_rt_sq = tr_r_sq + compensated_sum(sq_parts) / tf;
        let mean_rt_st = compensated_sum(st_parts) / tf;
        let mean_delta = compensated_sum(terms.iter().map(|t| t.delta)) / tf;
        Ok(Self {
            samples,
            r,
            terms,
            validation_scm,
            mean_rt_sq,
            mean_rt_st,
            mean_delta,
        })
    }

    pub fn terms(&self) -> &[OlsLooTerms] {
        &self.terms
    }
}

impl LooFamily for OlsLoo {
    fn base(&self) -> &HermitianMatrix {
        &self.r
    }

    fn samples(&self) -> &SampleSet {
        &self.samples
    }

    fn mean_rt_sq(&self) -> f64 {
        self.mean_rt_sq
    }

    fn mean_rt_st(&self) -> f64 {
        self.mean_rt_st
    }

    fn mean_rt_target(&self, target: &HermitianMatrix) -> Result<f64> {
        if target.dim() != self.r.dim() {
            return Err(dim_mismatch(self.r.dim(), target.dim()));
        }
        let tm = target.as_matrix();
        let tf = self.terms.len() as f64;
        let corr = compensated_sum(self.terms.iter().map(|term| {
            let te = tm * &term.residual;
            (term.phi.dotc(&te) + te.dotc(&term.psi)).re
        }));
        Ok(real_trace_product(&self.r, target)? - self.mean_delta * target.trace() - corr / tf)
    }

    fn validation_scm(&self) -> &HermitianMatrix {
        &self.validation_scm
    }
}
