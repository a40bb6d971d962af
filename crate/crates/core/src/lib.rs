//! Linear shrinkage covariance estimation with closed-form leave-one-out
//! cross-validation of the shrinkage coefficients.
//!
//! The estimate `rho R + sum_k tau_k T_k` shrinks a base estimate `R` (the
//! sample covariance, or a model-based estimate from a least-squares fit)
//! toward one or more structured targets. Coefficients can be chosen by the
//! oracle rule (when the true covariance is known), by leave-one-out
//! cross-validation, or by the classical Ledoit-Wolf, GLC and OAS rules.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod applications;
pub mod baselines;
pub mod datagen;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod shrinkage;
pub mod targets;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, HermitianMatrix, SampleSet};
pub use shrinkage::{ExplicitLoo, LooFamily, OlsLoo, ScmLoo, ShrinkageSolution};
