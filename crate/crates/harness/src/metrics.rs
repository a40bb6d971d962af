//! Per-repetition metric samples and their aggregation.

use shrinkcov_core::{CMatrix, CVector, HermitianMatrix};

use crate::error::{HarnessError, Result};

/// Squared Frobenius norm, for anything an NMSE can be taken over.
pub trait SquaredNorm {
    fn squared_norm(&self) -> f64;
    fn squared_distance(&self, other: &Self) -> f64;
}

impl SquaredNorm for CMatrix {
    fn squared_norm(&self) -> f64 {
        self.norm_squared()
    }

    fn squared_distance(&self, other: &Self) -> f64 {
        (self - other).norm_squared()
    }
}

impl SquaredNorm for CVector {
    fn squared_norm(&self) -> f64 {
        self.norm_squared()
    }

    fn squared_distance(&self, other: &Self) -> f64 {
        (self - other).norm_squared()
    }
}

impl SquaredNorm for HermitianMatrix {
    fn squared_norm(&self) -> f64 {
        self.as_matrix().norm_squared()
    }

    fn squared_distance(&self, other: &Self) -> f64 {
        (self.as_matrix() - other.as_matrix()).norm_squared()
    }
}

/// `sum_i ||est_i - truth_i||^2 / sum_i ||truth_i||^2`
pub fn nmse<M: SquaredNorm>(estimates: &[M], truths: &[M]) -> Result<f64> {
    if estimates.len() != truths.len() || estimates.is_empty() {
        return Err(HarnessError::Config(format!(
            "nmse needs equal nonempty lists, got {} and {}",
            estimates.len(),
            truths.len()
        )));
    }
    let err: f64 = estimates
        .iter()
        .zip(truths)
        .map(|(e, t)| e.squared_distance(t))
        .sum();
    let norm: f64 = truths.iter().map(SquaredNorm::squared_norm).sum();
    if norm == 0.0 {
        return Err(HarnessError::Numeric(
            shrinkcov_core::Error::DegenerateMoments("all truths are zero".into()),
        ));
    }
    Ok(err / norm)
}

/// One repetition's contribution to a metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sample {
    /// Numerator and denominator of a ratio of expectations.
    Ratio { err: f64, norm: f64 },
    /// A value averaged directly.
    Value(f64),
}

impl Sample {
    pub fn ratio<M: SquaredNorm>(estimate: &M, truth: &M) -> Sample {
        Sample::Ratio {
            err: estimate.squared_distance(truth),
            norm: truth.squared_norm(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
}

/// Mean and standard error, accumulated in slice order.
///
/// Ratios report `sum err / sum norm` with a delta-method standard error;
/// values report the sample mean and its standard error.
pub fn summarize(samples: &[Sample]) -> Result<Summary> {
    let reps = samples.len();
    if reps == 0 {
        return Err(HarnessError::Config("no repetitions to summarize".into()));
    }
    let k = reps as f64;
    let mixed = || HarnessError::Config("mixed metric kinds in one cell".into());
    match samples[0] {
        Sample::Ratio { .. } => {
            let mut pairs = Vec::with_capacity(reps);
            for s in samples {
                match *s {
                    Sample::Ratio { err, norm } => pairs.push((err, norm)),
                    Sample::Value(_) => return Err(mixed()),
                }
            }
            let err_sum: f64 = pairs.iter().map(|p| p.0).sum();
            let norm_sum: f64 = pairs.iter().map(|p| p.1).sum();
            if norm_sum == 0.0 {
                return Err(HarnessError::Numeric(
                    shrinkcov_core::Error::DegenerateMoments("all truths are zero".into()),
                ));
            }
            let mean = err_sum / norm_sum;
            let stderr = if reps > 1 {
                let ss: f64 = pairs.iter().map(|(e, n)| (e - mean * n).powi(2)).sum();
                (ss / (k * (k - 1.0))).sqrt() / (norm_sum / k)
            } else {
                0.0
            };
            Ok(Summary { mean, stderr, reps })
        }
        Sample::Value(_) => {
            let mut values = Vec::with_capacity(reps);
            for s in samples {
                match *s {
                    Sample::Value(v) => values.push(v),
                    Sample::Ratio { .. } => return Err(mixed()),
                }
            }
            let mean = values.iter().sum::<f64>() / k;
            let stderr = if reps > 1 {
                let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
                (ss / (k * (k - 1.0))).sqrt()
            } else {
                0.0
            };
            Ok(Summary { mean, stderr, reps })
        }
    }
}
