//! Built-in property suites behind `shrinkcov selfcheck`.

use num_complex::Complex64;

use shrinkcov_core::applications::{mvdr_weights, ula_steering};
use shrinkcov_core::datagen::{gaussian_samples, Field, RngStream};
use shrinkcov_core::estimators::{ols_covariance, ols_fit, scm, LinearModelData};
use shrinkcov_core::linalg::{is_psd, DEFAULT_PSD_TOL};
use shrinkcov_core::shrinkage::single::{
    loocv_moments_general, ols_fast_moments, scm_fast_moments, shrink, Clipping, CvMoments,
    ShrinkageSolution,
};
use shrinkcov_core::targets::scaled_identity_target;
use shrinkcov_core::{CMatrix, HermitianMatrix};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::csv_io::to_csv_string;
use crate::experiments::{run_experiment_with, Execution};
use crate::metrics::nmse;

const INSTANCES: u64 = 25;

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub result: std::result::Result<(), String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.result.is_ok()
    }

    pub fn line(&self) -> String {
        match &self.result {
            Ok(()) => format!("PASS {}", self.name),
            Err(why) => format!("FAIL {}: {why}", self.name),
        }
    }
}

type Check = fn() -> std::result::Result<(), String>;

const CHECKS: &[(&str, Check)] = &[
    ("shrink-preserves-psd", shrink_preserves_psd),
    ("mvdr-distortionless", mvdr_distortionless),
    ("nmse-identities", nmse_identities),
    ("scm-fast-path", scm_fast_path),
    ("ols-fast-path", ols_fast_path),
    ("csv-determinism", csv_determinism),
    ("parallel-equals-serial", parallel_equals_serial),
];

pub fn run_selfcheck() -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|&(name, check)| CheckOutcome {
            name,
            result: check(),
        })
        .collect()
}

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn random_psd(n: usize, rng: &mut RngStream, field: Field) -> HermitianMatrix {
    scm(
        &gaussian_samples(&HermitianMatrix::identity(n), n / 2 + 1, rng, field)
            .expect("identity is PSD"),
    )
}

fn shrink_preserves_psd() -> std::result::Result<(), String> {
    for k in 0..INSTANCES {
        let mut rng = RngStream::new(0x5eed, k);
        let n = 2 + (k as usize % 9);
        let r = random_psd(n, &mut rng, Field::Complex);
        let t = random_psd(n, &mut rng, Field::Complex);
        let sol =
            ShrinkageSolution::new(rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0), Clipping::None);
        let est = shrink(&r, &t, &sol).map_err(fail)?;
        if !is_psd(&est, DEFAULT_PSD_TOL) {
            return Err(format!(
                "instance {k}: min eigenvalue {:e}",
                est.eigenvalues()[0]
            ));
        }
    }
    Ok(())
}

fn mvdr_distortionless() -> std::result::Result<(), String> {
    for k in 0..INSTANCES {
        let mut rng = RngStream::new(0xbea4, k);
        let n = 2 + (k as usize % 12);
        let sigma = scm(&gaussian_samples(
            &HermitianMatrix::identity(n),
            2 * n,
            &mut rng,
            Field::Complex,
        )
        .map_err(fail)?);
        let s = ula_steering(rng.uniform(-1.5, 1.5), n);
        let w = mvdr_weights(&sigma, &s).map_err(fail)?;
        let gain = w.dotc(&s.elements);
        if (gain - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(format!("instance {k}: w^H s = {gain}"));
        }
    }
    Ok(())
}

fn nmse_identities() -> std::result::Result<(), String> {
    let mut rng = RngStream::new(0x4e35, 0);
    let truths: Vec<HermitianMatrix> = (0..4)
        .map(|_| random_psd(5, &mut rng, Field::Real))
        .collect();
    let zeros = vec![HermitianMatrix::zeros(5); truths.len()];
    let doubled: Vec<HermitianMatrix> = truths.iter().map(|t| t.scale(2.0)).collect();
    let cases = [
        ("est == truth", &truths, 0.0),
        ("est == 0", &zeros, 1.0),
        ("est == 2 truth", &doubled, 1.0),
    ];
    for (label, est, want) in cases {
        let got = nmse(est, &truths).map_err(fail)?;
        if (got - want).abs() > 1e-14 {
            return Err(format!("{label}: nmse {got}, expected {want}"));
        }
    }
    if nmse(&zeros, &zeros).is_ok() {
        return Err("all-zero truths accepted".into());
    }
    Ok(())
}

fn moments_close(fast: &CvMoments, slow: &CvMoments, tol: f64) -> bool {
    let f = [fast.a11, fast.a12, fast.a22, fast.b1, fast.b2, fast.c];
    let s = [slow.a11, slow.a12, slow.a22, slow.b1, slow.b2, slow.c];
    f.iter()
        .zip(&s)
        .all(|(a, b)| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300))
}

fn scm_fast_path() -> std::result::Result<(), String> {
    for k in 0..INSTANCES {
        let mut rng = RngStream::new(0x5c4, k);
        let n = 3 + (k as usize % 10);
        let t = 3 + (k as usize * 7 % 30);
        let field = if k % 2 == 0 {
            Field::Real
        } else {
            Field::Complex
        };
        let sigma = random_psd(n, &mut rng, field)
            .add(&HermitianMatrix::identity(n))
            .map_err(fail)?;
        let samples = gaussian_samples(&sigma, t, &mut rng, field).map_err(fail)?;
        let target = scaled_identity_target(&scm(&samples));
        let fast = scm_fast_moments(&samples, &target).map_err(fail)?;
        let loo = (0..t)
            .map(|i| samples.without(i).map(|s| scm(&s)))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(fail)?;
        let slow = loocv_moments_general(&loo, &samples, &target).map_err(fail)?;
        if !moments_close(&fast, &slow, 1e-10) {
            return Err(format!("instance {k}: fast {fast:?} vs explicit {slow:?}"));
        }
    }
    Ok(())
}

fn ols_fast_path() -> std::result::Result<(), String> {
    for k in 0..INSTANCES {
        let mut rng = RngStream::new(0x015, k);
        let m = 1 + (k as usize % 4);
        let n = 2 + (k as usize % 9);
        let t = m + 3 + (k as usize % 8);
        let x = rng.matrix(m, t, Field::Complex);
        let h = rng.matrix(n, m, Field::Complex);
        let y: CMatrix = &h * &x + rng.matrix(n, t, Field::Complex) * Complex64::new(0.3, 0.0);
        let data = LinearModelData::new(x, y).map_err(fail)?;
        let target = HermitianMatrix::identity(n);
        let fast = ols_fast_moments(&data, &target).map_err(fail)?;
        let loo = (0..t)
            .map(|i| {
                data.without(i)
                    .and_then(|d| ols_fit(&d))
                    .map(|f| ols_covariance(&f))
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(fail)?;
        let slow = loocv_moments_general(&loo, &data.output_samples(), &target).map_err(fail)?;
        if !moments_close(&fast, &slow, 1e-8) {
            return Err(format!("instance {k}: fast {fast:?} vs refit {slow:?}"));
        }
    }
    Ok(())
}

fn small_config(kind: ExperimentKind) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(kind);
    cfg.repetitions = 8;
    cfg.seed = 17;
    cfg.training_lengths = vec![5, 12];
    if let crate::config::Scene::Ar1Identity(s) = &mut cfg.scene {
        s.n = 8;
    }
    cfg
}

fn csv_determinism() -> std::result::Result<(), String> {
    let cfg = small_config(ExperimentKind::Ar1Identity);
    let first = to_csv_string(&run_experiment_with(&cfg, Execution::Parallel).map_err(fail)?)
        .map_err(fail)?;
    let second = to_csv_string(&run_experiment_with(&cfg, Execution::Parallel).map_err(fail)?)
        .map_err(fail)?;
    if first != second {
        return Err("two runs with the same seed produced different CSV".into());
    }
    Ok(())
}

fn parallel_equals_serial() -> std::result::Result<(), String> {
    let cfg = small_config(ExperimentKind::Ar1Identity);
    let serial = run_experiment_with(&cfg, Execution::Serial).map_err(fail)?;
    let parallel = run_experiment_with(&cfg, Execution::Parallel).map_err(fail)?;
    if serial != parallel {
        return Err("parallel aggregates differ from serial".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for outcome in run_selfcheck() {
            assert!(outcome.passed(), "{}", outcome.line());
        }
    }
}
