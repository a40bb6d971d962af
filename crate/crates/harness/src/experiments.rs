//! Monte-Carlo drivers for the six experiments.
//!
//! Repetition `k` of every cell draws from `RngStream::new(seed, k)`, so all
//! methods at all training lengths see common random numbers, and the
//! outcome does not depend on thread scheduling. Per-repetition samples are
//! collected in repetition order and reduced serially.

use num_complex::Complex64;
use rayon::prelude::*;

use shrinkcov_core::applications::{
    lmmse_detect, ls_to_channel_cov, mmse_channel_estimate, mvdr_weights, mvdr_weights_pseudo,
    output_sinr, pilot_kron, ula_steering,
};
use shrinkcov_core::baselines::{glc_coefficients, lw_coefficients, oas_coefficient};
use shrinkcov_core::datagen::{
    ar_covariance, interference_scene, kronecker_channel_cov, perturb_coefficient, Field,
    GaussianScene, InterferenceScene, LinearModelScene, RngStream, SampleGenerator, SampleSource,
};
use shrinkcov_core::estimators::{ols_fit, LinearModelData};
use shrinkcov_core::shrinkage::multi::{mt_select, MultiTargetMethod};
use shrinkcov_core::shrinkage::single::{
    oracle_moments, select_single_target, shrink, solve_quadratic_2d, Constraint,
    SingleTargetMethod,
};
use shrinkcov_core::targets::{
    diagonal_target, knowledge_aided_target, scaled_identity_target, toeplitz_average_target,
};
use shrinkcov_core::{CMatrix, CVector, HermitianMatrix, LooFamily, OlsLoo, SampleSet, ScmLoo};

use crate::config::{ExperimentConfig, Scene};
use crate::csv_io::ResultRow;
use crate::error::Result;
use crate::methods::{metric_name, MethodInfo};
use crate::metrics::{summarize, Sample};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_experiment_with(config, Execution::Parallel)
}

pub fn run_experiment_with(
    config: &ExperimentConfig,
    execution: Execution,
) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let methods: Vec<&str> = config
        .method_infos()?
        .iter()
        .map(|m: &&MethodInfo| m.name)
        .collect();
    let runner = Runner::prepare(&config.scene)?;
    let mut rows = Vec::new();
    for &t in &config.training_lengths {
        let rep =
            |k: usize| runner.repetition(&methods, t, &mut RngStream::new(config.seed, k as u64));
        let per_rep: Vec<Result<Vec<Sample>>> = match execution {
            Execution::Serial => (0..config.repetitions).map(rep).collect(),
            Execution::Parallel => (0..config.repetitions).into_par_iter().map(rep).collect(),
        };
        let per_rep = per_rep.into_iter().collect::<Result<Vec<_>>>()?;
        for (i, name) in methods.iter().enumerate() {
            let column: Vec<Sample> = per_rep.iter().map(|s| s[i]).collect();
            let summary = summarize(&column)?;
            rows.push(ResultRow {
                experiment: config.experiment.name().to_string(),
                method: name.to_string(),
                t,
                metric: metric_name(config.experiment).to_string(),
                mean: summary.mean,
                stderr: summary.stderr,
                reps: summary.reps,
            });
        }
    }
    crate::csv_io::sort_rows(&mut rows);
    Ok(rows)
}

enum Runner {
    Ar1(GaussianScene),
    Linear(crate::config::LinearModelScene),
    Multi(GaussianScene),
    Mimo(MimoContext),
    Lmmse(crate::config::LmmseScene),
    Mvdr(MvdrContext),
}

struct MimoContext {
    scene: crate::config::MimoScene,
    sigma_h: HermitianMatrix,
    channel: SampleGenerator,
    pilot_power: f64,
    pilot_kron: CMatrix,
}

struct MvdrContext {
    scene: InterferenceScene,
    aoa_error: f64,
}

fn unknown(name: &str) -> ! {
    unreachable!("method '{name}' passed validation but has no implementation")
}

impl Runner {
    fn prepare(scene: &Scene) -> Result<Self> {
        Ok(match scene {
            Scene::Ar1Identity(s) => Runner::Ar1(GaussianScene::new(
                ar_covariance(s.n, Complex64::new(s.r, 0.0))?,
                Field::Real,
            )?),
            Scene::MultiTargetAr(s) => Runner::Multi(GaussianScene::new(
                ar_covariance(s.n, Complex64::new(s.r, 0.0))?,
                Field::Real,
            )?),
            Scene::LinearModelPastTarget(s) => Runner::Linear(s.clone()),
            Scene::MimoChannelMmse(s) => {
                let sigma_h =
                    kronecker_channel_cov(s.n_t, s.n_r, s.r_t.to_complex(), s.r_r.to_complex())?;
                let pilot_power = 10f64.powf(s.pilot_snr_db / 10.0);
                let pilots =
                    CMatrix::identity(s.n_t, s.n_t) * Complex64::new(pilot_power.sqrt(), 0.0);
                Runner::Mimo(MimoContext {
                    scene: s.clone(),
                    channel: SampleGenerator::new(&sigma_h, Field::Complex)?,
                    sigma_h,
                    pilot_power,
                    pilot_kron: pilot_kron(&pilots, s.n_r),
                })
            }
            Scene::LmmseDetect(s) => Runner::Lmmse(s.clone()),
            Scene::MvdrBeam(s) => {
                let aoas: Vec<f64> = s
                    .interferer_degrees
                    .iter()
                    .map(|d| d.to_radians())
                    .collect();
                Runner::Mvdr(MvdrContext {
                    scene: interference_scene(&aoas, s.inr_db, s.noise_db, s.n)?,
                    aoa_error: s.aoa_error_degrees.to_radians(),
                })
            }
        })
    }

    fn repetition(&self, methods: &[&str], t: usize, rng: &mut RngStream) -> Result<Vec<Sample>> {
        match self {
            Runner::Ar1(scene) => ar1_rep(scene, methods, t, rng),
            Runner::Linear(s) => linear_rep(s, methods, t, rng),
            Runner::Multi(scene) => multi_rep(scene, methods, t, rng),
            Runner::Mimo(ctx) => mimo_rep(ctx, methods, t, rng),
            Runner::Lmmse(s) => lmmse_rep(s, methods, t, rng),
            Runner::Mvdr(ctx) => mvdr_rep(ctx, methods, t, rng),
        }
    }
}

fn oracle_single(
    r: &HermitianMatrix,
    target: &HermitianMatrix,
    sigma: &HermitianMatrix,
    constraint: Constraint,
) -> Result<HermitianMatrix> {
    let sol = solve_quadratic_2d(&oracle_moments(r, target, sigma)?, constraint)?;
    Ok(shrink(r, target, &sol)?)
}

fn loocv_single<F: LooFamily + ?Sized>(
    family: &F,
    target: &HermitianMatrix,
    convex: bool,
) -> Result<HermitianMatrix> {
    let method = if convex {
        SingleTargetMethod::LoocvConstrained
    } else {
        SingleTargetMethod::LoocvUnconstrained
    };
    Ok(select_single_target(method, family, target)?.1)
}

fn lw_estimate(samples: &SampleSet, r: &HermitianMatrix) -> Result<HermitianMatrix> {
    Ok(shrink(
        r,
        &HermitianMatrix::identity(r.dim()),
        &lw_coefficients(samples),
    )?)
}

fn glc_estimate(
    samples: &SampleSet,
    r: &HermitianMatrix,
    target: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    Ok(shrink(r, target, &glc_coefficients(samples, target)?)?)
}

fn oas_estimate(r: &HermitianMatrix, t: usize) -> Result<HermitianMatrix> {
    Ok(shrink(
        r,
        &scaled_identity_target(r),
        &oas_coefficient(r, t)?,
    )?)
}

/// Leave-one-out family, built only when some method needs it.
fn scm_family(
    samples: &SampleSet,
    methods: &[&str],
    needs: impl Fn(&str) -> bool,
) -> Result<Option<ScmLoo>> {
    if methods.iter().any(|m| needs(m)) {
        Ok(Some(ScmLoo::new(samples.clone())?))
    } else {
        Ok(None)
    }
}

fn ar1_rep(
    scene: &GaussianScene,
    methods: &[&str],
    t: usize,
    rng: &mut RngStream,
) -> Result<Vec<Sample>> {
    let sigma = scene.true_covariance();
    let samples = scene.draw_samples(t, rng)?;
    let family = scm_family(&samples, methods, |m| m.starts_with("loocv"))?;
    let r = shrinkcov_core::estimators::scm(&samples);
    let target = scaled_identity_target(&r);
    methods
        .iter()
        .map(|&m| {
            let est = match m {
                "scm" => r.clone(),
                "oracle" => oracle_single(&r, &target, sigma, Constraint::Unconstrained)?,
                "oracle-convex" => oracle_single(&r, &target, sigma, Constraint::Convex)?,
                "loocv" => loocv_single(family.as_ref().expect("built for loocv"), &target, false)?,
                "loocv-convex" => {
                    loocv_single(family.as_ref().expect("built for loocv"), &target, true)?
                }
                "lw" => lw_estimate(&samples, &r)?,
                "glc" => glc_estimate(&samples, &r, &target)?,
                "oas" => oas_estimate(&r, t)?,
                other => unknown(other),
            };
            Ok(Sample::ratio(&est, sigma))
        })
        .collect()
}

fn linear_rep(
    s: &crate::config::LinearModelScene,
    methods: &[&str],
    t: usize,
    rng: &mut RngStream,
) -> Result<Vec<Sample>> {
    let scene = shrinkcov_core::datagen::linear_model_scene(s.n, s.m, s.sigma2, Field::Real, rng)?;
    let past = scene.perturbed(s.past_perturbation_variance, rng)?;
    let past_samples = past.draw_samples(t, rng)?;
    let samples = scene.draw_samples(t, rng)?;
    let sigma = scene.true_covariance();
    let needs_past = methods.iter().any(|m| m.contains("past"));
    let past_target = if needs_past {
        Some(knowledge_aided_target(&past_samples)?)
    } else {
        None
    };
    let family = scm_family(&samples, methods, |m| m.starts_with("loocv"))?;
    let r = shrinkcov_core::estimators::scm(&samples);
    let identity = scaled_identity_target(&r);
    methods
        .iter()
        .map(|&m| {
            let past = || past_target.as_ref().expect("built for past methods");
            let fam = || family.as_ref().expect("built for loocv");
            let est = match m {
                "scm" => r.clone(),
                "past-target" => past().clone(),
                "oracle-identity" => {
                    oracle_single(&r, &identity, sigma, Constraint::Unconstrained)?
                }
                "loocv-identity" => loocv_single(fam(), &identity, false)?,
                "oracle-past" => oracle_single(&r, past(), sigma, Constraint::Unconstrained)?,
                "loocv-past" => loocv_single(fam(), past(), false)?,
                "loocv-past-convex" => loocv_single(fam(), past(), true)?,
                "glc-past" => glc_estimate(&samples, &r, past())?,
                other => unknown(other),
            };
            Ok(Sample::ratio(&est, sigma))
        })
        .collect()
}

fn multi_rep(
    scene: &GaussianScene,
    methods: &[&str],
    t: usize,
    rng: &mut RngStream,
) -> Result<Vec<Sample>> {
    let sigma = scene.true_covariance();
    let samples = scene.draw_samples(t, rng)?;
    let r = shrinkcov_core::estimators::scm(&samples);
    let identity = scaled_identity_target(&r);
    let needs_targets = methods.iter().any(|m| m.contains("-mt"));
    let targets = if needs_targets {
        vec![
            identity.clone(),
            diagonal_target(&r)?,
            toeplitz_average_target(&r),
        ]
    } else {
        Vec::new()
    };
    let family = scm_family(&samples, methods, |m| {
        m.starts_with("loocv") || m.contains("-mt")
    })?;
    methods
        .iter()
        .map(|&m| {
            let fam = || family.as_ref().expect("built for loocv");
            let est = match m {
                "scm" => r.clone(),
                "loocv-identity" => loocv_single(fam(), &identity, false)?,
                "oracle-mt" => mt_select(MultiTargetMethod::Oracle { sigma }, fam(), &targets)?.1,
                "oracle-mt-convex" => {
                    mt_select(
                        MultiTargetMethod::OracleConstrained { sigma },
                        fam(),
                        &targets,
                    )?
                    .1
                }
                "loocv-mt" => mt_select(MultiTargetMethod::LoocvUnconstrained, fam(), &targets)?.1,
                "loocv-mt-convex" => {
                    mt_select(MultiTargetMethod::LoocvConstrained, fam(), &targets)?.1
                }
                other => unknown(other),
            };
            Ok(Sample::ratio(&est, sigma))
        })
        .collect()
}

/// Least-squares channel estimates `h + n / sqrt(P)` for `t` channel draws.
fn ls_estimates(
    channel: &SampleGenerator,
    pilot_power: f64,
    t: usize,
    rng: &mut RngStream,
) -> Result<SampleSet> {
    let h = channel.draw(t, rng)?;
    let noise =
        rng.matrix(channel.dim(), t, Field::Complex) / Complex64::new(pilot_power.sqrt(), 0.0);
    Ok(SampleSet::new(h.as_matrix() + noise)?)
}

fn mimo_rep(
    ctx: &MimoContext,
    methods: &[&str],
    t: usize,
    rng: &mut RngStream,
) -> Result<Vec<Sample>> {
    let s = &ctx.scene;
    let r_t_past = perturb_coefficient(s.r_t.to_complex(), s.past_half_width, rng);
    let r_r_past = perturb_coefficient(s.r_r.to_complex(), s.past_half_width, rng);
    let sigma_past = kronecker_channel_cov(s.n_t, s.n_r, r_t_past, r_r_past)?;
    let past_channel = SampleGenerator::new(&sigma_past, Field::Complex)?;
    let test_h = ctx.channel.draw(s.test_channels, rng)?;
    let test_noise = rng.matrix(ctx.pilot_kron.nrows(), s.test_channels, Field::Complex);
    let test_y = &ctx.pilot_kron * test_h.as_matrix() + test_noise;
    let past_ls = ls_estimates(&past_channel, ctx.pilot_power, t, rng)?;
    let train_ls = ls_estimates(&ctx.channel, ctx.pilot_power, t, rng)?;

    let needs_past = methods
        .iter()
        .any(|m| m.contains("past") || m.ends_with("-mt"));
    let past_target = if needs_past {
        Some(knowledge_aided_target(&past_ls)?)
    } else {
        None
    };
    let family = scm_family(&train_ls, methods, |m| m.contains("loocv"))?;
    let r = shrinkcov_core::estimators::scm(&train_ls);
    let identity = scaled_identity_target(&r);

    let mut out = Vec::with_capacity(methods.len());
    for &m in methods {
        let fam = || family.as_ref().expect("built for loocv");
        let past = || past_target.as_ref().expect("built for past methods");
        let sigma_h_hat = match m {
            "ls" => None,
            "mmse-true" => Some(ctx.sigma_h.clone()),
            "mmse-scm" => Some(ls_to_channel_cov(&r, ctx.pilot_power)?),
            "mmse-loocv-identity" => Some(ls_to_channel_cov(
                &loocv_single(fam(), &identity, false)?,
                ctx.pilot_power,
            )?),
            "mmse-loocv-past" => Some(ls_to_channel_cov(
                &loocv_single(fam(), past(), false)?,
                ctx.pilot_power,
            )?),
            "mmse-loocv-mt" => {
                let targets = [identity.clone(), past().clone()];
                let est = mt_select(MultiTargetMethod::LoocvUnconstrained, fam(), &targets)?.1;
                Some(ls_to_channel_cov(&est, ctx.pilot_power)?)
            }
            other => unknown(other),
        };
        let (mut err, mut norm) = (0.0, 0.0);
        for k in 0..s.test_channels {
            let y: CVector = test_y.column(k).into_owned();
            let h_hat = match &sigma_h_hat {
                None => &y / Complex64::new(ctx.pilot_power.sqrt(), 0.0),
                Some(cov) => mmse_channel_estimate(cov, &ctx.pilot_kron, &y)?.h_hat,
            };
            let h = test_h.column(k);
            err += (h_hat - &h).norm_squared();
            norm += h.norm_squared();
        }
        out.push(Sample::Ratio { err, norm });
    }
    Ok(out)
}

/// First `m` rows of the `t`-point DFT matrix: orthogonal unit-modulus
/// training with `X X^H = t I`.
pub fn dft_training(m: usize, t: usize) -> CMatrix {
    CMatrix::from_fn(m, t, |i, j| {
        Complex64::from_polar(
            1.0,
            -2.0 * std::f64::consts::PI * ((i * j) % t) as f64 / t as f64,
        )
    })
}

fn lmmse_rep(
    s: &crate::config::LmmseScene,
    methods: &[&str],
    t: usize,
    rng: &mut RngStream,
) -> Result<Vec<Sample>> {
    let h = rng.matrix(s.n, s.m, Field::Complex) * Complex64::new(s.h_variance.sqrt(), 0.0);
    let scene = LinearModelScene::with_channel(h, s.sigma2, Field::Complex)?;
    let x_test = rng.matrix(s.m, s.test_symbols, Field::Complex);
    let y_test = scene.respond(&x_test, rng)?;
    let x_train = dft_training(s.m, t);
    let y_train = scene.respond(&x_train, rng)?;
    let data = LinearModelData::new(x_train, y_train)?;
    let fit = ols_fit(&data)?;
    let family = OlsLoo::new(&data)?;
    let r = family.base();
    let t0 = diagonal_target(r)?;
    let sigma = scene.true_covariance();

    methods
        .iter()
        .map(|&m| {
            let (h_hat, cov) = match m {
                "lmmse-true" => (scene.channel(), sigma.clone()),
                "ols" => (&fit.h_hat, r.clone()),
                "oracle-diag" => (
                    &fit.h_hat,
                    oracle_single(r, &t0, sigma, Constraint::Unconstrained)?,
                ),
                "loocv-diag" => (&fit.h_hat, loocv_single(&family, &t0, false)?),
                "loocv-diag-convex" => (&fit.h_hat, loocv_single(&family, &t0, true)?),
                other => unknown(other),
            };
            let x_hat = lmmse_detect(h_hat, &cov, &y_test)?;
            Ok(Sample::Ratio {
                err: (x_hat - &x_test).norm_squared(),
                norm: x_test.norm_squared(),
            })
        })
        .collect()
}

/// MVDR weights, via the pseudo-inverse when the estimate is singular.
fn beamform(
    cov: &HermitianMatrix,
    s: &shrinkcov_core::applications::SteeringVector,
) -> Result<CVector> {
    match mvdr_weights(cov, s) {
        Ok(w) => Ok(w),
        Err(shrinkcov_core::Error::Singular(_)) => Ok(mvdr_weights_pseudo(cov, s)?),
        Err(e) => Err(e.into()),
    }
}

fn mvdr_rep(
    ctx: &MvdrContext,
    methods: &[&str],
    t: usize,
    rng: &mut RngStream,
) -> Result<Vec<Sample>> {
    let scene = &ctx.scene;
    let error = if ctx.aoa_error > 0.0 {
        rng.uniform(-ctx.aoa_error, ctx.aoa_error)
    } else {
        0.0
    };
    let presumed = ula_steering(error, scene.dim());
    let samples = scene.draw_samples(t, rng)?;
    let r = shrinkcov_core::estimators::scm(&samples);
    let identity = scaled_identity_target(&r);
    let family = scm_family(&samples, methods, |m| m.starts_with("loocv"))?;
    methods
        .iter()
        .map(|&m| {
            let fam = || family.as_ref().expect("built for loocv");
            let w = match m {
                "scm-pinv" => mvdr_weights_pseudo(&r, &presumed)?,
                "true-cov" => mvdr_weights(scene.true_covariance(), &presumed)?,
                "loocv" => beamform(&loocv_single(fam(), &identity, false)?, &presumed)?,
                "loocv-convex" => beamform(&loocv_single(fam(), &identity, true)?, &presumed)?,
                "oas" => beamform(&oas_estimate(&r, t)?, &presumed)?,
                "glc" => beamform(&glc_estimate(&samples, &r, &identity)?, &presumed)?,
                "lw" => beamform(&lw_estimate(&samples, &r)?, &presumed)?,
                other => unknown(other),
            };
            let sinr = output_sinr(
                &w,
                &scene.steering,
                scene.signal_power,
                scene.interference_plus_noise(),
            )?;
            Ok(Sample::Value(sinr))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentKind;

    #[test]
    fn dft_training_is_orthogonal() {
        let x = dft_training(3, 7);
        let g = &x * x.adjoint();
        assert!((g - CMatrix::identity(3, 3) * Complex64::new(7.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn every_experiment_runs_at_tiny_scale() {
        for kind in ExperimentKind::ALL {
            let mut cfg = ExperimentConfig::defaults(kind);
            cfg.repetitions = 2;
            cfg.training_lengths = vec![*cfg.training_lengths.last().unwrap()];
            shrink_scene(&mut cfg.scene);
            let rows = run_experiment(&cfg).unwrap_or_else(|e| panic!("{kind:?}: {e}"));
            assert_eq!(rows.len(), cfg.methods.len());
            assert!(
                rows.iter().all(|r| r.mean.is_finite() && r.stderr >= 0.0),
                "{kind:?}"
            );
        }
    }

    fn shrink_scene(scene: &mut Scene) {
        match scene {
            Scene::Ar1Identity(s) => s.n = 6,
            Scene::MultiTargetAr(s) => s.n = 6,
            Scene::LinearModelPastTarget(s) => {
                s.n = 6;
                s.m = 4;
            }
            Scene::MimoChannelMmse(s) => {
                s.n_t = 2;
                s.n_r = 3;
                s.test_channels = 2;
            }
            Scene::LmmseDetect(s) => s.test_symbols = 5,
            Scene::MvdrBeam(s) => s.n = 8,
        }
    }
}
