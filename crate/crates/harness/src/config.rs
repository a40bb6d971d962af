//! Experiment configuration files.
//!
//! A config is a JSON object:
//!
//! ```json
//! {
//!   "experiment": "Ar1Identity",
//!   "scene": { "n": 40, "r": 0.5 },
//!   "training_lengths": [10, 20, 40, 80],
//!   "repetitions": 200,
//!   "seed": 1,
//!   "methods": ["scm", "oracle", "loocv"],
//!   "output": "fig1.csv"
//! }
//! ```
//!
//! Everything except `experiment` is optional. Scene fields fall back to the
//! defaults of each scene type, `training_lengths` to a geometric grid, and
//! `methods` to every method the experiment supports.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{HarnessError, Result};
use crate::methods::{method_table, MethodInfo};

pub const DEFAULT_REPETITIONS: usize = 200;
pub const DEFAULT_SEED: u64 = 1;
/// Smallest training length accepted by the leave-one-out selectors.
pub const MIN_LOOCV_SAMPLES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExperimentKind {
    Ar1Identity,
    LinearModelPastTarget,
    MultiTargetAr,
    MimoChannelMmse,
    LmmseDetect,
    MvdrBeam,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Ar1Identity,
        ExperimentKind::LinearModelPastTarget,
        ExperimentKind::MultiTargetAr,
        ExperimentKind::MimoChannelMmse,
        ExperimentKind::LmmseDetect,
        ExperimentKind::MvdrBeam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Ar1Identity => "Ar1Identity",
            ExperimentKind::LinearModelPastTarget => "LinearModelPastTarget",
            ExperimentKind::MultiTargetAr => "MultiTargetAr",
            ExperimentKind::MimoChannelMmse => "MimoChannelMmse",
            ExperimentKind::LmmseDetect => "LmmseDetect",
            ExperimentKind::MvdrBeam => "MvdrBeam",
        }
    }

    fn default_training_lengths(self) -> Vec<usize> {
        match self {
            ExperimentKind::Ar1Identity => vec![10, 20, 40, 80, 160],
            ExperimentKind::LinearModelPastTarget => vec![10, 20, 40, 80, 160],
            ExperimentKind::MultiTargetAr => vec![10, 20, 40, 80, 160],
            ExperimentKind::MimoChannelMmse => vec![25, 50, 100, 200, 400],
            ExperimentKind::LmmseDetect => vec![12, 24, 48, 96, 192],
            ExperimentKind::MvdrBeam => vec![10, 15, 20, 30, 40, 60],
        }
    }
}

/// Complex coefficient `magnitude * exp(j pi phase_over_pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polar {
    pub magnitude: f64,
    pub phase_over_pi: f64,
}

impl Polar {
    pub fn to_complex(self) -> num_complex::Complex64 {
        num_complex::Complex64::from_polar(
            self.magnitude,
            std::f64::consts::PI * self.phase_over_pi,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ar1Scene {
    pub n: usize,
    pub r: f64,
}

impl Default for Ar1Scene {
    fn default() -> Self {
        Self { n: 100, r: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearModelScene {
    pub n: usize,
    pub m: usize,
    pub sigma2: f64,
    /// Variance of the entries of the channel drift `H_past - H`.
    pub past_perturbation_variance: f64,
}

impl Default for LinearModelScene {
    fn default() -> Self {
        Self {
            n: 50,
            m: 50,
            sigma2: 0.1,
            past_perturbation_variance: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiTargetScene {
    pub n: usize,
    pub r: f64,
}

impl Default for MultiTargetScene {
    fn default() -> Self {
        Self { n: 50, r: 0.9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MimoScene {
    pub n_t: usize,
    pub n_r: usize,
    pub pilot_snr_db: f64,
    pub r_t: Polar,
    pub r_r: Polar,
    /// Half-width of the uniform drift applied to the real and imaginary
    /// parts of `r_t`, `r_r` for the past covariance.
    pub past_half_width: f64,
    /// Fresh channel realizations evaluated per repetition.
    pub test_channels: usize,
}

impl Default for MimoScene {
    fn default() -> Self {
        Self {
            n_t: 10,
            n_r: 10,
            pilot_snr_db: 5.0,
            r_t: Polar {
                magnitude: 0.7,
                phase_over_pi: -0.9349,
            },
            r_r: Polar {
                magnitude: 0.9,
                phase_over_pi: -0.9289,
            },
            past_half_width: 1.0 / (10.0 * std::f64::consts::SQRT_2),
            test_channels: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmmseScene {
    pub n: usize,
    pub m: usize,
    pub h_variance: f64,
    pub sigma2: f64,
    /// Symbol vectors detected per repetition.
    pub test_symbols: usize,
}

impl Default for LmmseScene {
    fn default() -> Self {
        Self {
            n: 32,
            m: 8,
            h_variance: 1.0 / 40.0,
            sigma2: 0.1,
            test_symbols: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MvdrScene {
    pub n: usize,
    pub interferer_degrees: Vec<f64>,
    pub inr_db: f64,
    pub noise_db: f64,
    /// Presumed-steering error is uniform on `[-x, x]` degrees.
    pub aoa_error_degrees: f64,
}

impl Default for MvdrScene {
    fn default() -> Self {
        Self {
            n: 30,
            interferer_degrees: shrinkcov_core::datagen::DEFAULT_INTERFERER_DEGREES.to_vec(),
            inr_db: 10.0,
            noise_db: -10.0,
            aoa_error_degrees: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Scene {
    Ar1Identity(Ar1Scene),
    LinearModelPastTarget(LinearModelScene),
    MultiTargetAr(MultiTargetScene),
    MimoChannelMmse(MimoScene),
    LmmseDetect(LmmseScene),
    MvdrBeam(MvdrScene),
}

impl Scene {
    pub fn default_for(kind: ExperimentKind) -> Scene {
        match kind {
            ExperimentKind::Ar1Identity => Scene::Ar1Identity(Ar1Scene::default()),
            ExperimentKind::LinearModelPastTarget => {
                Scene::LinearModelPastTarget(LinearModelScene::default())
            }
            ExperimentKind::MultiTargetAr => Scene::MultiTargetAr(MultiTargetScene::default()),
            ExperimentKind::MimoChannelMmse => Scene::MimoChannelMmse(MimoScene::default()),
            ExperimentKind::LmmseDetect => Scene::LmmseDetect(LmmseScene::default()),
            ExperimentKind::MvdrBeam => Scene::MvdrBeam(MvdrScene::default()),
        }
    }

    fn parse(kind: ExperimentKind, value: Value) -> std::result::Result<Scene, serde_json::Error> {
        Ok(match kind {
            ExperimentKind::Ar1Identity => Scene::Ar1Identity(serde_json::from_value(value)?),
            ExperimentKind::LinearModelPastTarget => {
                Scene::LinearModelPastTarget(serde_json::from_value(value)?)
            }
            ExperimentKind::MultiTargetAr => Scene::MultiTargetAr(serde_json::from_value(value)?),
            ExperimentKind::MimoChannelMmse => {
                Scene::MimoChannelMmse(serde_json::from_value(value)?)
            }
            ExperimentKind::LmmseDetect => Scene::LmmseDetect(serde_json::from_value(value)?),
            ExperimentKind::MvdrBeam => Scene::MvdrBeam(serde_json::from_value(value)?),
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: ExperimentKind,
    #[serde(default)]
    scene: Option<Value>,
    #[serde(default)]
    training_lengths: Option<Vec<usize>>,
    #[serde(default)]
    repetitions: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    methods: Option<Vec<String>>,
    #[serde(default)]
    output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub scene: Scene,
    pub training_lengths: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub methods: Vec<String>,
    pub output: Option<PathBuf>,
}

fn config_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(e.to_string())
}

impl ExperimentConfig {
    /// Config with every default for the experiment.
    pub fn defaults(kind: ExperimentKind) -> Self {
        Self {
            experiment: kind,
            scene: Scene::default_for(kind),
            training_lengths: kind.default_training_lengths(),
            repetitions: DEFAULT_REPETITIONS,
            seed: DEFAULT_SEED,
            methods: method_table(kind)
                .iter()
                .map(|m| m.name.to_string())
                .collect(),
            output: None,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(config_err)?;
        let mut cfg = Self::defaults(raw.experiment);
        if let Some(scene) = raw.scene {
            cfg.scene = Scene::parse(raw.experiment, scene)
                .map_err(|e| config_err(format!("scene: {e}")))?;
        }
        if let Some(t) = raw.training_lengths {
            cfg.training_lengths = t;
        }
        if let Some(r) = raw.repetitions {
            cfg.repetitions = r;
        }
        if let Some(s) = raw.seed {
            cfg.seed = s;
        }
        if let Some(m) = raw.methods {
            cfg.methods = m;
        }
        cfg.output = raw.output;
        cfg.validate()?;
        Ok(cfg)
    }

    /// JSON form accepted back by [`ExperimentConfig::from_json_str`].
    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(config_err)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json_str(&text)
    }

    /// Resolved method descriptors, in config order.
    pub fn method_infos(&self) -> Result<Vec<&'static MethodInfo>> {
        let table = method_table(self.experiment);
        self.methods
            .iter()
            .map(|name| {
                table.iter().find(|m| m.name == name).ok_or_else(|| {
                    let available: Vec<&str> = table.iter().map(|m| m.name).collect();
                    HarnessError::Config(format!(
                        "unknown method '{name}' for {}; available: {}",
                        self.experiment.name(),
                        available.join(", ")
                    ))
                })
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(config_err("repetitions must be at least 1"));
        }
        if self.training_lengths.is_empty() {
            return Err(config_err("training_lengths is empty"));
        }
        if self.methods.is_empty() {
            return Err(config_err("methods is empty"));
        }
        let infos = self.method_infos()?;
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = self.methods.iter().find(|m| !seen.insert(m.as_str())) {
            return Err(config_err(format!("method '{dup}' listed twice")));
        }
        let min_t = self.training_lengths.iter().copied().min().unwrap_or(0);
        if min_t == 0 {
            return Err(config_err("training lengths must be positive"));
        }
        if let Some(m) = infos.iter().find(|m| m.loocv) {
            if min_t < MIN_LOOCV_SAMPLES {
                return Err(config_err(format!(
                    "method '{}' needs training lengths >= {MIN_LOOCV_SAMPLES}, got {min_t}",
                    m.name
                )));
            }
        }
        self.validate_scene(min_t)
    }

    fn validate_scene(&self, min_t: usize) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_err(format!(
                    "scene.{name} must be positive and finite, got {v}"
                )))
            }
        };
        let dim = |name: &str, v: usize, least: usize| {
            if v >= least {
                Ok(())
            } else {
                Err(config_err(format!(
                    "scene.{name} must be at least {least}, got {v}"
                )))
            }
        };
        let ar = |name: &str, r: f64| {
            if r.is_finite() && r.abs() < 1.0 {
                Ok(())
            } else {
                Err(config_err(format!(
                    "scene.{name} must have magnitude below 1, got {r}"
                )))
            }
        };
        match &self.scene {
            Scene::Ar1Identity(s) => {
                dim("n", s.n, 2)?;
                ar("r", s.r)
            }
            Scene::MultiTargetAr(s) => {
                dim("n", s.n, 2)?;
                ar("r", s.r)
            }
            Scene::LinearModelPastTarget(s) => {
                dim("n", s.n, 2)?;
                dim("m", s.m, 1)?;
                positive("sigma2", s.sigma2)?;
                if !(s.past_perturbation_variance >= 0.0
                    && s.past_perturbation_variance.is_finite())
                {
                    return Err(config_err(
                        "scene.past_perturbation_variance must be nonnegative",
                    ));
                }
                Ok(())
            }
            Scene::MimoChannelMmse(s) => {
                dim("n_t", s.n_t, 1)?;
                dim("n_r", s.n_r, 1)?;
                dim("test_channels", s.test_channels, 1)?;
                if s.n_t * s.n_r < 2 {
                    return Err(config_err("scene.n_t * scene.n_r must be at least 2"));
                }
                if !s.pilot_snr_db.is_finite() {
                    return Err(config_err("scene.pilot_snr_db must be finite"));
                }
                // Drift may push a coefficient up to sqrt(2) * half_width further out.
                for (name, p) in [("r_t", s.r_t), ("r_r", s.r_r)] {
                    if !(p.magnitude.is_finite() && p.phase_over_pi.is_finite()) {
                        return Err(config_err(format!("scene.{name} must be finite")));
                    }
                    if p.magnitude + std::f64::consts::SQRT_2 * s.past_half_width.abs()
                        >= 1.0 + 1e-12
                    {
                        return Err(config_err(format!(
                            "scene.{name} magnitude plus past drift must stay below 1"
                        )));
                    }
                }
                if !(s.past_half_width >= 0.0) {
                    return Err(config_err("scene.past_half_width must be nonnegative"));
                }
                Ok(())
            }
            Scene::LmmseDetect(s) => {
                dim("n", s.n, 1)?;
                dim("m", s.m, 1)?;
                dim("test_symbols", s.test_symbols, 1)?;
                positive("h_variance", s.h_variance)?;
                positive("sigma2", s.sigma2)?;
                if min_t <= s.m + 1 {
                    return Err(config_err(format!(
                        "LmmseDetect needs training lengths above m + 1 = {}, got {min_t}",
                        s.m + 1
                    )));
                }
                Ok(())
            }
            Scene::MvdrBeam(s) => {
                dim("n", s.n, 2)?;
                for v in [s.inr_db, s.noise_db, s.aoa_error_degrees] {
                    if !v.is_finite() {
                        return Err(config_err("scene powers and AoA error must be finite"));
                    }
                }
                if s.interferer_degrees.iter().any(|a| !a.is_finite()) {
                    return Err(config_err("scene.interferer_degrees must be finite"));
                }
                if s.aoa_error_degrees < 0.0 {
                    return Err(config_err("scene.aoa_error_degrees must be nonnegative"));
                }
                Ok(())
            }
        }
    }
}
