//! Method registry for each experiment.

use crate::config::ExperimentKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MethodInfo {
    pub name: &'static str,
    pub description: &'static str,
    /// Needs leave-one-out statistics (directly or through its target),
    /// hence at least three samples.
    pub loocv: bool,
}

const fn m(name: &'static str, loocv: bool, description: &'static str) -> MethodInfo {
    MethodInfo {
        name,
        description,
        loocv,
    }
}

const AR1: &[MethodInfo] = &[
    m("scm", false, "sample covariance matrix"),
    m(
        "oracle",
        false,
        "oracle rho, tau toward the scaled identity",
    ),
    m("oracle-convex", false, "oracle with rho + tau = 1"),
    m("loocv", true, "LOOCV toward the scaled identity"),
    m("loocv-convex", true, "LOOCV with rho + tau = 1"),
    m("lw", false, "Ledoit-Wolf"),
    m(
        "glc",
        false,
        "general linear combination toward the scaled identity",
    ),
    m("oas", false, "oracle-approximating shrinkage"),
];

const LINEAR: &[MethodInfo] = &[
    m("scm", false, "sample covariance matrix"),
    m("past-target", true, "knowledge-aided target alone"),
    m(
        "oracle-identity",
        false,
        "oracle toward the scaled identity",
    ),
    m("loocv-identity", true, "LOOCV toward the scaled identity"),
    m(
        "oracle-past",
        true,
        "oracle toward the knowledge-aided target",
    ),
    m(
        "loocv-past",
        true,
        "LOOCV toward the knowledge-aided target",
    ),
    m(
        "loocv-past-convex",
        true,
        "LOOCV toward the knowledge-aided target with rho + tau = 1",
    ),
    m(
        "glc-past",
        true,
        "general linear combination toward the knowledge-aided target",
    ),
];

const MULTI: &[MethodInfo] = &[
    m("scm", false, "sample covariance matrix"),
    m(
        "loocv-identity",
        true,
        "single-target LOOCV toward the scaled identity",
    ),
    m("oracle-mt", false, "three-target oracle"),
    m(
        "oracle-mt-convex",
        false,
        "three-target oracle with rho + sum tau = 1",
    ),
    m("loocv-mt", true, "three-target LOOCV"),
    m(
        "loocv-mt-convex",
        true,
        "three-target LOOCV with rho + sum tau = 1",
    ),
];

const MIMO: &[MethodInfo] = &[
    m("ls", false, "least-squares channel estimate"),
    m("mmse-true", false, "MMSE with the true channel covariance"),
    m("mmse-scm", false, "MMSE with the SCM of LS estimates"),
    m(
        "mmse-loocv-identity",
        true,
        "MMSE with LOOCV shrinkage toward the scaled identity",
    ),
    m(
        "mmse-loocv-past",
        true,
        "MMSE with LOOCV shrinkage toward the past estimate",
    ),
    m(
        "mmse-loocv-mt",
        true,
        "MMSE with two-target LOOCV shrinkage (identity and past)",
    ),
];

const LMMSE: &[MethodInfo] = &[
    m(
        "lmmse-true",
        false,
        "LMMSE with the true channel and covariance",
    ),
    m("ols", false, "plug-in LMMSE with the OLS covariance"),
    m(
        "oracle-diag",
        false,
        "OLS covariance shrunk toward its diagonal, oracle coefficients",
    ),
    m(
        "loocv-diag",
        true,
        "OLS covariance shrunk toward its diagonal, LOOCV coefficients",
    ),
    m(
        "loocv-diag-convex",
        true,
        "as loocv-diag with rho + tau = 1",
    ),
];

const MVDR: &[MethodInfo] = &[
    m("scm-pinv", false, "MVDR with the SCM pseudo-inverse"),
    m("true-cov", false, "MVDR with the true covariance"),
    m(
        "loocv",
        true,
        "MVDR with LOOCV shrinkage toward the scaled identity",
    ),
    m("loocv-convex", true, "as loocv with rho + tau = 1"),
    m("oas", false, "MVDR with OAS shrinkage"),
    m(
        "glc",
        false,
        "MVDR with GLC shrinkage toward the scaled identity",
    ),
    m("lw", false, "MVDR with Ledoit-Wolf shrinkage"),
];

pub fn method_table(kind: ExperimentKind) -> &'static [MethodInfo] {
    match kind {
        ExperimentKind::Ar1Identity => AR1,
        ExperimentKind::LinearModelPastTarget => LINEAR,
        ExperimentKind::MultiTargetAr => MULTI,
        ExperimentKind::MimoChannelMmse => MIMO,
        ExperimentKind::LmmseDetect => LMMSE,
        ExperimentKind::MvdrBeam => MVDR,
    }
}

/// Name of the metric reported by an experiment.
pub fn metric_name(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Ar1Identity
        | ExperimentKind::LinearModelPastTarget
        | ExperimentKind::MultiTargetAr => "nmse_sigma",
        ExperimentKind::MimoChannelMmse => "nmse_h",
        ExperimentKind::LmmseDetect => "nmse_x",
        ExperimentKind::MvdrBeam => "sinr_db",
    }
}
