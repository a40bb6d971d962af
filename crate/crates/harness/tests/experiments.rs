use shrinkcov::config::{ExperimentConfig, ExperimentKind, Scene};
use shrinkcov::{run_experiment_with, Execution};

fn tiny(kind: ExperimentKind) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(kind);
    cfg.repetitions = 6;
    cfg.seed = 5;
    match &mut cfg.scene {
        Scene::Ar1Identity(s) => s.n = 6,
        Scene::MultiTargetAr(s) => s.n = 6,
        Scene::LinearModelPastTarget(s) => {
            s.n = 6;
            s.m = 3;
        }
        Scene::MimoChannelMmse(s) => {
            s.n_t = 2;
            s.n_r = 2;
            s.test_channels = 3;
        }
        Scene::LmmseDetect(s) => {
            s.n = 6;
            s.m = 2;
            s.test_symbols = 4;
        }
        Scene::MvdrBeam(s) => s.n = 6,
    }
    cfg.training_lengths = match kind {
        ExperimentKind::LmmseDetect => vec![4, 9],
        _ => vec![3, 9],
    };
    cfg
}

#[test]
fn parallel_matches_serial_for_every_experiment() {
    for kind in ExperimentKind::ALL {
        let cfg = tiny(kind);
        let serial = run_experiment_with(&cfg, Execution::Serial).unwrap();
        let parallel = run_experiment_with(&cfg, Execution::Parallel).unwrap();
        assert_eq!(serial, parallel, "{kind:?}");
        assert_eq!(serial.len(), cfg.methods.len() * cfg.training_lengths.len());
        assert!(
            serial.iter().all(|r| r.mean.is_finite() && r.stderr >= 0.0),
            "{kind:?}"
        );
    }
}

#[test]
fn training_free_references_do_not_depend_on_t() {
    // Test data is drawn before the training block, so these rows repeat across T.
    for (kind, names) in [
        (ExperimentKind::LmmseDetect, &["lmmse-true"][..]),
        (ExperimentKind::MimoChannelMmse, &["ls", "mmse-true"][..]),
    ] {
        let rows = run_experiment_with(&tiny(kind), Execution::Serial).unwrap();
        for name in names {
            let means: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == *name)
                .map(|r| r.mean)
                .collect();
            assert_eq!(means.len(), 2);
            assert_eq!(means[0], means[1], "{kind:?} {name}");
        }
    }
}

#[test]
fn true_covariance_mmse_beats_ls() {
    let mut cfg = tiny(ExperimentKind::MimoChannelMmse);
    cfg.repetitions = 40;
    let rows = run_experiment_with(&cfg, Execution::Serial).unwrap();
    let mean = |name: &str| rows.iter().find(|r| r.method == name).unwrap().mean;
    assert!(mean("mmse-true") < mean("ls"));
}

#[test]
fn zero_aoa_error_is_accepted() {
    let mut cfg = tiny(ExperimentKind::MvdrBeam);
    if let Scene::MvdrBeam(s) = &mut cfg.scene {
        s.aoa_error_degrees = 0.0;
    }
    let rows = run_experiment_with(&cfg, Execution::Serial).unwrap();
    assert!(rows.iter().all(|r| r.mean.is_finite()));
}
