use std::path::Path;
use std::process::{Command, Output};

use shrinkcov::csv_io::{parse_csv, read_csv};

fn shrinkcov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shrinkcov"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_AR: &str = r#"{
  "experiment": "Ar1Identity",
  "scene": { "n": 6, "r": 0.5 },
  "training_lengths": [4, 8],
  "repetitions": 5,
  "seed": 3,
  "methods": ["scm", "loocv", "oas"]
}"#;

#[test]
fn run_writes_sorted_csv_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ar.json", SMALL_AR);
    let out = shrinkcov(&["run", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("experiment,method,T,metric,mean,stderr,reps\n"));
    let rows = parse_csv(&text).unwrap();
    let keys: Vec<(&str, usize)> = rows.iter().map(|r| (r.method.as_str(), r.t)).collect();
    assert_eq!(
        keys,
        [
            ("loocv", 4),
            ("loocv", 8),
            ("oas", 4),
            ("oas", 8),
            ("scm", 4),
            ("scm", 8)
        ]
    );
    assert!(rows.iter().all(|r| r.reps == 5 && r.metric == "nmse_sigma"));
}

#[test]
fn overrides_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ar.json", SMALL_AR);
    let csv = dir.path().join("out.csv");
    let out = shrinkcov(&[
        "run",
        "--config",
        &cfg,
        "--reps",
        "7",
        "--seed",
        "11",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let rows = read_csv(&csv).unwrap();
    assert!(rows.iter().all(|r| r.reps == 7));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    // 8 methods x 13 lengths = 104 rows.
    let cfg = write(
        dir.path(),
        "many.json",
        r#"{"experiment": "Ar1Identity", "scene": {"n": 5}, "repetitions": 4,
            "training_lengths": [3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15]}"#,
    );
    let a = shrinkcov(&["run", "--config", &cfg]);
    let b = shrinkcov(&["run", "--config", &cfg]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(
        parse_csv(std::str::from_utf8(&a.stdout).unwrap())
            .unwrap()
            .len(),
        104
    );
    let c = shrinkcov(&["run", "--config", &cfg, "--seed", "99"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn config_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(
        dir.path(),
        "u.json",
        r#"{"experiment": "Ar1Identity", "methods": ["nope"]}"#,
    );
    let out = shrinkcov(&["run", "--config", &unknown]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nope") && err.contains("loocv"), "{err}");

    let short = write(
        dir.path(),
        "s.json",
        r#"{"experiment": "MvdrBeam", "training_lengths": [2]}"#,
    );
    assert_eq!(
        shrinkcov(&["run", "--config", &short]).status.code(),
        Some(1)
    );

    let garbage = write(dir.path(), "g.json", "{ not json");
    assert_eq!(
        shrinkcov(&["run", "--config", &garbage]).status.code(),
        Some(1)
    );

    assert_eq!(
        shrinkcov(&["run", "--config", &unknown, "--reps", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(shrinkcov(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn io_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let out = shrinkcov(&["run", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));

    let cfg = write(dir.path(), "ar.json", SMALL_AR);
    let bad_out = dir.path().join("no-such-dir").join("out.csv");
    let out = shrinkcov(&["run", "--config", &cfg, "--out", bad_out.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn list_methods_covers_every_experiment() {
    let out = shrinkcov(&["list-methods"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "Ar1Identity",
        "LinearModelPastTarget",
        "MultiTargetAr",
        "MimoChannelMmse",
        "LmmseDetect",
        "MvdrBeam",
    ] {
        assert!(text.lines().any(|l| l == name), "{name}");
    }
    assert!(text.contains("loocv-mt-convex"));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for dir in [root.clone(), root.join("acceptance")] {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "json") {
                shrinkcov::ExperimentConfig::from_file(&path)
                    .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
                count += 1;
            }
        }
    }
    assert_eq!(count, 10);
}
