use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fracwave(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracwave"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn groundstate_writes_snapshot_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracwave(&["groundstate", "--s", "0.8", "--sigma", "1", "--c", "1"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let base = dir.path().join("out/groundstate");
    let snapshot = fs::read_to_string(base.join("u0.txt")).unwrap();
    assert!(snapshot.starts_with("# fracwave-field v1 J=1024 L=10 s=0.8 sigma=1 t=0"));
    let sidecar = fs::read_to_string(base.join("u0.sidecar.csv")).unwrap();
    let mut lines = sidecar.lines();
    assert_eq!(lines.next().unwrap(), "lambda,energy_J,energy_K,iterations,residual,converged");
    let lambda: f64 = lines.next().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(lambda > 0.0);
    assert!(base.join("manifest.txt").exists());

    let diag = fracwave(&["diag", "out/groundstate/u0.txt"], dir.path());
    assert_eq!(code(&diag), 0);
    let text = String::from_utf8(diag.stdout).unwrap();
    let mass: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("mass="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn reproduce_lambda_vs_c_writes_one_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracwave(&["reproduce", "LambdaVsC", "--param", "J=256"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csvs: Vec<_> = fs::read_dir(dir.path().join("out/LambdaVsC"))
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension().is_some_and(|x| x == "csv")).then_some(p)
        })
        .collect();
    assert_eq!(csvs.len(), 1);
    assert_eq!(fs::read_to_string(&csvs[0]).unwrap().lines().count(), 11);
}

#[test]
fn supercritical_perturbation_blows_up() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracwave(
        &["evolve", "--init", "groundstate", "--s", "0.5", "--sigma", "1", "--perturb-scale", "2.0"],
        dir.path(),
    );
    assert_eq!(code(&out), 4);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("blow-up detected at t="), "{err}");
    assert!(dir.path().join("out/evolve/timeseries.csv").exists());
}

#[test]
fn invalid_configuration_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["groundstate", "--s", "1.5"][..],
        &["groundstate", "--J", "1023"],
        &["reproduce", "NoSuchStudy"],
        &["reproduce", "SSweep", "--param", "bogus=1"],
        &["evolve", "--bogus-flag"],
        &["diag", "missing.txt"],
    ] {
        let out = fracwave(args, dir.path());
        assert_ne!(code(&out), 0, "{args:?}");
        assert!(!out.stderr.is_empty());
        if args[0] != "diag" {
            assert_eq!(code(&out), 2, "{args:?}");
        }
    }
}

#[test]
fn iteration_cap_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracwave(&["groundstate", "--J", "128", "--max-iters", "3"], dir.path());
    assert_eq!(code(&out), 3);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.json"), r#"{"s": 0.6, "J": 128, "t_end": 0.05, "out": "cfgrun"}"#).unwrap();
    let out = fracwave(
        &["evolve", "--config", "run.json", "--init", "gaussian", "--s", "0.9"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = fs::read_to_string(dir.path().join("cfgrun/manifest.txt")).unwrap();
    assert!(manifest.contains("s=0.9"), "{manifest}");
    assert!(manifest.contains("J=128"));
    assert!(manifest.contains("t-end=0.05"));
    let final_snap = fs::read_to_string(dir.path().join("cfgrun/final.txt")).unwrap();
    assert!(final_snap.starts_with("# fracwave-field v1 J=128 L=10 s=0.9 sigma=1 t=0.05"));
}

#[test]
fn identical_argv_gives_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        let o = fracwave(
            &["evolve", "--init", "gaussian", "--J", "128", "--t-end", "0.2", "--phase-k", "1", "--out", out],
            dir.path(),
        );
        assert_eq!(code(&o), 0);
        fs::read(dir.path().join(out).join("timeseries.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}
