use std::fs;

use fracwave::experiments::{run_experiment, ExperimentId, ExperimentSpec, LegStatus, ParamValue};
use fracwave::parallel::Execution;

fn small(id: ExperimentId, dir: &std::path::Path) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(id, dir);
    spec.set("J", ParamValue::Scalar(256.0)).unwrap();
    spec
}

fn read_all(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn reruns_are_byte_identical_across_execution_modes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut spec = small(ExperimentId::LambdaVsC, a.path());
    spec.set("c", ParamValue::List(vec![1.0, 0.2])).unwrap();
    run_experiment(&spec.clone().with_execution(Execution::Parallel)).unwrap();
    let mut other = spec.with_execution(Execution::Sequential);
    other.out_dir = b.path().to_path_buf();
    run_experiment(&other).unwrap();

    let fa = read_all(a.path());
    let fb = read_all(b.path());
    assert_eq!(fa.len(), fb.len());
    for ((na, ca), (nb, cb)) in fa.iter().zip(&fb) {
        assert_eq!(na, nb);
        if na == "manifest.txt" {
            continue; // records the execution mode
        }
        assert_eq!(ca, cb, "{na} differs");
    }
    let csvs: Vec<_> = fa.iter().filter(|(n, _)| n.ends_with(".csv")).collect();
    assert_eq!(csvs.len(), 1);
    let table = String::from_utf8(csvs[0].1.clone()).unwrap();
    assert_eq!(
        table.lines().next().unwrap(),
        "s,sigma,c,omega,lambda,energy_J,linf,sigma_norm,l2_dist_ref,iterations,converged"
    );
    assert_eq!(table.lines().count(), 5);
}

#[test]
fn manifest_lists_parameters_and_leg_status() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small(ExperimentId::NonSymmetricPotential, dir.path());
    spec.set("a", ParamValue::List(vec![1.0])).unwrap();
    let report = run_experiment(&spec).unwrap();
    assert_eq!(report.legs.len(), 1);
    assert_eq!(report.legs[0].status, LegStatus::Ok);
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    for key in ["experiment=NonSymmetricPotential", "J=256", "L=10", "ngf_tau=0.01", "leg.a=1=ok"] {
        assert!(manifest.contains(key), "manifest lacks {key}:\n{manifest}");
    }
    assert!(manifest.contains("a=1 L=10 J=256 tau=0.01"));
    // the perturbed ground state is not symmetric
    let u = &report.ground_states[0];
    assert!(u.converged);
}

#[test]
fn failed_legs_do_not_abort_the_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small(ExperimentId::SSweep, dir.path());
    spec.set("s", ParamValue::List(vec![0.8, 1.0])).unwrap();
    spec.set("max_iters", ParamValue::Scalar(5.0)).unwrap();
    let report = run_experiment(&spec).unwrap();
    assert!(report.legs.iter().all(|l| l.status == LegStatus::NotConverged));
    assert_eq!(report.ground_states.len(), 2);
    assert!(report.ground_states.iter().all(|r| !r.converged));
}

#[test]
fn blow_up_leg_is_reported_with_partial_series() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small(ExperimentId::BlowUp, dir.path());
    spec.set("J", ParamValue::Scalar(1024.0)).unwrap();
    spec.set("t_end", ParamValue::Scalar(5.0)).unwrap();
    let report = run_experiment(&spec).unwrap();
    let leg = report.evolutions.iter().find(|l| l.name == "blowup").unwrap();
    match leg.status {
        LegStatus::BlowUp { t } => assert!(t < 5.0),
        ref other => panic!("expected blow-up, got {other}"),
    }
    assert!(!leg.records.is_empty());
    assert!(dir.path().join("blowup.timeseries.csv").exists());
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("leg.blowup=blowup t="));
}
