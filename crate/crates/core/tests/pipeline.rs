use std::fs;

use cctskit::fixtures::write_mini_gulf;
use cctskit::pipeline::{run, Stage};
use cctskit::scenario::Scenario;
use cctskit::Error;

fn scenario(dir: &std::path::Path) -> Scenario {
    write_mini_gulf(dir).unwrap();
    Scenario::load(&dir.join("scenario.toml")).unwrap()
}

#[test]
fn stage_needs_upstream_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path());
    match run(&sc, Stage::SolveShared) {
        Err(Error::MissingArtifact { stage, upstream, .. }) => {
            assert_eq!(stage, "solve-shared");
            assert_eq!(upstream, "route");
        }
        other => panic!("expected a missing artifact, got {other:?}"),
    }
}

#[test]
fn missing_input_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    write_mini_gulf(dir.path()).unwrap();
    fs::remove_file(dir.path().join("formations.csv")).unwrap();
    let err = Scenario::load(&dir.path().join("scenario.toml")).unwrap_err();
    assert!(err.to_string().contains("formations"), "{err}");
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write_mini_gulf(dir.path()).unwrap();
    let path = dir.path().join("scenario.toml");
    let text = fs::read_to_string(&path).unwrap().replace("[network]\n", "[network]\ntargte = 3.0\n");
    fs::write(&path, text).unwrap();
    assert!(Scenario::load(&path).is_err());
}

#[test]
fn stages_rerun_identically_and_infeasible_target_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut sc = scenario(dir.path());
    for s in [Stage::Capture, Stage::Screen, Stage::Characterize, Stage::Surface, Stage::Route] {
        run(&sc, s).unwrap();
    }
    let out = sc.output_path();
    let first = fs::read(out.join("storage_sites.csv")).unwrap();
    run(&sc, Stage::Characterize).unwrap();
    assert_eq!(first, fs::read(out.join("storage_sites.csv")).unwrap());

    sc.network.target = 1.0e4;
    match run(&sc, Stage::SolveShared) {
        Err(Error::Infeasible(report)) => assert!(report.required_mt_y > report.available_mt_y),
        other => panic!("expected infeasible, got {other:?}"),
    }
    assert!(out.join("infeasibility.json").is_file());
}
