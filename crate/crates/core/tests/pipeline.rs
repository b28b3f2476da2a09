use std::collections::BTreeSet;
use std::path::Path;

use rdopt::config::PipelineConfig;
use rdopt::moo::Formulation;
use rdopt::pipeline::{run_pipeline, Pipeline, Stage};

fn small(problem: &str, out: &Path) -> PipelineConfig {
    let mut c = PipelineConfig::for_problem(problem);
    c.out = Some(out.to_path_buf());
    c.seed = 11;
    c.doe.size = 30;
    c.doe.train = 24;
    c.surrogate.restarts = 2;
    c.sensitivity.n_base = 128;
    c.optimize.population = 16;
    c.optimize.generations = 8;
    c.robust.n_expectation = 16;
    c.robust.n_posterior = 32;
    c.robust.inner_particles = 6;
    c.robust.inner_iterations = 6;
    c
}

fn listing(dir: &Path) -> BTreeSet<String> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect()
}

#[test]
fn robust_1d_run_lists_fronts_posteriors_and_zones() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small("robust_1d", dir.path());
    c.optimize.formulations = vec![Formulation::Deterministic, Formulation::Expectation];
    let m = run_pipeline(&c).unwrap();
    for f in [
        "front_deterministic.csv",
        "front_expectation.csv",
        "posterior_deterministic.csv",
        "posterior_expectation.csv",
        "zones_expectation_vs_deterministic.csv",
        "boxplot_expectation_vs_deterministic.svg",
        "nrmse.csv",
        "uncertain.csv",
        "manifest.json",
    ] {
        assert!(m.files.contains(&f.to_string()), "{f} not in manifest");
    }
    assert_eq!(m.comparisons, vec!["expectation_vs_deterministic"]);
    assert_eq!(m.uncertain, vec!["x1"]);
    assert_eq!(m.fronts.len(), 2);
    assert!(m.nrmse.contains_key("f"));
    assert_eq!(m.stages.len(), 6);
    // every file on disk is referenced and every reference exists
    let on_disk = listing(dir.path());
    let listed: BTreeSet<String> = m.files.iter().cloned().collect();
    assert_eq!(on_disk, listed);
}

#[test]
fn reruns_and_resumes_reproduce_every_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = run_pipeline(&small("quadratic", a.path())).unwrap();
    let mb = run_pipeline(&small("quadratic", b.path())).unwrap();
    assert_eq!(ma.files, mb.files);
    let csvs: Vec<&String> = ma.files.iter().filter(|f| f.ends_with(".csv")).collect();
    assert!(csvs.len() > 10);
    for f in &csvs {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }

    // resuming from optimize rebuilds the same fronts from the persisted inputs
    let p = Pipeline::new(small("quadratic", b.path())).unwrap();
    std::fs::remove_file(b.path().join("front_expectation.csv")).unwrap();
    let resumed = p.run_from(Stage::Optimize).unwrap();
    assert_eq!(resumed.files, ma.files);
    for f in &csvs {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn a_different_seed_changes_the_doe() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let p = Pipeline::new(small("quadratic", a.path())).unwrap();
    p.run_stage(Stage::Doe).unwrap();
    let mut c = small("quadratic", b.path());
    c.seed = 12;
    Pipeline::new(c).unwrap().run_stage(Stage::Doe).unwrap();
    assert_ne!(std::fs::read(a.path().join("doe.csv")).unwrap(), std::fs::read(b.path().join("doe.csv")).unwrap());
}

#[test]
fn svg_outputs_are_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small("motor_synthetic", dir.path());
    c.doe.size = 60;
    c.doe.train = 45;
    c.zones.targets = vec![430.0, 440.0, 450.0];
    c.zones.tol = 2.0;
    let m = run_pipeline(&c).unwrap();
    let svgs: Vec<&String> = m.files.iter().filter(|f| f.ends_with(".svg")).collect();
    for want in ["front_expectation.svg", "front_worst_case.svg", "sobol_ripple_like.svg", "boxplot_worst_case_vs_deterministic.svg"] {
        assert!(svgs.iter().any(|f| *f == want), "{want} missing");
    }
    for f in svgs {
        let text = std::fs::read_to_string(dir.path().join(f)).unwrap();
        roxmltree::Document::parse(&text).unwrap_or_else(|e| panic!("{f}: {e}"));
    }
    let front = std::fs::read_to_string(dir.path().join("front_expectation.svg")).unwrap();
    assert!(front.contains("torque_like [N·m]") && front.contains("ripple_like [%]"));
}

#[test]
fn failing_stage_keeps_earlier_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let p = Pipeline::new(small("quadratic", dir.path())).unwrap();
    p.run_stage(Stage::Doe).unwrap();
    std::fs::write(dir.path().join("train.csv"), "x1,x2,f\n1,2\n").unwrap();
    let err = p.run_from(Stage::Fit).unwrap_err();
    assert!(matches!(err, rdopt::Error::Stage { ref stage, .. } if stage == "fit"), "{err}");
    assert!(dir.path().join("doe.csv").exists());
    let m = rdopt::pipeline::Manifest::load(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(m.stages.len(), 1);
}
