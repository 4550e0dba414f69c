//! The shipped configuration files.

use std::path::PathBuf;

use hullab_cli::config::{load_config, Config};
use hullab_cli::demo::demo_pipeline;
use hullab_cli::error::CliError;

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

#[test]
fn default_file_matches_builtin_defaults() {
    assert_eq!(load_config(&config_path("default.json")).unwrap(), Config::default());
}

#[test]
fn quick_file_overrides_only_what_it_names() {
    let cfg = load_config(&config_path("quick.json")).unwrap();
    let d = Config::default();
    assert_eq!(cfg.sampling.h, 0.05);
    assert_eq!(cfg.sampling.shrink_h, d.sampling.shrink_h);
    assert_eq!(cfg.search.budget, 8000);
    assert_eq!(cfg.search.seed, d.search.seed);
    assert_eq!(cfg.slice.n, 48);
    assert_eq!(cfg.lp, d.lp);
    cfg.validate().unwrap();
}

#[test]
fn quick_demo_passes_every_stage() {
    let cfg = load_config(&config_path("quick.json")).unwrap();
    let out = tempfile::tempdir().unwrap();
    let report = demo_pipeline(&cfg, out.path()).unwrap();
    assert!(report.pass, "{report}");
    assert_eq!(report.aborted_at, None);
    for name in ["demo.json", "y_sample.csv", "suite.json", "shrink.json"] {
        assert!(out.path().join(name).is_file(), "{name} missing");
    }
}

#[test]
fn typo_is_rejected_with_its_path() {
    match load_config(&config_path("typo.json")) {
        Err(CliError::Usage(msg)) => assert!(msg.contains("sampling.shrinkHh"), "{msg}"),
        other => panic!("expected a usage error, got {other:?}"),
    }
}

#[test]
fn coarse_spacing_stops_the_demo_at_sampling() {
    let cfg = load_config(&config_path("coarse.json")).unwrap();
    let out = tempfile::tempdir().unwrap();
    let report = demo_pipeline(&cfg, out.path()).unwrap();
    assert!(!report.pass);
    assert_eq!(report.aborted_at.as_deref(), Some("sampling"));
    assert!(out.path().join("demo.json").is_file());
}
