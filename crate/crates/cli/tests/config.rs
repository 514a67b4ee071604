use czreach_cli::config::{Experiment, ExperimentConfig, SystemSpec};
use czreach_cli::CliError;

fn field_of(e: CliError) -> String {
    match e {
        CliError::Validation { path, .. } => path,
        other => panic!("expected a validation error, got {other}"),
    }
}

fn lti() -> ExperimentConfig {
    ExperimentConfig::from_json(Experiment::LtiDemo.bundled()).unwrap()
}

#[test]
fn bundled_configs_parse() {
    for e in [
        Experiment::LtiDemo,
        Experiment::PolyModelDemo,
        Experiment::PolyDataDemo,
        Experiment::Verify,
    ] {
        let cfg = ExperimentConfig::from_json(e.bundled()).unwrap();
        assert_eq!(cfg.experiment, e);
        assert_eq!(cfg.schema_version, 1);
    }
    let (phi, gamma) = lti().system.unwrap().lti().unwrap();
    assert_eq!(phi[(0, 0)], 0.9323);
    assert_eq!(gamma[(4, 0)], 0.0476);
}

#[test]
fn missing_noise_set_is_named() {
    let mut cfg = lti();
    cfg.noise_set = None;
    let err = ExperimentConfig::from_json(&cfg.to_json()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert_eq!(field_of(err), "noise_set");
}

#[test]
fn round_trip_is_identity() {
    for e in [Experiment::LtiDemo, Experiment::PolyDataDemo] {
        let cfg = ExperimentConfig::from_json(e.bundled()).unwrap();
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
}

#[test]
fn defaults_apply() {
    let cfg =
        ExperimentConfig::from_json(r#"{"schema_version": 1, "experiment": "verify"}"#).unwrap();
    assert_eq!(cfg.seed, 0);
    assert_eq!(cfg.reduction_order, None);
    assert_eq!(cfg, ExperimentConfig::minimal(Experiment::Verify));
}

#[test]
fn inconsistent_dimensions_are_rejected() {
    let mut cfg = lti();
    cfg.input_set.as_mut().unwrap().c = vec![10.0, 1.0];
    cfg.input_set.as_mut().unwrap().g = vec![vec![0.25], vec![0.0]];
    assert_eq!(field_of(cfg.validate().unwrap_err()), "input_set.c");

    let mut cfg = lti();
    cfg.initial_set.as_mut().unwrap().g.pop();
    assert_eq!(field_of(cfg.validate().unwrap_err()), "initial_set.G");

    let mut cfg = lti();
    cfg.projections = Some(vec![[1, 6]]);
    assert_eq!(field_of(cfg.validate().unwrap_err()), "projections[0]");

    let mut cfg = lti();
    cfg.batch_length = Some(3);
    assert_eq!(field_of(cfg.validate().unwrap_err()), "batch_length");
}

#[test]
fn wrong_system_kind_and_version() {
    let mut cfg = lti();
    cfg.experiment = Experiment::PolyModelDemo;
    assert_eq!(field_of(cfg.validate().unwrap_err()), "system.kind");

    let mut cfg = lti();
    cfg.schema_version = 2;
    assert_eq!(field_of(cfg.validate().unwrap_err()), "schema_version");

    let err =
        ExperimentConfig::from_json(r#"{"schema_version": 1, "experiment": "nope"}"#).unwrap_err();
    assert!(matches!(err, CliError::Parse(_)));
}

#[test]
fn polynomial_system_dimensions() {
    let cfg = ExperimentConfig::from_json(Experiment::PolyModelDemo.bundled()).unwrap();
    let sys = cfg.system.unwrap();
    assert!(matches!(sys, SystemSpec::Polynomial { .. }));
    assert_eq!(sys.dims().unwrap(), (2, 2));
    assert_eq!(sys.basis().unwrap().len(), 5);
}
