use proptest::prelude::*;

use relaxls::dt::Normalization;
use relaxls::io::{config_to_json, parse_config, parse_config_with};
use relaxls::scenarios::{DisturbanceComponent, EstimatorKind, ScenarioConfig, ScenarioKind};
use relaxls::Error;

fn kind() -> impl Strategy<Value = ScenarioKind> {
    prop::sample::select(ScenarioKind::ALL.to_vec())
}

proptest! {
    #[test]
    fn serialized_configs_parse_back(
        kind in kind(),
        gamma in 0.01..1000.0f64,
        f0 in 0.01..10.0f64,
        horizon in 1u32..400,
        seed in any::<u64>(),
        amplitude in 0.0..1.0f64,
        components in prop::sample::subsequence(
            vec![DisturbanceComponent::Y, DisturbanceComponent::Theta, DisturbanceComponent::Phi], 1..=3),
        weighted in any::<bool>(),
    ) {
        let mut cfg = ScenarioConfig::defaults(kind);
        cfg.gains.gamma = gamma;
        cfg.gains.f0 = f0;
        cfg.horizon = horizon as f64;
        cfg.disturbance.seed = seed;
        cfg.disturbance.amplitude = amplitude;
        cfg.disturbance.components = components;
        if weighted {
            cfg.gains.normalization = Normalization::GainWeighted;
        }
        if kind == ScenarioKind::Example8 {
            cfg.switch_at = vec![(horizon as u64 / 2).max(1)];
        }
        let text = config_to_json(&cfg).unwrap();
        prop_assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}

#[test]
fn overrides_reach_nested_keys() {
    let overrides = vec![
        ("gains.gamma".to_string(), "2.5".to_string()),
        ("estimators".to_string(), r#"["lsd","rls"]"#.to_string()),
        ("disturbance.rng".to_string(), "chacha20".to_string()),
    ];
    let cfg = parse_config_with(r#"{"scenario":"example4"}"#, &overrides).unwrap();
    assert_eq!(cfg.gains.gamma, 2.5);
    assert_eq!(cfg.estimators, vec![EstimatorKind::Lsd, EstimatorKind::Rls]);
}

#[test]
fn missing_override_target_is_rejected() {
    let overrides = vec![("gains.nope".to_string(), "1".to_string())];
    assert!(matches!(parse_config_with(r#"{"scenario":"example4"}"#, &overrides), Err(Error::Config(_))));
}

#[test]
fn syntax_error_reports_line() {
    let err = parse_config("{\n  \"scenario\": \"example5\",\n  \"horizon\": ,\n}").unwrap_err();
    match err {
        Error::Parse { line, .. } => assert_eq!(line, 3),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn shipped_configs_are_valid() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        if text.contains("\"scenario\"") {
            parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
