//! JSON scenario configuration.
//!
//! A document names a `scenario`; every other key is optional and overrides
//! that scenario's defaults. Unknown keys are rejected.

use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::scenarios::{ScenarioConfig, ScenarioKind};

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse { line: e.line(), column: e.column(), message: e.to_string() }
}

fn merge(base: &mut Map<String, Value>, user: Map<String, Value>, path: &str) -> Result<()> {
    for (key, value) in user {
        let full = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
        match base.get_mut(&key) {
            None => return Err(Error::Config(format!("unknown key `{full}`"))),
            Some(Value::Object(inner)) => match value {
                Value::Object(u) => merge(inner, u, &full)?,
                other => return Err(Error::Config(format!("`{full}` must be an object, got {other}"))),
            },
            Some(slot) => *slot = value,
        }
    }
    Ok(())
}

/// Sets `path` (dot separated, e.g. `gains.gamma`) to `raw`, which is read
/// as JSON when possible and as a bare string otherwise.
pub fn apply_override(doc: &mut Value, path: &str, raw: &str) -> Result<()> {
    let value = serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cursor = doc;
    for part in path.split('.') {
        cursor = match cursor {
            Value::Object(m) => m
                .get_mut(part)
                .ok_or_else(|| Error::Config(format!("override `{path}` does not name a configuration key")))?,
            _ => return Err(Error::Config(format!("override `{path}` does not name a configuration key"))),
        };
    }
    *cursor = value;
    Ok(())
}

/// Splits `key=value`.
pub fn split_override(arg: &str) -> Result<(String, String)> {
    arg.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| Error::Config(format!("override `{arg}` is not of the form key=value")))
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    parse_config_with(text, &[])
}

/// Parses a configuration document, fills defaults, applies `overrides` and
/// validates the result.
pub fn parse_config_with(text: &str, overrides: &[(String, String)]) -> Result<ScenarioConfig> {
    let user: Value = serde_json::from_str(text).map_err(parse_error)?;
    let Value::Object(user) = user else {
        return Err(Error::Config("configuration must be a JSON object".into()));
    };
    let kind = match user.get("scenario") {
        Some(Value::String(s)) => {
            ScenarioKind::from_name(s).ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))?
        }
        Some(other) => return Err(Error::Config(format!("`scenario` must be a string, got {other}"))),
        None => return Err(Error::Config("missing `scenario`".into())),
    };
    let Value::Object(mut doc) = serde_json::to_value(ScenarioConfig::defaults(kind))? else {
        unreachable!("config serializes to an object");
    };
    merge(&mut doc, user, "")?;
    let mut doc = Value::Object(doc);
    for (k, v) in overrides {
        apply_override(&mut doc, k, v)?;
    }
    let cfg: ScenarioConfig = serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn config_to_json(cfg: &ScenarioConfig) -> Result<String> {
    Ok(serde_json::to_string_pretty(cfg)?)
}

/// Resolves `name_or_path` as a built-in scenario name first, then as a file.
pub fn load_config(name_or_path: &str, overrides: &[(String, String)]) -> Result<ScenarioConfig> {
    if ScenarioKind::from_name(name_or_path).is_some() {
        let text = serde_json::json!({ "scenario": name_or_path }).to_string();
        return parse_config_with(&text, overrides);
    }
    let text = std::fs::read_to_string(Path::new(name_or_path))?;
    parse_config_with(&text, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = parse_config(r#"{"scenario":"example4"}"#).unwrap();
        assert_eq!(cfg, ScenarioConfig::defaults(ScenarioKind::Example4));
    }

    #[test]
    fn bad_beta_names_the_bound() {
        let err = parse_config(r#"{"scenario":"example4","gains":{"beta":1.5}}"#).unwrap_err();
        assert!(err.to_string().contains("beta ∈ (0,1]"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(r#"{"scenario":"example4","gains":{"betta":0.5}}"#).unwrap_err();
        assert!(err.to_string().contains("gains.betta"), "{err}");
        assert!(parse_config(r#"{"scenario":"example9"}"#).is_err());
        assert!(parse_config(r#"{"horizon": 3}"#).is_err());
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_config("{\n  \"scenario\": \"example4\",\n  oops\n}") {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn overrides() {
        let ov = vec![split_override("gains.gamma=0.25").unwrap(), split_override("name=run-a").unwrap()];
        let cfg = parse_config_with(r#"{"scenario":"example4"}"#, &ov).unwrap();
        assert_eq!(cfg.gains.gamma, 0.25);
        assert_eq!(cfg.name, "run-a");
        let bad = vec![split_override("gains.nope=1").unwrap()];
        assert!(parse_config_with(r#"{"scenario":"example4"}"#, &bad).is_err());
        assert!(split_override("novalue").is_err());
    }

    #[test]
    fn round_trip_defaults() {
        for kind in ScenarioKind::ALL {
            let cfg = ScenarioConfig::defaults(kind);
            assert_eq!(parse_config(&config_to_json(&cfg).unwrap()).unwrap(), cfg);
        }
    }
}
