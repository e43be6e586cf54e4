//! `--config` files: their keys become flags inserted ahead of the user's,
//! so explicit flags override file values.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use serde_json::Value;

const SUBCOMMANDS: [&str; 4] = ["groundstate", "evolve", "reproduce", "diag"];

/// Flags that take no value.
const SWITCHES: [&str; 1] = ["paper-scale"];

/// Keys accepted by `reproduce` itself; anything else becomes `--param`.
const REPRODUCE_KEYS: [&str; 4] = ["paper-scale", "param", "out", "jobs"];

#[derive(Debug, thiserror::Error)]
pub enum OverlayError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Syntax { path: String, message: String },
    #[error("--config needs a path")]
    MissingPath,
}

fn config_path(argv: &[OsString]) -> Result<Option<OsString>, OverlayError> {
    let mut it = argv.iter().skip(1);
    while let Some(arg) = it.next() {
        let text = arg.to_string_lossy();
        if text == "--config" {
            return it.next().cloned().map(Some).ok_or(OverlayError::MissingPath);
        }
        if let Some(p) = text.strip_prefix("--config=") {
            return Ok(Some(p.into()));
        }
    }
    Ok(None)
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar_text).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

/// Parses `key=value` lines or a JSON object into ordered pairs.
pub fn parse_config(text: &str, path: &str) -> Result<Vec<(String, String)>, OverlayError> {
    let syntax = |message: String| OverlayError::Syntax {
        path: path.to_string(),
        message,
    };
    if text.trim_start().starts_with('{') {
        let value: Value = serde_json::from_str(text).map_err(|e| syntax(e.to_string()))?;
        let Value::Object(map) = value else {
            return Err(syntax("expected a JSON object".into()));
        };
        return Ok(map.iter().map(|(k, v)| (k.clone(), scalar_text(v))).collect());
    }
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| syntax(format!("line {}: expected key=value", n + 1)))?;
        let v = v.trim().trim_matches('"');
        pairs.push((k.trim().to_string(), v.to_string()));
    }
    Ok(pairs)
}

fn flag_tokens(subcommand: &str, pairs: &[(String, String)]) -> Vec<OsString> {
    let mut out = Vec::new();
    for (key, value) in pairs {
        let key = key.trim_start_matches('-').replace('_', "-");
        if subcommand == "reproduce" && !REPRODUCE_KEYS.contains(&key.as_str()) {
            out.push("--param".into());
            out.push(format!("{key}={value}").into());
            continue;
        }
        if SWITCHES.contains(&key.as_str()) {
            if value == "true" || value == "1" {
                out.push(format!("--{key}").into());
            }
            continue;
        }
        out.push(format!("--{key}={value}").into());
    }
    out
}

/// Returns `argv` with the config file's flags spliced in right after the
/// subcommand name.
pub fn apply(argv: Vec<OsString>) -> Result<Vec<OsString>, OverlayError> {
    let Some(path) = config_path(&argv)? else {
        return Ok(argv);
    };
    let shown = path.to_string_lossy().into_owned();
    let text = fs::read_to_string(Path::new(&path)).map_err(|source| OverlayError::Read {
        path: shown.clone(),
        source,
    })?;
    let pairs = parse_config(&text, &shown)?;
    let Some(pos) = argv
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
    else {
        return Ok(argv);
    };
    let sub = argv[pos].to_string_lossy().into_owned();
    let mut merged = argv[..=pos].to_vec();
    merged.extend(flag_tokens(&sub, &pairs));
    merged.extend_from_slice(&argv[pos + 1..]);
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn flat_and_json_agree() {
        let flat = parse_config("# comment\ns = 0.6\nt_end=2\n\npotential=\"harmonic+sine:a=1\"\n", "f").unwrap();
        let json = parse_config(r#"{"s": 0.6, "t_end": 2, "potential": "harmonic+sine:a=1"}"#, "f").unwrap();
        let mut a = flat.clone();
        let mut b = json.clone();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert!(parse_config("no equals sign", "f").is_err());
        assert!(parse_config("[1, 2]", "f").is_err());
    }

    #[test]
    fn file_flags_precede_user_flags() {
        let tokens = flag_tokens("evolve", &[("t_end".into(), "2".into()), ("s".into(), "0.6".into())]);
        assert_eq!(tokens, os(&["--t-end=2", "--s=0.6"]));
    }

    #[test]
    fn reproduce_routes_study_keys_to_params() {
        let pairs = vec![
            ("paper-scale".to_string(), "true".to_string()),
            ("c".to_string(), "1,0.5".to_string()),
            ("out".to_string(), "dir".to_string()),
        ];
        assert_eq!(
            flag_tokens("reproduce", &pairs),
            os(&["--paper-scale", "--param", "c=1,0.5", "--out=dir"])
        );
        let json = parse_config(r#"{"c": [1, 0.5]}"#, "f").unwrap();
        assert_eq!(json, vec![("c".to_string(), "1,0.5".to_string())]);
    }
}
