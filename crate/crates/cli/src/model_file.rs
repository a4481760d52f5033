//! Resolving `--model`: a builtin name or a path to a JSON model file.

use std::path::Path;

use algebroid_core::algebroid::BUILTIN_NAMES;
use algebroid_core::{builtin, AlgebroidModel};
use serde::Deserialize;

use crate::CliError;

/// An entry of `rho` or `C`: an expression over `x1..xn`, or a bare number.
#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Text(String),
    Number(f64),
}

impl Entry {
    fn source(&self) -> String {
        match self {
            Entry::Text(s) => s.clone(),
            Entry::Number(v) => format!("{v:?}"),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    name: Option<String>,
    n: usize,
    m: usize,
    rho: Vec<Vec<Entry>>,
    #[serde(rename = "C")]
    c: Vec<Vec<Vec<Entry>>>,
}

pub fn parse_model_json(text: &str, fallback_name: &str) -> Result<AlgebroidModel, CliError> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("model file: {e}")))?;
    let rho: Vec<Vec<String>> = file.rho.iter().map(|r| r.iter().map(Entry::source).collect()).collect();
    let c: Vec<Vec<Vec<String>>> = file
        .c
        .iter()
        .map(|b| b.iter().map(|r| r.iter().map(Entry::source).collect()).collect())
        .collect();
    let name = file.name.as_deref().unwrap_or(fallback_name);
    AlgebroidModel::from_sources(name, file.n, file.m, &rho, &c).map_err(|e| CliError::Config(e.to_string()))
}

/// Builtin names take precedence over files of the same name.
pub fn load_model(spec: &str) -> Result<AlgebroidModel, CliError> {
    if BUILTIN_NAMES.contains(&spec) {
        return builtin(spec).map_err(|e| CliError::Config(e.to_string()));
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(CliError::Config(format!(
            "unknown model `{spec}` (builtins: {}; or a path to a JSON model file)",
            BUILTIN_NAMES.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{spec}: {e}")))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(spec);
    parse_model_json(&text, stem)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn so3_from_json_matches_builtin() {
        let text = r#"{
            "name": "my_so3", "n": 0, "m": 3, "rho": [],
            "C": [
                [[0, 0, 0], [0, 0, 1], [0, -1, 0]],
                [[0, 0, -1], [0, 0, 0], [1, 0, 0]],
                [[0, 1, 0], [-1, 0, 0], [0, 0, 0]]
            ]
        }"#;
        let m = parse_model_json(text, "x").unwrap();
        assert_eq!(m.name, "my_so3");
        assert!(m.is_almost_lie());
        let b = builtin("so3").unwrap();
        let e = [0.3, -0.2, 0.9];
        let f = [0.1, 0.5, -0.4];
        let s = algebroid_core::SectionE::constant;
        assert_eq!(m.bracket(&s(&e), &s(&f), &[]).unwrap(), b.bracket(&s(&e), &s(&f), &[]).unwrap());
    }

    #[test]
    fn expressions_and_bad_files() {
        let text = r#"{"n": 1, "m": 1, "rho": [["1 + x1^2"]], "C": [[["0"]]]}"#;
        let m = parse_model_json(text, "stem").unwrap();
        assert_eq!((m.name.as_str(), m.n, m.m), ("stem", 1, 1));
        assert!(parse_model_json(r#"{"n": 1}"#, "x").is_err());
        assert!(parse_model_json(r#"{"n": 1, "m": 1, "rho": [["y1"]], "C": [[["0"]]]}"#, "x").is_err());
        assert!(load_model("nosuch").is_err());
    }
}
