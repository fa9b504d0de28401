//! Reading and writing the JSON and TOML documents shared by models,
//! ensembles and experiment configs. The format follows the file extension
//! (`.toml`, otherwise JSON).

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Toml,
}

impl Format {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("toml") => Format::Toml,
            _ => Format::Json,
        }
    }
}

pub fn parse_str<T: DeserializeOwned>(text: &str, format: Format, label: &str) -> Result<T, DocumentError> {
    let parsed = match format {
        Format::Json => serde_json::from_str(text).map_err(|e| e.to_string()),
        Format::Toml => toml::from_str(text).map_err(|e| e.to_string()),
    };
    parsed.map_err(|message| DocumentError::Parse { path: label.into(), message })
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, DocumentError> {
    let label = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| DocumentError::Io { path: label.clone(), source })?;
    parse_str(&text, Format::from_path(path), &label)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<(), DocumentError> {
    fs::write(path, to_json(value)).map_err(|source| DocumentError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyModel;

    #[test]
    fn json_and_toml_agree() {
        let json = r#"{"dim": 4, "components": [{"kind": "atom", "axis": "all", "position": 1.0, "mass": 0.5}]}"#;
        let toml = "dim = 4\n[[components]]\nkind = \"atom\"\naxis = \"all\"\nposition = 1.0\nmass = 0.5\n";
        let a: LevyModel = parse_str(json, Format::Json, "a").unwrap();
        let b: LevyModel = parse_str(toml, Format::Toml, "b").unwrap();
        assert_eq!(a, b);
        assert!(matches!(parse_str::<LevyModel>("{", Format::Json, "c"), Err(DocumentError::Parse { .. })));
    }
}
