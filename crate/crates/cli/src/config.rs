//! JSON experiment configs and the shared growth-data inputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use embodykit_core::data;
use embodykit_core::growth::{BodyTemplate, GrowthCurve, MeasurementSamples};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Reads a config file, or returns the defaults when no path is given.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            parse_config(&text).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("{}: {m}", p.display())),
                other => other,
            })
        }
    }
}

pub fn parse_config<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

/// Where growth tables and the body template come from. Left empty, the
/// bundled defaults are used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyData {
    /// Measurement name to `age_months,value` CSV path. When present it
    /// replaces the bundled tables entirely.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tables: Option<BTreeMap<String, PathBuf>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<PathBuf>,
}

pub struct LoadedBody {
    pub tables: BTreeMap<String, MeasurementSamples>,
    pub curves: BTreeMap<String, GrowthCurve>,
    pub template: BodyTemplate,
}

impl BodyData {
    pub fn load(&self) -> CliResult<LoadedBody> {
        let tables = match &self.tables {
            None => data::default_growth_tables()?,
            Some(paths) => {
                let mut tables = BTreeMap::new();
                for (name, path) in paths {
                    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                    let samples = MeasurementSamples::from_csv(name.clone(), &text)
                        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                    tables.insert(name.clone(), samples);
                }
                tables
            }
        };
        for required in [data::HEIGHT, data::HEAD_CIRCUMFERENCE] {
            if !tables.contains_key(required) {
                return Err(CliError::Config(format!("missing growth table `{required}`")));
            }
        }
        let template = match &self.template {
            None => data::default_template()?,
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                BodyTemplate::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
        };
        let curves = data::fit_curves(&tables)?;
        for m in template.measurements() {
            if !curves.contains_key(m) {
                return Err(CliError::Config(format!(
                    "template needs measurement `{m}` but no table provides it"
                )));
            }
        }
        Ok(LoadedBody {
            tables,
            curves,
            template,
        })
    }
}

/// Creates `dir` and writes `name` inside it.
pub fn write_artifact(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, Default, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Demo {
        #[serde(default)]
        x: u32,
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        assert!(matches!(parse_config::<Demo>(r#"{"y": 1}"#), Err(CliError::Config(_))));
        assert_eq!(parse_config::<Demo>(r#"{"x": 3}"#).unwrap().x, 3);
    }

    #[test]
    fn missing_table_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        std::fs::write(&path, data::HEIGHT_CSV).unwrap();
        let cfg = BodyData {
            tables: Some(BTreeMap::from([("height".to_string(), path)])),
            template: None,
        };
        assert!(matches!(cfg.load(), Err(CliError::Config(_))));
    }

    #[test]
    fn missing_file_is_io_error_with_path() {
        let err = load_config::<Demo>(Some(Path::new("/nonexistent/cfg.json"))).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("/nonexistent/cfg.json"));
    }
}
