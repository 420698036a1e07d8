//! JSON input files describing a test configuration and its chart data.

use std::path::Path;

use serde::Deserialize;

use crate::numeric::{NumericError, Parametrization};
use crate::spectra::{ConfigError, TestConfiguration};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{section} entry {index}: {source}")]
    Chart { section: &'static str, index: usize, source: NumericError },
    #[error("{section} entry {index} has {found} coordinates but there are {expected} variables")]
    ChartLength { section: &'static str, index: usize, expected: usize, found: usize },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub chart_vars: usize,
    pub components: Vec<String>,
    #[serde(default = "one")]
    pub multiplicity: u32,
}

fn one() -> u32 {
    1
}

/// The on-disk form. `cycle` is the central-fiber cycle and `fiber` a
/// parametrization of the general fiber; both are only needed numerically.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub name: String,
    pub variables: Vec<String>,
    pub weights: Vec<i64>,
    #[serde(default)]
    pub generators: Vec<String>,
    #[serde(default)]
    pub fiber: Vec<ChartSpec>,
    #[serde(default)]
    pub cycle: Vec<ChartSpec>,
}

#[derive(Clone, Debug)]
pub struct LoadedConfiguration {
    pub configuration: TestConfiguration,
    pub fiber: Vec<Parametrization>,
    pub cycle: Vec<Parametrization>,
}

impl LoadedConfiguration {
    pub fn from_json(text: &str) -> Result<Self, LoadError> {
        let file: ConfigFile = serde_json::from_str(text)?;
        let vars: Vec<&str> = file.variables.iter().map(String::as_str).collect();
        let gens: Vec<&str> = file.generators.iter().map(String::as_str).collect();
        let configuration = TestConfiguration::from_text(file.name.clone(), &vars, &file.weights, &gens)?;
        let m = vars.len();
        let fiber = charts("fiber", &file.fiber, m)?;
        let cycle = charts("cycle", &file.cycle, m)?;
        Ok(LoadedConfiguration { configuration, fiber, cycle })
    }

    pub fn from_path(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }
}

fn charts(section: &'static str, specs: &[ChartSpec], m: usize) -> Result<Vec<Parametrization>, LoadError> {
    specs
        .iter()
        .enumerate()
        .map(|(index, s)| {
            if s.components.len() != m {
                return Err(LoadError::ChartLength { section, index, expected: m, found: s.components.len() });
            }
            let comps: Vec<&str> = s.components.iter().map(String::as_str).collect();
            Parametrization::from_text(s.chart_vars, &comps, s.multiplicity).map_err(|source| LoadError::Chart { section, index, source })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOUBLE_LINE: &str = r#"{
        "name": "double line", "variables": ["x", "y", "z"], "weights": [0, 0, 1],
        "generators": ["x*z - y^2"],
        "fiber": [{"chart_vars": 1, "components": ["1", "u1", "u1^2"]}],
        "cycle": [{"chart_vars": 1, "components": ["1", "0", "u1"], "multiplicity": 2}]
    }"#;

    #[test]
    fn loads_conic() {
        let c = LoadedConfiguration::from_json(DOUBLE_LINE).unwrap();
        assert_eq!(c.configuration.ambient_dim(), 3);
        assert_eq!(c.cycle[0].multiplicity(), 2);
        assert_eq!(c.fiber[0].multiplicity(), 1);
    }

    #[test]
    fn diagnostics() {
        let bad = DOUBLE_LINE.replace("x*z - y^2", "x*z - y");
        let err = LoadedConfiguration::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("generator 0") && err.contains("[2, 1]"), "{err}");
        let missing = DOUBLE_LINE.replace(r#""weights": [0, 0, 1],"#, "");
        assert!(matches!(LoadedConfiguration::from_json(&missing), Err(LoadError::Schema(_))));
        let short = DOUBLE_LINE.replace("[0, 0, 1]", "[0, 1]");
        assert!(matches!(LoadedConfiguration::from_json(&short), Err(LoadError::Config(ConfigError::WeightLength { .. }))));
        let chart = DOUBLE_LINE.replace(r#"["1", "0", "u1"]"#, r#"["1", "u1"]"#);
        assert!(matches!(LoadedConfiguration::from_json(&chart), Err(LoadError::ChartLength { section: "cycle", .. })));
    }
}
