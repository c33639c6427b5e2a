//! Hyperparameter grids: a JSON object mapping each kind to a list of named
//! configurations.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{build_detector, DetectorKind, DetectorSpec};
use crate::error::{Error, Result};

const DEFAULT_GRID: &str = include_str!("../../configs/default_grid.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NamedConfig {
    name: String,
    #[serde(default)]
    params: BTreeMap<String, Value>,
}

/// One grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub name: String,
    pub spec: DetectorSpec,
}

impl GridConfig {
    /// `kind/name`, unique within a grid.
    pub fn detector_id(&self) -> String {
        format!("{}/{}", self.spec.kind, self.name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    configs: Vec<GridConfig>,
}

impl Grid {
    /// Parse and validate a grid. Configurations keep file order within a
    /// kind; kinds are ordered canonically.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<NamedConfig>> = serde_json::from_str(text)?;
        let mut by_kind: Vec<(DetectorKind, Vec<NamedConfig>)> = raw
            .into_iter()
            .map(|(k, v)| Ok((k.parse::<DetectorKind>()?, v)))
            .collect::<Result<_>>()?;
        by_kind.sort_by_key(|(k, _)| DetectorKind::ALL.iter().position(|a| a == k));
        let mut configs = Vec::new();
        for (kind, entries) in by_kind {
            for e in entries {
                let spec = DetectorSpec {
                    kind,
                    params: e.params,
                    seed: 0,
                };
                build_detector(&spec)?;
                let c = GridConfig { name: e.name, spec };
                if configs.iter().any(|o: &GridConfig| o.detector_id() == c.detector_id()) {
                    return Err(Error::InvalidArgument(format!(
                        "duplicate grid entry {}",
                        c.detector_id()
                    )));
                }
                configs.push(c);
            }
        }
        Ok(Grid { configs })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// The built-in grid covering every kind.
    pub fn default_grid() -> Self {
        Self::from_json(DEFAULT_GRID).expect("built-in grid is valid")
    }

    pub fn from_configs(configs: Vec<GridConfig>) -> Self {
        Grid { configs }
    }

    /// Set every configuration's seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        for c in &mut self.configs {
            c.spec.seed = seed;
        }
        self
    }

    /// Keep only the given kinds.
    pub fn restrict(mut self, kinds: &[DetectorKind]) -> Self {
        self.configs.retain(|c| kinds.contains(&c.spec.kind));
        self
    }

    pub fn configs(&self) -> &[GridConfig] {
        &self.configs
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn default_grid_covers_every_kind() {
        let g = Grid::default_grid();
        let kinds: BTreeSet<DetectorKind> = g.configs().iter().map(|c| c.spec.kind).collect();
        assert_eq!(kinds.len(), 13);
        for c in g.configs() {
            build_detector(&c.spec).unwrap();
        }
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(matches!(
            Grid::from_json(r#"{"ocsvm": [{"name": "a"}]}"#),
            Err(Error::UnknownKind(_))
        ));
        assert!(matches!(
            Grid::from_json(r#"{"knn": [{"name": "a", "params": {"k": 0}}]}"#),
            Err(Error::InvalidHyperparam { .. })
        ));
        assert!(Grid::from_json(r#"{"knn": [{"name": "a"}, {"name": "a"}]}"#).is_err());
    }

    #[test]
    fn ids_and_order() {
        let g = Grid::from_json(r#"{"knn": [{"name": "b"}, {"name": "a"}], "zscore": [{"name": "z"}]}"#).unwrap();
        let ids: Vec<String> = g.configs().iter().map(|c| c.detector_id()).collect();
        assert_eq!(ids, ["zscore/z", "knn/b", "knn/a"]);
    }
}
