use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::parse_error;
use crate::error::{Error, Result};
use crate::types::{check_accuracy, ModelRecord};

/// Ensembles smaller than this get a warning flag.
pub const RECOMMENDED_MIN_MODELS: usize = 3;

/// The models of an ensemble, their validation accuracies and where their
/// prediction files live.
///
/// Unknown keys (at the top level and per model, e.g. training
/// hyperparameters) are kept in `extra` and written back unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleManifest {
    pub class_count: usize,
    pub models: Vec<ManifestModel>,
    /// Optional sidecar with one class name per line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_names: Option<PathBuf>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestModel {
    pub model_id: String,
    pub validation_accuracy: f64,
    pub predictions_path: PathBuf,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl ManifestModel {
    pub fn record(&self) -> ModelRecord {
        ModelRecord::new(self.model_id.clone(), self.validation_accuracy)
            .expect("manifest accuracies are validated on load")
    }
}

impl EnsembleManifest {
    pub fn records(&self) -> Vec<ModelRecord> {
        self.models.iter().map(ManifestModel::record).collect()
    }

    /// True when the ensemble has fewer models than recommended.
    pub fn few_models(&self) -> bool {
        self.models.len() < RECOMMENDED_MIN_MODELS
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Checks the invariants that do not touch the filesystem.
    pub fn validate(&self) -> Result<()> {
        if self.class_count < 2 {
            return Err(Error::validation("class_count", format!("{} is below 2", self.class_count)));
        }
        if self.models.is_empty() {
            return Err(Error::validation("models", "manifest lists no models"));
        }
        let mut seen = HashSet::new();
        for (i, m) in self.models.iter().enumerate() {
            if !seen.insert(m.model_id.as_str()) {
                return Err(Error::DuplicateModel(m.model_id.clone()));
            }
            check_accuracy(&format!("models[{i}].validation_accuracy"), m.validation_accuracy)?;
        }
        Ok(())
    }
}

pub fn load_manifest(path: &Path) -> Result<EnsembleManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut manifest: EnsembleManifest =
        serde_json::from_str(&text).map_err(|e| parse_error(path, e.line(), e.to_string()))?;
    manifest.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    manifest.validate()?;
    for (i, m) in manifest.models.iter().enumerate() {
        let resolved = manifest.resolve(&m.predictions_path);
        if !resolved.is_file() {
            return Err(Error::validation(
                format!("models[{i}].predictions_path"),
                format!("{} does not exist", resolved.display()),
            ));
        }
    }
    if let Some(names) = &manifest.class_names {
        let resolved = manifest.resolve(names);
        if !resolved.is_file() {
            return Err(Error::validation("class_names", format!("{} does not exist", resolved.display())));
        }
    }
    Ok(manifest)
}

pub fn write_manifest(path: &Path, manifest: &EnsembleManifest) -> Result<()> {
    manifest.validate()?;
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
