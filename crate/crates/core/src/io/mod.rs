//! File formats: JSON manifest, JSON-lines prediction files, CSV labels and
//! rendered comparison reports.
//!
//! Class identity is positional everywhere: index `j` of a confidence array is
//! category `j`.

mod align;
mod labels;
mod manifest;
mod predictions;
mod report;

use std::path::Path;

pub use align::align_frames;
pub use labels::{load_class_names, load_labels, read_labels, write_labels};
pub use manifest::{load_manifest, write_manifest, EnsembleManifest, ManifestModel};
pub use predictions::{
    load_predictions, read_predictions, write_predictions, PredictionMap, PredictionRecord,
};
pub use report::{write_report, ReportFormat};

use crate::error::{Error, Result};
use crate::types::EnsembleFrame;

/// Loads a manifest and every prediction file it references, returning the
/// aligned frames. Prediction files are read in parallel.
pub fn load_ensemble(manifest_path: &Path) -> Result<(EnsembleManifest, Vec<EnsembleFrame>)> {
    use rayon::prelude::*;

    let manifest = load_manifest(manifest_path)?;
    let maps = manifest
        .models
        .par_iter()
        .map(|m| load_predictions(&manifest.resolve(&m.predictions_path), manifest.class_count))
        .collect::<Result<Vec<_>>>()?;
    let frames = align_frames(&manifest, &maps, None)?;
    Ok((manifest, frames))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}
