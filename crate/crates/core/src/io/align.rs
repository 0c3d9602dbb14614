use std::collections::BTreeSet;

use super::{EnsembleManifest, PredictionMap};
use crate::error::{Error, Result};
use crate::evaluation::Labels;
use crate::types::EnsembleFrame;

/// Joins per-model prediction maps into one frame per sample, ordered by
/// sample id. Every sample must appear in every map (and in `labels`, when
/// given); anything else is reported as a coverage error listing the ids.
pub fn align_frames(
    manifest: &EnsembleManifest,
    maps: &[PredictionMap],
    labels: Option<&Labels>,
) -> Result<Vec<EnsembleFrame>> {
    if maps.len() != manifest.models.len() {
        return Err(Error::Alignment(format!(
            "{} prediction maps for {} models",
            maps.len(),
            manifest.models.len()
        )));
    }
    for (model, map) in manifest.models.iter().zip(maps) {
        if let Some((id, v)) = map.iter().find(|(_, v)| v.len() != manifest.class_count) {
            return Err(Error::Alignment(format!(
                "model `{}` sample `{id}` has {} classes, manifest declares {}",
                model.model_id,
                v.len(),
                manifest.class_count
            )));
        }
    }

    let all: BTreeSet<&String> = maps.iter().flat_map(|m| m.keys()).collect();
    let partial: Vec<String> = all
        .iter()
        .filter(|id| maps.iter().any(|m| !m.contains_key(id.as_str())))
        .map(|id| id.to_string())
        .collect();
    if !partial.is_empty() {
        return Err(Error::Coverage {
            context: "samples missing from some prediction files".into(),
            sample_ids: partial,
        });
    }
    if all.is_empty() {
        return Err(Error::validation("predictions", "no samples shared by all models"));
    }
    if let Some(labels) = labels {
        let label_ids: BTreeSet<&String> = labels.keys().collect();
        let mismatched: Vec<String> = all.symmetric_difference(&label_ids).map(|id| id.to_string()).collect();
        if !mismatched.is_empty() {
            return Err(Error::Coverage {
                context: "samples not covered by both labels and predictions".into(),
                sample_ids: mismatched,
            });
        }
    }

    let records = manifest.records();
    all.into_iter()
        .map(|id| {
            let predictions = maps.iter().map(|m| m[id].clone()).collect();
            EnsembleFrame::new(id.clone(), records.clone(), predictions)
        })
        .collect()
}
