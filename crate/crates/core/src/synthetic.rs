//! Seeded generator of synthetic classifier outputs with controllable
//! per-model accuracy and inter-model error correlation.
//!
//! For every sample a truth class and a shared uniform draw are taken from a
//! per-sample stream. Each model then draws from its own `(model, sample)`
//! stream:
//!
//! 1. with probability `noise_correlation` it reuses the shared draw,
//!    otherwise a private one; the model is correct when that draw is below
//!    `target_accuracy`;
//! 2. every class gets a standard-normal logit;
//! 3. a wrong model adds `residual_evidence` to the truth logit;
//! 4. the peak class (truth when correct, a uniformly chosen wrong class
//!    otherwise) is lifted strictly above every other logit;
//! 5. confidences are `softmax(sharpness * logits)`.
//!
//! Because the peak is a strict maximum, a model's argmax equals the truth
//! exactly when its coin came up correct, so realized accuracy is a binomial
//! draw around the target.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::Labels;
use crate::io::{write_labels, write_manifest, write_predictions, EnsembleManifest, ManifestModel, PredictionMap};
use crate::types::{ClassId, EnsembleFrame, ModelRecord, PredictionVector};

/// Logit bonus a wrong model leaves on the true class unless a profile says
/// otherwise.
pub const DEFAULT_RESIDUAL_EVIDENCE: f64 = 1.5;

/// Minimum logit gap between the peak class and the runner-up.
const PEAK_MARGIN: f64 = 0.25;

// Stream domains.
const SAMPLE_STREAM: u64 = 0;
const MODEL_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelProfile {
    /// Probability that the model's argmax is the true class, in (0, 1).
    pub target_accuracy: f64,
    /// Softmax inverse temperature; larger values concentrate confidence.
    pub sharpness: f64,
    /// Probability, in [0, 1], that the model's correctness coin is the
    /// per-sample shared coin rather than its own.
    pub noise_correlation: f64,
    /// Logit bonus for the true class when the model is wrong.
    #[serde(default = "default_residual_evidence")]
    pub residual_evidence: f64,
}

fn default_residual_evidence() -> f64 {
    DEFAULT_RESIDUAL_EVIDENCE
}

impl ModelProfile {
    pub fn new(target_accuracy: f64, sharpness: f64, noise_correlation: f64) -> Self {
        ModelProfile {
            target_accuracy,
            sharpness,
            noise_correlation,
            residual_evidence: DEFAULT_RESIDUAL_EVIDENCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.target_accuracy;
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::validation("target_accuracy", format!("{t} is outside (0, 1)")));
        }
        if !(self.sharpness.is_finite() && self.sharpness > 0.0) {
            return Err(Error::validation("sharpness", format!("{} is not a positive number", self.sharpness)));
        }
        if !(0.0..=1.0).contains(&self.noise_correlation) {
            return Err(Error::validation(
                "noise_correlation",
                format!("{} is outside [0, 1]", self.noise_correlation),
            ));
        }
        if !(self.residual_evidence.is_finite() && self.residual_evidence >= 0.0) {
            return Err(Error::validation(
                "residual_evidence",
                format!("{} is not a non-negative number", self.residual_evidence),
            ));
        }
        Ok(())
    }
}

/// Six profiles with targets spread evenly over 0.60..=0.74 and independent
/// errors.
pub fn six_model_profiles() -> Vec<ModelProfile> {
    const SHARPNESS: [f64; 6] = [1.0, 1.5, 2.0, 1.0, 1.5, 2.0];
    (0..6)
        .map(|i| ModelProfile::new(0.60 + 0.028 * i as f64, SHARPNESS[i], 0.0))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub class_count: usize,
    pub sample_ids: Vec<String>,
    pub truth: Vec<ClassId>,
    /// `predictions[model][sample]`.
    pub predictions: Vec<Vec<PredictionVector>>,
    /// Measured per-model accuracy on this data.
    pub realized_accuracy: Vec<f64>,
}

pub fn generate_dataset(
    profiles: &[ModelProfile],
    class_count: usize,
    sample_count: usize,
    seed: u64,
) -> Result<SyntheticDataset> {
    if profiles.is_empty() {
        return Err(Error::validation("profiles", "at least one model profile is required"));
    }
    if class_count < 2 {
        return Err(Error::validation("class_count", format!("{class_count} is below 2")));
    }
    if sample_count == 0 {
        return Err(Error::validation("sample_count", "must be at least 1"));
    }
    for (i, p) in profiles.iter().enumerate() {
        p.validate()
            .map_err(|e| Error::validation(format!("profiles[{i}]"), e.to_string()))?;
    }

    let samples: Vec<(ClassId, f64)> = (0..sample_count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, SAMPLE_STREAM, 0, i as u64);
            let truth = ClassId(rng.random_range(0..class_count));
            (truth, rng.random::<f64>())
        })
        .collect();

    let predictions: Vec<Vec<PredictionVector>> = profiles
        .iter()
        .enumerate()
        .map(|(n, profile)| {
            samples
                .par_iter()
                .enumerate()
                .map(|(i, &(truth, shared))| {
                    let mut rng = stream(seed, MODEL_STREAM, n as u64, i as u64);
                    model_output(&mut rng, profile, class_count, truth, shared)
                })
                .collect()
        })
        .collect();

    let mut dataset = SyntheticDataset {
        class_count,
        sample_ids: (0..sample_count).map(|i| format!("s{i:06}")).collect(),
        truth: samples.iter().map(|&(t, _)| t).collect(),
        predictions,
        realized_accuracy: Vec::new(),
    };
    dataset.realized_accuracy = (0..profiles.len())
        .map(|n| measure_empirical_accuracy(&dataset, n))
        .collect::<Result<_>>()?;
    Ok(dataset)
}

/// A generator keyed by `(seed, domain, model, sample)`. Each key yields an
/// independent ChaCha stream, so adding models or samples never shifts the
/// draws of existing ones.
fn stream(seed: u64, domain: u64, model: u64, sample: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_exact_mut(8).zip([seed, domain, model, sample]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn model_output(
    rng: &mut ChaCha8Rng,
    profile: &ModelProfile,
    class_count: usize,
    truth: ClassId,
    shared: f64,
) -> PredictionVector {
    let use_shared = rng.random::<f64>() < profile.noise_correlation;
    let private = rng.random::<f64>();
    let correct = if use_shared { shared } else { private } < profile.target_accuracy;

    let mut logits: Vec<f64> = (0..class_count).map(|_| rng.sample(StandardNormal)).collect();
    let peak = if correct {
        truth.index()
    } else {
        logits[truth.index()] += profile.residual_evidence;
        let wrong = rng.random_range(0..class_count - 1);
        if wrong >= truth.index() {
            wrong + 1
        } else {
            wrong
        }
    };
    let runner_up = logits
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != peak)
        .map(|(_, &z)| z)
        .fold(f64::NEG_INFINITY, f64::max);
    let gap: f64 = rng.sample(Exp1);
    logits[peak] = runner_up + PEAK_MARGIN + gap;

    let top = logits[peak];
    let weights: Vec<f64> = logits.iter().map(|z| (profile.sharpness * (z - top)).exp()).collect();
    let total: f64 = weights.iter().sum();
    PredictionVector::new(weights.into_iter().map(|w| w / total).collect())
        .expect("softmax output lies in [0, 1]")
}

/// Fraction of samples where the model's argmax (lowest index on ties)
/// equals the truth.
pub fn measure_empirical_accuracy(dataset: &SyntheticDataset, model: usize) -> Result<f64> {
    let rows = dataset.predictions.get(model).ok_or_else(|| {
        Error::validation(
            "model index",
            format!("{model} is out of range for {} models", dataset.predictions.len()),
        )
    })?;
    if rows.is_empty() {
        return Err(Error::validation("dataset", "no samples"));
    }
    let hits = rows
        .iter()
        .zip(&dataset.truth)
        .filter(|(v, t)| argmax(v.as_slice()) == t.index())
        .count();
    Ok(hits as f64 / rows.len() as f64)
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl SyntheticDataset {
    pub fn model_count(&self) -> usize {
        self.predictions.len()
    }

    pub fn model_id(model: usize) -> String {
        format!("model_{:02}", model + 1)
    }

    /// Records carrying the realized accuracies.
    pub fn records(&self) -> Result<Vec<ModelRecord>> {
        self.realized_accuracy
            .iter()
            .enumerate()
            .map(|(n, &a)| {
                ModelRecord::new(Self::model_id(n), a).map_err(|_| {
                    Error::validation(
                        format!("{} realized accuracy", Self::model_id(n)),
                        format!("{a} is not usable as a model weight; generate more samples"),
                    )
                })
            })
            .collect()
    }

    pub fn labels(&self) -> Labels {
        self.sample_ids.iter().cloned().zip(self.truth.iter().copied()).collect()
    }

    pub fn prediction_map(&self, model: usize) -> PredictionMap {
        self.sample_ids
            .iter()
            .cloned()
            .zip(self.predictions[model].iter().cloned())
            .collect()
    }

    /// One frame per sample, weighted by realized accuracies.
    pub fn frames(&self) -> Result<Vec<EnsembleFrame>> {
        let records = self.records()?;
        self.sample_ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let vectors = self.predictions.iter().map(|rows| rows[i].clone()).collect();
                EnsembleFrame::new(id.clone(), records.clone(), vectors)
            })
            .collect()
    }

    /// Writes `model_XX.jsonl` per model, `labels.csv` and `manifest.json`
    /// into `dir`, which must exist.
    pub fn write_to_dir(&self, dir: &Path) -> Result<EnsembleManifest> {
        let records = self.records()?;
        let mut models = Vec::with_capacity(records.len());
        for (n, record) in records.into_iter().enumerate() {
            let file_name = format!("{}.jsonl", record.model_id);
            let path = dir.join(&file_name);
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            write_predictions(BufWriter::new(file), &self.prediction_map(n)).map_err(|e| Error::io(&path, e))?;
            models.push(ManifestModel {
                validation_accuracy: record.validation_accuracy(),
                model_id: record.model_id,
                predictions_path: file_name.into(),
                extra: Default::default(),
            });
        }
        let labels_path = dir.join("labels.csv");
        let file = File::create(&labels_path).map_err(|e| Error::io(&labels_path, e))?;
        write_labels(BufWriter::new(file), &self.labels()).map_err(|e| Error::io(&labels_path, e))?;

        let manifest = EnsembleManifest {
            class_count: self.class_count,
            models,
            class_names: None,
            extra: Default::default(),
            base_dir: dir.to_path_buf(),
        };
        write_manifest(&dir.join("manifest.json"), &manifest)?;
        Ok(manifest)
    }
}
