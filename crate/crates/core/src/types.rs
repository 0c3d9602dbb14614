//! Domain types shared by every combiner.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values this far outside `[0, 1]` are clamped; anything further is rejected.
pub const CONFIDENCE_TOLERANCE: f64 = 1e-6;

/// Positional category index within a class set of size K.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub usize);

impl ClassId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for ClassId {
    fn from(index: usize) -> Self {
        ClassId(index)
    }
}

/// One model's per-class confidences for one sample.
///
/// Values lie in `[0, 1]`; they are not required to sum to one. Inputs within
/// [`CONFIDENCE_TOLERANCE`] of the bounds are clamped on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PredictionVector(Vec<f64>);

impl PredictionVector {
    pub fn new(confidences: Vec<f64>) -> Result<Self> {
        let mut confidences = confidences;
        for (class, value) in confidences.iter_mut().enumerate() {
            *value = clamp_confidence(*value)
                .ok_or_else(|| Error::validation(format!("confidence[{class}]"), format!("{value} is outside [0, 1]")))?;
        }
        Ok(PredictionVector(confidences))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for PredictionVector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        PredictionVector::new(value)
    }
}

impl From<PredictionVector> for Vec<f64> {
    fn from(value: PredictionVector) -> Self {
        value.0
    }
}

fn clamp_confidence(value: f64) -> Option<f64> {
    if !(-CONFIDENCE_TOLERANCE..=1.0 + CONFIDENCE_TOLERANCE).contains(&value) {
        None
    } else {
        Some(value.clamp(0.0, 1.0))
    }
}

/// Model identity plus the validation accuracy used as the prior that the
/// model is correct.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelRecord {
    pub model_id: String,
    validation_accuracy: f64,
}

impl ModelRecord {
    pub fn new(model_id: impl Into<String>, validation_accuracy: f64) -> Result<Self> {
        check_accuracy("validation_accuracy", validation_accuracy)?;
        Ok(ModelRecord {
            model_id: model_id.into(),
            validation_accuracy,
        })
    }

    pub fn validation_accuracy(&self) -> f64 {
        self.validation_accuracy
    }
}

/// Accuracies must lie in `(0, 1]`; zero would make every weighted term vanish.
pub(crate) fn check_accuracy(param: &str, accuracy: f64) -> Result<()> {
    if accuracy.is_nan() || accuracy <= 0.0 || accuracy > 1.0 {
        return Err(Error::validation(param, format!("{accuracy} is outside (0, 1]")));
    }
    Ok(())
}

/// The N aligned prediction vectors for one test sample, index-aligned with
/// the records of the models that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleFrame {
    sample_id: String,
    records: Vec<ModelRecord>,
    predictions: Vec<PredictionVector>,
}

impl EnsembleFrame {
    pub fn new(
        sample_id: impl Into<String>,
        records: Vec<ModelRecord>,
        predictions: Vec<PredictionVector>,
    ) -> Result<Self> {
        let sample_id = sample_id.into();
        if records.is_empty() {
            return Err(Error::validation("models", "a frame needs at least one model"));
        }
        if records.len() != predictions.len() {
            return Err(Error::Alignment(format!(
                "sample `{sample_id}`: {} model records but {} prediction vectors",
                records.len(),
                predictions.len()
            )));
        }
        let class_count = predictions[0].len();
        if class_count == 0 {
            return Err(Error::validation("confidences", "prediction vectors are empty"));
        }
        if let Some((n, p)) = predictions.iter().enumerate().find(|(_, p)| p.len() != class_count) {
            return Err(Error::Alignment(format!(
                "sample `{sample_id}`: model `{}` has {} classes, expected {class_count}",
                records[n].model_id,
                p.len()
            )));
        }
        Ok(EnsembleFrame {
            sample_id,
            records,
            predictions,
        })
    }

    /// Convenience constructor from raw accuracies and confidence rows.
    /// Model ids are `m0`, `m1`, ...
    pub fn from_raw(sample_id: impl Into<String>, accuracies: &[f64], rows: &[Vec<f64>]) -> Result<Self> {
        let records = accuracies
            .iter()
            .enumerate()
            .map(|(n, &a)| ModelRecord::new(format!("m{n}"), a))
            .collect::<Result<Vec<_>>>()?;
        let predictions = rows
            .iter()
            .map(|row| PredictionVector::new(row.clone()))
            .collect::<Result<Vec<_>>>()?;
        EnsembleFrame::new(sample_id, records, predictions)
    }

    pub fn sample_id(&self) -> &str {
        &self.sample_id
    }

    pub fn records(&self) -> &[ModelRecord] {
        &self.records
    }

    pub fn predictions(&self) -> &[PredictionVector] {
        &self.predictions
    }

    pub fn model_count(&self) -> usize {
        self.records.len()
    }

    pub fn class_count(&self) -> usize {
        self.predictions[0].len()
    }

    /// `(accuracy, confidences)` per model.
    pub fn members(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.records
            .iter()
            .zip(&self.predictions)
            .map(|(r, p)| (r.validation_accuracy, p.as_slice()))
    }
}
