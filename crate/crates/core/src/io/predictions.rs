use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::parse_error;
use crate::error::{Error, Result};
use crate::types::PredictionVector;

/// Prediction vectors of one model keyed by sample id.
pub type PredictionMap = BTreeMap<String, PredictionVector>;

/// One line of a prediction file:
/// `{"sample_id": "...", "confidences": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub sample_id: String,
    pub confidences: Vec<f64>,
}

pub fn load_predictions(path: &Path, class_count: usize) -> Result<PredictionMap> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_predictions(BufReader::new(file), path, class_count)
}

/// Parses JSON-lines prediction records. `path` is only used in messages.
/// Blank lines are skipped.
pub fn read_predictions(reader: impl BufRead, path: &Path, class_count: usize) -> Result<PredictionMap> {
    let mut map = PredictionMap::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PredictionRecord =
            serde_json::from_str(&line).map_err(|e| parse_error(path, lineno, e.to_string()))?;
        if record.confidences.len() != class_count {
            return Err(Error::Arity {
                path: path.to_path_buf(),
                line: lineno,
                expected: class_count,
                found: record.confidences.len(),
            });
        }
        let vector =
            PredictionVector::new(record.confidences).map_err(|e| parse_error(path, lineno, e.to_string()))?;
        if map.contains_key(&record.sample_id) {
            return Err(Error::DuplicateSample {
                path: path.to_path_buf(),
                line: lineno,
                sample_id: record.sample_id,
            });
        }
        map.insert(record.sample_id, vector);
    }
    Ok(map)
}

/// Writes one record per line in sample-id order. Floats use the shortest
/// representation that parses back to the identical value.
pub fn write_predictions(mut writer: impl Write, map: &PredictionMap) -> std::io::Result<()> {
    for (sample_id, vector) in map {
        let line = serde_json::json!({ "sample_id": sample_id, "confidences": vector.as_slice() });
        writeln!(writer, "{line}")?;
    }
    writer.flush()
}
