use std::collections::btree_map::Entry;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::parse_error;
use crate::error::{Error, Result};
use crate::evaluation::Labels;
use crate::types::ClassId;

/// Reads `sample_id,class_index` lines.
pub fn load_labels(path: &Path) -> Result<Labels> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_labels(BufReader::new(file), path)
}

pub fn read_labels(reader: impl BufRead, path: &Path) -> Result<Labels> {
    let mut labels = Labels::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (sample_id, class) = line
            .rsplit_once(',')
            .ok_or_else(|| parse_error(path, lineno, "expected `sample_id,class_index`"))?;
        let class: usize = class
            .trim()
            .parse()
            .map_err(|_| parse_error(path, lineno, format!("class index `{class}` is not a non-negative integer")))?;
        match labels.entry(sample_id.trim().to_owned()) {
            Entry::Occupied(e) => {
                return Err(Error::DuplicateSample {
                    path: path.to_path_buf(),
                    line: lineno,
                    sample_id: e.key().clone(),
                })
            }
            Entry::Vacant(e) => {
                e.insert(ClassId(class));
            }
        }
    }
    Ok(labels)
}

pub fn write_labels(mut writer: impl Write, labels: &Labels) -> std::io::Result<()> {
    for (sample_id, class) in labels {
        writeln!(writer, "{sample_id},{class}")?;
    }
    writer.flush()
}

/// One human-readable class name per line, in index order.
pub fn load_class_names(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(|l| l.trim().to_owned()).collect())
}
