//! UCR-style dataset files: delimited text with the label first, and the
//! `.ts` format with `@` headers and `values:label` rows.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::{Classifier, ClassifierSpec, Learner};
use crate::dataset::{SeriesMatrix, TimeSeriesDataset};
use crate::error::{Error, Result};
use crate::eval::folds::{split_data, FoldPlan};
use crate::eval::metrics::accuracy;
use crate::scalar::Scalar;

struct Raw<T> {
    rows: Vec<Vec<T>>,
    labels: Vec<String>,
    lines: Vec<usize>,
}

impl<T> Default for Raw<T> {
    fn default() -> Self {
        Self {
            rows: Vec::new(),
            labels: Vec::new(),
            lines: Vec::new(),
        }
    }
}

impl<T: Scalar> Raw<T> {
    fn push(&mut self, line: usize, label: &str, values: &[&str]) -> Result<()> {
        let label = label.trim();
        if label.is_empty() {
            return Err(Error::Parse {
                line,
                message: "missing class label".into(),
            });
        }
        let mut row = Vec::with_capacity(values.len());
        for v in values {
            let v = v.trim();
            let x: f64 = v.parse().map_err(|_| Error::Parse {
                line,
                message: format!("'{v}' is not a number"),
            })?;
            if !x.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite value '{v}'"),
                });
            }
            row.push(T::of(x));
        }
        if row.is_empty() {
            return Err(Error::Parse {
                line,
                message: "row has no values".into(),
            });
        }
        if let Some(first) = self.rows.first() {
            if first.len() != row.len() {
                return Err(Error::Ragged {
                    line,
                    expected: first.len(),
                    found: row.len(),
                });
            }
        }
        self.rows.push(row);
        self.labels.push(label.to_string());
        self.lines.push(line);
        Ok(())
    }

    fn append(&mut self, other: Raw<T>) -> Result<()> {
        if let (Some(a), Some(b)) = (self.rows.first(), other.rows.first()) {
            if a.len() != b.len() {
                return Err(Error::Ragged {
                    line: other.lines[0],
                    expected: a.len(),
                    found: b.len(),
                });
            }
        }
        self.rows.extend(other.rows);
        self.labels.extend(other.labels);
        self.lines.extend(other.lines);
        Ok(())
    }

    fn finish(self) -> Result<TimeSeriesDataset<T>> {
        if self.rows.is_empty() {
            return Err(Error::InvalidDataset("no data rows".into()));
        }
        TimeSeriesDataset::from_raw_labels(SeriesMatrix::from_rows(&self.rows)?, &self.labels)
    }
}

fn parse_delimited<T: Scalar>(text: &str) -> Result<Raw<T>> {
    let mut raw = Raw::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = if line.contains('\t') {
            line.split('\t').collect()
        } else if line.contains(',') {
            line.split(',').collect()
        } else {
            line.split_whitespace().collect()
        };
        raw.push(i + 1, fields[0], &fields[1..])?;
    }
    Ok(raw)
}

fn parse_ts<T: Scalar>(text: &str) -> Result<Raw<T>> {
    let mut raw = Raw::default();
    let mut in_data = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !in_data {
            if line.to_ascii_lowercase().starts_with("@data") {
                in_data = true;
            } else if !line.starts_with('@') {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "expected a header line or @data".into(),
                });
            }
            continue;
        }
        let parts: Vec<&str> = line.split(':').collect();
        if parts.len() != 2 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 'values:label', found {} ':'-separated fields", parts.len()),
            });
        }
        let values: Vec<&str> = parts[0].split(',').collect();
        raw.push(i + 1, parts[1], &values)?;
    }
    if !in_data {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: "no @data section".into(),
        });
    }
    Ok(raw)
}

fn with_path(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn read_raw<T: Scalar>(path: &Path) -> Result<Raw<T>> {
    let text = fs::read_to_string(path).map_err(|e| with_path(e, path))?;
    let is_ts = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ts"));
    if is_ts {
        parse_ts(&text)
    } else {
        parse_delimited(&text)
    }
}

/// Parses delimited text: tab, comma or whitespace separated, label first.
pub fn parse_delimited_str<T: Scalar>(text: &str) -> Result<TimeSeriesDataset<T>> {
    parse_delimited(text)?.finish()
}

pub fn parse_ts_str<T: Scalar>(text: &str) -> Result<TimeSeriesDataset<T>> {
    parse_ts(text)?.finish()
}

/// Loads one file, or a UCR directory `NAME/` holding `NAME_TRAIN` and
/// `NAME_TEST` files, whose rows are concatenated train first.
pub fn load_dataset<T: Scalar>(path: &Path) -> Result<TimeSeriesDataset<T>> {
    if !path.is_dir() {
        return read_raw(path)?.finish();
    }
    let parts = split_files(path)?;
    let mut raw = Raw::default();
    for p in parts {
        raw.append(read_raw(&p)?)?;
    }
    raw.finish()
}

fn split_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let mut found = Vec::new();
    for part in ["TRAIN", "TEST"] {
        let hit = ["tsv", "ts", "csv", "txt", ""].iter().find_map(|ext| {
            let file = if ext.is_empty() {
                format!("{name}_{part}")
            } else {
                format!("{name}_{part}.{ext}")
            };
            let p = dir.join(file);
            p.is_file().then_some(p)
        });
        match hit {
            Some(p) => found.push(p),
            None => {
                return Err(Error::InvalidDataset(format!(
                    "{} has no {name}_{part} file",
                    dir.display()
                )))
            }
        }
    }
    Ok(found)
}

/// Tab-separated, original label name first.
pub fn write_dataset<T: Scalar, W: Write>(data: &TimeSeriesDataset<T>, mut out: W) -> Result<()> {
    for (row, &l) in data.values().iter_rows().zip(data.labels()) {
        write!(out, "{}", data.label_names()[l])?;
        for v in row {
            write!(out, "\t{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn save_dataset<T: Scalar>(data: &TimeSeriesDataset<T>, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_dataset(data, &mut buf)?;
    write_atomic(path, &buf)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterEntry {
    pub dataset: String,
    pub num_classes: Option<usize>,
    /// Mean flat accuracy per classifier, in the order given.
    pub accuracies: Vec<f64>,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub kept: Vec<FilterEntry>,
    pub excluded: Vec<FilterEntry>,
    pub unreadable: Vec<FilterEntry>,
}

/// Accuracy above which a dataset counts as solved.
pub const MAX_FLAT_ACCURACY: f64 = 0.995;

/// Mean flat accuracy over the folds of `plan`.
pub fn flat_accuracy<T: Scalar, L: Learner<T>>(data: &TimeSeriesDataset<T>, plan: &FoldPlan, learner: &L) -> Result<f64> {
    let mut total = 0.0;
    for f in 0..plan.k {
        let train = data.subset(&plan.train_indices(f));
        let test = data.subset(&plan.test_indices(f));
        let model = learner.fit(train.values(), train.labels(), data.num_classes())?;
        total += accuracy(test.labels(), &model.predict(test.values())?)?;
    }
    Ok(total / plan.k as f64)
}

/// Keeps datasets with more than two classes whose flat accuracy on the
/// fixed unshuffled 5-fold plan stays at or below 99.5% for every spec.
pub fn filter_datasets<T: Scalar>(paths: &[PathBuf], specs: &[ClassifierSpec]) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for path in paths {
        let name = path
            .file_stem()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let data = match load_dataset::<T>(path) {
            Ok(d) => d,
            Err(e) => {
                out.unreadable.push(FilterEntry {
                    dataset: name,
                    num_classes: None,
                    accuracies: Vec::new(),
                    reason: Some(e.to_string()),
                });
                continue;
            }
        };
        let mut entry = FilterEntry {
            dataset: name,
            num_classes: Some(data.num_classes()),
            accuracies: Vec::new(),
            reason: None,
        };
        if data.num_classes() <= 2 {
            entry.reason = Some(format!("{} classes", data.num_classes()));
            out.excluded.push(entry);
            continue;
        }
        let scored = split_data(&data, 5, false, 0).and_then(|plan| {
            specs
                .iter()
                .map(|s| flat_accuracy(&data, &plan, s))
                .collect::<Result<Vec<f64>>>()
        });
        match scored {
            Ok(acc) => {
                entry.accuracies = acc;
                if let Some(a) = entry.accuracies.iter().find(|&&a| a > MAX_FLAT_ACCURACY) {
                    entry.reason = Some(format!("flat accuracy {a:.4} above {MAX_FLAT_ACCURACY}"));
                    out.excluded.push(entry);
                } else {
                    out.kept.push(entry);
                }
            }
            Err(e) => {
                entry.reason = Some(e.to_string());
                out.unreadable.push(entry);
            }
        }
    }
    out
}
