//! Equal-length univariate series with dense integer class labels.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense class identifier in `0..num_classes`.
pub type ClassId = usize;

/// Row-major `rows × cols` matrix of series values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SeriesMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> SeriesMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from rows that must all share one length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Ragged {
                    line: i + 1,
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }
}

/// A labelled collection of `N` series of length `M`.
///
/// Labels are dense ids; the original label strings are kept in
/// `label_names`, indexed by id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TimeSeriesDataset<T> {
    values: SeriesMatrix<T>,
    labels: Vec<ClassId>,
    label_names: Vec<String>,
}

impl<T: Scalar> TimeSeriesDataset<T> {
    pub fn new(values: SeriesMatrix<T>, labels: Vec<ClassId>, label_names: Vec<String>) -> Result<Self> {
        if values.rows() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} series but {} labels",
                values.rows(),
                labels.len()
            )));
        }
        if values.rows() > 0 && values.cols() == 0 {
            return Err(Error::InvalidDataset("series have zero length".into()));
        }
        if label_names.len() < 2 {
            return Err(Error::InvalidDataset(format!(
                "label space has {} classes, at least 2 required",
                label_names.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= label_names.len()) {
            return Err(Error::InvalidDataset(format!(
                "label id {bad} outside label space of size {}",
                label_names.len()
            )));
        }
        if let Some(pos) = values.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value in series {}",
                pos / values.cols().max(1)
            )));
        }
        Ok(Self {
            values,
            labels,
            label_names,
        })
    }

    /// Builds a dataset from raw string labels, assigning dense ids.
    ///
    /// Ids follow numeric order when every label parses as a number and
    /// natural order (digit runs compared as numbers) otherwise.
    pub fn from_raw_labels(values: SeriesMatrix<T>, raw: &[String]) -> Result<Self> {
        let mut names: Vec<String> = raw.to_vec();
        names.sort();
        names.dedup();
        let numeric: Option<Vec<f64>> = names.iter().map(|s| s.parse::<f64>().ok()).collect();
        match numeric {
            Some(keys) => {
                let mut paired: Vec<(f64, String)> = keys.into_iter().zip(names).collect();
                paired.sort_by(|a, b| a.0.total_cmp(&b.0));
                names = paired.into_iter().map(|(_, s)| s).collect();
            }
            None => names.sort_by(|a, b| natural_cmp(a, b)),
        }
        let ids: HashMap<&str, ClassId> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let labels = raw.iter().map(|s| ids[s.as_str()]).collect();
        Self::new(values, labels, names)
    }

    /// Synthetic class names `c0, c1, ...`.
    pub fn default_names(num_classes: usize) -> Vec<String> {
        (0..num_classes).map(|c| format!("c{c}")).collect()
    }

    pub fn values(&self) -> &SeriesMatrix<T> {
        &self.values
    }

    pub fn labels(&self) -> &[ClassId] {
        &self.labels
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn series_len(&self) -> usize {
        self.values.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.label_names.len()
    }

    /// Instance count per class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices`, keeping the full label space.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            values: self.values.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            label_names: self.label_names.clone(),
        }
    }

    /// Indices of every instance whose class satisfies `keep`.
    pub fn indices_where(&self, keep: impl Fn(ClassId) -> bool) -> Vec<usize> {
        (0..self.len()).filter(|&i| keep(self.labels[i])).collect()
    }
}

fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn chunks(s: &str) -> Vec<(bool, &str)> {
        let bytes = s.as_bytes();
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=bytes.len() {
            if i == bytes.len() || bytes[i].is_ascii_digit() != bytes[start].is_ascii_digit() {
                out.push((bytes[start].is_ascii_digit(), &s[start..i]));
                start = i;
            }
        }
        out
    }
    let (ca, cb) = (chunks(a), chunks(b));
    for (x, y) in ca.iter().zip(&cb) {
        let ord = match (x, y) {
            ((true, x), (true, y)) => {
                let (x, y) = (x.trim_start_matches('0'), y.trim_start_matches('0'));
                x.len().cmp(&y.len()).then_with(|| x.cmp(y))
            }
            ((_, x), (_, y)) => x.cmp(y),
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    ca.len().cmp(&cb.len()).then_with(|| a.cmp(b))
}
