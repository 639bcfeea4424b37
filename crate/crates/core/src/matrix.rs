//! Attribute matrices, binary labels and pooled per-dimension statistics.
//!
//! An [`AttributeMatrix`] holds one attribute vector per sample in row-major
//! order. Values are always stored as `f64`, whatever precision they were
//! read from, and are guaranteed finite.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// N×d matrix of per-sample attribute vectors with optional sample ids.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    sample_ids: Option<Vec<String>>,
}

impl AttributeMatrix {
    /// Builds a matrix from row-major values, rejecting empty shapes and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!(
                "matrix must have at least one row and column, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self {
            rows,
            cols,
            values,
            sample_ids: None,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(n * d);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::Shape(format!(
                    "row {i} has {} values, expected {d}",
                    r.len()
                )));
            }
            values.extend_from_slice(r);
        }
        Self::new(n, d, values)
    }

    /// Single-column matrix, handy for 1-D data.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    /// Attaches sample ids. Ids must be unique, non-empty and free of newlines.
    pub fn with_sample_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.rows {
            return Err(Error::Shape(format!(
                "{} sample ids for {} rows",
                ids.len(),
                self.rows
            )));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if id.is_empty() || id.contains('\n') || id.contains('\r') {
                return Err(Error::InvalidArgument(format!(
                    "sample id at row {i} is empty or contains a newline"
                )));
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate sample id {id:?} at row {i}"
                )));
            }
        }
        self.sample_ids = Some(ids);
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sample_ids(&self) -> Option<&[String]> {
        self.sample_ids.as_deref()
    }

    pub fn sample_id(&self, row: usize) -> Option<&str> {
        self.sample_ids.as_ref().map(|ids| ids[row].as_str())
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.cols)
    }

    /// Copies out column `c`.
    pub fn column(&self, c: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(c)
            .step_by(self.cols)
            .copied()
            .collect()
    }

    /// Copies out the columns in `range` with one sequential pass over the
    /// rows; cheaper than repeated strided [`column`](Self::column) calls on
    /// large matrices.
    pub fn columns(&self, range: std::ops::Range<usize>) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = range
            .clone()
            .map(|_| Vec::with_capacity(self.rows))
            .collect();
        for row in self.iter_rows() {
            for (col, &v) in out.iter_mut().zip(&row[range.clone()]) {
                col.push(v);
            }
        }
        out
    }

    pub fn check_col(&self, c: usize) -> Result<()> {
        if c >= self.cols {
            return Err(Error::OutOfRange {
                index: c,
                len: self.cols,
            });
        }
        Ok(())
    }

    /// New matrix holding the given rows in order; sample ids follow along.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("row selection"));
        }
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(Error::OutOfRange {
                    index: i,
                    len: self.rows,
                });
            }
            values.extend_from_slice(self.row(i));
        }
        let out = Self {
            rows: indices.len(),
            cols: self.cols,
            values,
            sample_ids: None,
        };
        match &self.sample_ids {
            Some(ids) => out.with_sample_ids(indices.iter().map(|&i| ids[i].clone()).collect()),
            None => Ok(out),
        }
    }

    /// Stacks `self` on top of `other`. Ids are kept only when both sides
    /// carry them.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                left: self.cols,
                right: other.cols,
            });
        }
        let mut values = Vec::with_capacity(self.values.len() + other.values.len());
        values.extend_from_slice(&self.values);
        values.extend_from_slice(&other.values);
        Self::new(self.rows + other.rows, self.cols, values)
    }

    /// Applies `f(col, value)` to every entry.
    pub fn map_values(&self, mut f: impl FnMut(usize, f64) -> f64) -> Result<Self> {
        let cols = self.cols;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(i % cols, v))
            .collect();
        let out = Self::new(self.rows, self.cols, values)?;
        match &self.sample_ids {
            Some(ids) => out.with_sample_ids(ids.clone()),
            None => Ok(out),
        }
    }
}

/// Binary labels paired with the rows of an [`AttributeMatrix`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelVector {
    pub labels: Vec<u8>,
    pub attribute_name: String,
}

impl LabelVector {
    pub fn new(labels: Vec<u8>, attribute_name: impl Into<String>) -> Result<Self> {
        if let Some(i) = labels.iter().position(|&l| l > 1) {
            return Err(Error::InvalidArgument(format!(
                "label at row {i} is {}, expected 0 or 1",
                labels[i]
            )));
        }
        Ok(Self {
            labels,
            attribute_name: attribute_name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn check_matches(&self, m: &AttributeMatrix) -> Result<()> {
        if self.labels.len() != m.rows() {
            return Err(Error::Shape(format!(
                "{} labels for {} samples",
                self.labels.len(),
                m.rows()
            )));
        }
        Ok(())
    }
}

/// Per-dimension means of each dataset and of the pooled union, with the
/// pooled population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledStats {
    pub mean_x: Vec<f64>,
    pub mean_y: Vec<f64>,
    pub pooled_mean: Vec<f64>,
    pub pooled_std: Vec<f64>,
}

/// Column statistics of one dimension given both columns.
pub(crate) fn pooled_column_stats(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64) {
    let nx = xs.len() as f64;
    let ny = ys.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / nx;
    let mean_y = ys.iter().sum::<f64>() / ny;
    let pooled_mean = (xs.iter().sum::<f64>() + ys.iter().sum::<f64>()) / (nx + ny);
    // Two-pass around the pooled mean keeps the variance accurate for
    // columns with a large offset.
    // Per-side sums keep the result bit-identical when the sides swap.
    let sq = |vs: &[f64]| -> f64 {
        vs.iter()
            .map(|v| (v - pooled_mean) * (v - pooled_mean))
            .sum()
    };
    let ss = sq(xs) + sq(ys);
    let mut std = (ss / (nx + ny)).sqrt();
    // All-equal columns must report exactly zero spread.
    if xs.iter().chain(ys).all(|&v| v == xs[0]) {
        std = 0.0;
    }
    (mean_x, mean_y, pooled_mean, std)
}

/// Per-dimension statistics over the union of `a` and `b`. The standard
/// deviation divides by `N_x + N_y`.
pub fn pooled_stats(a: &AttributeMatrix, b: &AttributeMatrix) -> Result<PooledStats> {
    if a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            left: a.cols(),
            right: b.cols(),
        });
    }
    let d = a.cols();
    let mut out = PooledStats {
        mean_x: Vec::with_capacity(d),
        mean_y: Vec::with_capacity(d),
        pooled_mean: Vec::with_capacity(d),
        pooled_std: Vec::with_capacity(d),
    };
    for c in 0..d {
        let (mx, my, pm, s) = pooled_column_stats(&a.column(c), &b.column(c));
        out.mean_x.push(mx);
        out.mean_y.push(my);
        out.pooled_mean.push(pm);
        out.pooled_std.push(s);
    }
    Ok(out)
}
