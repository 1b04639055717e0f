//! Per-channel window statistics and z-score standardization.
//!
//! Each channel contributes seven values in this order:
//! mean, variance (population, 1/N), standard deviation, median, max, min and
//! interquartile range. Channel blocks follow the input channel order. This
//! layout is also the column order of the feature CSV.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::ingest::{Segment, SessionRef};
use crate::Matrix;

pub const STATS_PER_CHANNEL: usize = 7;
pub const STAT_NAMES: [&str; STATS_PER_CHANNEL] = ["mean", "var", "std", "median", "max", "min", "iqr"];

/// Lower bound on stored standard deviations.
pub const STD_EPSILON: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("cannot take quantiles of an empty series")]
    EmptySeries,
    #[error("segment has no samples")]
    EmptySegment,
    #[error("standardizer needs at least one row")]
    EmptySubset,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("row {row} out of range for {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("{0}")]
    Csv(String),
}

/// Linear-interpolation quantile of an ascending slice (`h = p·(N−1)`).
fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    match sorted.get(lo + 1) {
        Some(&next) if frac > 0.0 => sorted[lo] + frac * (next - sorted[lo]),
        _ => sorted[lo],
    }
}

/// First, second and third quartiles; the second equals the median.
pub fn quartiles(series: &[f64]) -> Result<(f64, f64, f64), FeatureError> {
    if series.is_empty() {
        return Err(FeatureError::EmptySeries);
    }
    let mut v = series.to_vec();
    v.sort_by(f64::total_cmp);
    Ok((sorted_quantile(&v, 0.25), sorted_quantile(&v, 0.5), sorted_quantile(&v, 0.75)))
}

/// The seven statistics of one channel, in layout order.
pub fn channel_stats(series: &[f64]) -> Result<[f64; STATS_PER_CHANNEL], FeatureError> {
    let (q1, median, q3) = quartiles(series)?;
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    Ok([mean, var, var.sqrt(), median, max, min, q3 - q1])
}

/// Identifies the window a feature row came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RowMeta {
    pub session: SessionRef,
    pub segment_index: usize,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub meta: RowMeta,
}

pub fn extract_features(segment: &Segment) -> Result<FeatureVector, FeatureError> {
    let (len, channels) = segment.samples.shape();
    if len == 0 || channels == 0 {
        return Err(FeatureError::EmptySegment);
    }
    let mut values = Vec::with_capacity(channels * STATS_PER_CHANNEL);
    let mut column = vec![0.0; len];
    for c in 0..channels {
        for (i, v) in column.iter_mut().enumerate() {
            *v = segment.samples.get(i, c);
        }
        values.extend_from_slice(&channel_stats(&column)?);
    }
    Ok(FeatureVector {
        values,
        meta: RowMeta {
            session: segment.session_ref.clone(),
            segment_index: segment.segment_index,
            label: segment.label,
        },
    })
}

/// Feature rows in dataset order (session order, then segment index).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub data: Matrix,
    pub meta: Vec<RowMeta>,
}

impl FeatureMatrix {
    pub fn from_vectors(vectors: Vec<FeatureVector>) -> Result<Self, FeatureError> {
        let dim = vectors.first().map_or(0, |v| v.values.len());
        let mut data = Vec::with_capacity(vectors.len() * dim);
        let mut meta = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.values.len() != dim {
                return Err(FeatureError::DimMismatch { expected: dim, found: v.values.len() });
            }
            data.extend_from_slice(&v.values);
            meta.push(v.meta);
        }
        Ok(Self { data: Matrix::from_vec(meta.len(), dim, data), meta })
    }

    /// Extracts features for every segment; row order follows `segments`.
    pub fn from_segments(segments: &[Segment]) -> Result<Self, FeatureError> {
        let vectors = segments.par_iter().map(extract_features).collect::<Result<Vec<_>, _>>()?;
        Self::from_vectors(vectors)
    }

    pub fn len(&self) -> usize {
        self.meta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.meta.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.data.cols()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.meta.iter().map(|m| m.label).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self { data: self.data.select_rows(rows), meta: rows.iter().map(|&r| self.meta[r].clone()).collect() }
    }

    /// Writes `feat_0..feat_{D−1},label,subject,session,segment_index`.
    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(File::create(path)?);
        let header: Vec<String> = (0..self.dim()).map(|d| format!("feat_{d}")).collect();
        writeln!(out, "{},label,subject,session,segment_index", header.join(","))?;
        for (row, meta) in self.data.iter_rows().zip(&self.meta) {
            for v in row {
                write!(out, "{v},")?;
            }
            writeln!(
                out,
                "{},{},{},{}",
                meta.label, meta.session.subject_id, meta.session.session_id, meta.segment_index
            )?;
        }
        out.flush()
    }

    pub fn read_csv(path: &Path) -> Result<Self, FeatureError> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| FeatureError::Csv(e.to_string()))?;
        let headers = reader.headers().map_err(|e| FeatureError::Csv(e.to_string()))?.clone();
        let dim = headers.iter().filter(|h| h.starts_with("feat_")).count();
        if headers.len() != dim + 4 {
            return Err(FeatureError::Csv(format!("unexpected header `{}`", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut vectors = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| FeatureError::Csv(e.to_string()))?;
            let bad = |what: &str| {
                FeatureError::Csv(format!("line {}: bad {what}", record.position().map_or(0, |p| p.line())))
            };
            let values = (0..dim)
                .map(|d| record[d].parse::<f64>().map_err(|_| bad("feature value")))
                .collect::<Result<Vec<_>, _>>()?;
            vectors.push(FeatureVector {
                values,
                meta: RowMeta {
                    label: record[dim].parse().map_err(|_| bad("label"))?,
                    session: SessionRef::new(&record[dim + 1], &record[dim + 2]),
                    segment_index: record[dim + 3].parse().map_err(|_| bad("segment_index"))?,
                },
            });
        }
        Self::from_vectors(vectors)
    }
}

/// Per-dimension z-scoring fitted on a row subset.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation, clamped to at least [`STD_EPSILON`].
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn identity(dim: usize) -> Self {
        Self { mean: vec![0.0; dim], std: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Fits on `rows` only, so held-out rows cannot influence the statistics.
    pub fn fit(matrix: &Matrix, rows: &[usize]) -> Result<Self, FeatureError> {
        if rows.is_empty() {
            return Err(FeatureError::EmptySubset);
        }
        if let Some(&row) = rows.iter().find(|&&r| r >= matrix.rows()) {
            return Err(FeatureError::RowOutOfRange { row, rows: matrix.rows() });
        }
        let dim = matrix.cols();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for &r in rows {
            for (m, v) in mean.iter_mut().zip(matrix.row(r)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for &r in rows {
            for ((s, v), m) in var.iter_mut().zip(matrix.row(r)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.into_iter().map(|s| (s / n).sqrt().max(STD_EPSILON)).collect();
        Ok(Self { mean, std })
    }

    pub fn apply(&self, matrix: &Matrix) -> Result<Matrix, FeatureError> {
        if matrix.cols() != self.dim() {
            return Err(FeatureError::DimMismatch { expected: self.dim(), found: matrix.cols() });
        }
        let mut out = matrix.clone();
        for r in 0..out.rows() {
            for ((v, m), s) in out.row_mut(r).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = if *s <= STD_EPSILON { 0.0 } else { (*v - m) / s };
            }
        }
        Ok(out)
    }

    /// Inverse of [`apply`](Self::apply) on non-clamped dimensions.
    pub fn invert(&self, matrix: &Matrix) -> Result<Matrix, FeatureError> {
        if matrix.cols() != self.dim() {
            return Err(FeatureError::DimMismatch { expected: self.dim(), found: matrix.cols() });
        }
        let mut out = matrix.clone();
        for r in 0..out.rows() {
            for ((v, m), s) in out.row_mut(r).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = *v * s + m;
            }
        }
        Ok(out)
    }
}

pub fn fit_standardizer(matrix: &FeatureMatrix, rows: &[usize]) -> Result<Standardizer, FeatureError> {
    Standardizer::fit(&matrix.data, rows)
}

pub fn apply_standardizer(std: &Standardizer, matrix: &FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
    Ok(FeatureMatrix { data: std.apply(&matrix.data)?, meta: matrix.meta.clone() })
}
