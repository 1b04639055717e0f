//! Temporal and feature-space neighbor sets used by the auxiliary losses.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::features::{FeatureMatrix, RowMeta};
use crate::matrix::squared_distance;
use crate::Matrix;

pub const DEFAULT_TEMPORAL: usize = 5;
pub const DEFAULT_FEATURE: usize = 5;

/// Per-row neighbor lists over the rows of one training set.
///
/// Lists never contain the row itself. Temporal neighbors stay inside the
/// row's session; feature neighbors are sorted by ascending distance with ties
/// broken by row index. Both are computed once and stay fixed during training.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodIndex {
    pub temporal: Vec<Vec<usize>>,
    pub feature: Vec<Vec<usize>>,
    pub m: usize,
    pub n: usize,
    /// Set when the dataset had at most `n` rows, so feature lists are shorter than `n`.
    pub feature_lists_truncated: bool,
}

impl NeighborhoodIndex {
    pub fn build(matrix: &FeatureMatrix, m: usize, n: usize) -> Self {
        let temporal = temporal_neighbors(&matrix.meta, m);
        let (feature, feature_lists_truncated) = knn_feature_neighbors(&matrix.data, n);
        Self { temporal, feature, m, n, feature_lists_truncated }
    }

    pub fn len(&self) -> usize {
        self.temporal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temporal.is_empty()
    }

    /// Rows whose session holds no other segment.
    pub fn rows_without_temporal(&self) -> Vec<usize> {
        self.temporal.iter().enumerate().filter(|(_, l)| l.is_empty()).map(|(i, _)| i).collect()
    }

    /// Writes `row_index,kind,neighbor_rank,neighbor_index,distance`. Temporal
    /// distances are segment-index gaps; feature distances are Euclidean.
    pub fn write_debug_csv(&self, matrix: &FeatureMatrix, path: &Path) -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(File::create(path)?);
        writeln!(out, "row_index,kind,neighbor_rank,neighbor_index,distance")?;
        for (i, list) in self.temporal.iter().enumerate() {
            for (rank, &j) in list.iter().enumerate() {
                let gap = matrix.meta[i].segment_index.abs_diff(matrix.meta[j].segment_index);
                writeln!(out, "{i},temporal,{rank},{j},{gap}")?;
            }
        }
        for (i, list) in self.feature.iter().enumerate() {
            for (rank, &j) in list.iter().enumerate() {
                let d = squared_distance(matrix.data.row(i), matrix.data.row(j)).sqrt();
                writeln!(out, "{i},feature,{rank},{j},{d}")?;
            }
        }
        out.flush()
    }
}

/// For each row, the `m` rows of the same session closest in segment index,
/// nearest first; on equal gaps the earlier segment wins. Sessions with fewer
/// than `m + 1` segments give every other row of the session.
pub fn temporal_neighbors(meta: &[RowMeta], m: usize) -> Vec<Vec<usize>> {
    let mut by_session: HashMap<_, Vec<usize>> = HashMap::new();
    for (row, r) in meta.iter().enumerate() {
        by_session.entry(&r.session).or_default().push(row);
    }
    let mut out = vec![Vec::new(); meta.len()];
    for rows in by_session.values_mut() {
        rows.sort_by_key(|&r| (meta[r].segment_index, r));
        let idx = |p: usize| meta[rows[p]].segment_index;
        for pos in 0..rows.len() {
            let centre = idx(pos);
            let (mut left, mut right) = (pos, pos + 1);
            let list = &mut out[rows[pos]];
            while list.len() < m && (left > 0 || right < rows.len()) {
                let take_left = match (left > 0, right < rows.len()) {
                    (true, true) => centre - idx(left - 1) <= idx(right) - centre,
                    (l, _) => l,
                };
                if take_left {
                    left -= 1;
                    list.push(rows[left]);
                } else {
                    list.push(rows[right]);
                    right += 1;
                }
            }
        }
    }
    out
}

/// Brute-force k nearest neighbors by Euclidean distance, excluding the row
/// itself, ties broken by row index. Returns the lists and whether they had to
/// be truncated because the dataset holds `n` or fewer rows.
pub fn knn_feature_neighbors(data: &Matrix, n: usize) -> (Vec<Vec<usize>>, bool) {
    let rows = data.rows();
    let truncated = rows <= n;
    let take = n.min(rows.saturating_sub(1));
    let lists = (0..rows)
        .into_par_iter()
        .map(|i| {
            let x = data.row(i);
            let mut cand: Vec<(f64, usize)> =
                (0..rows).filter(|&j| j != i).map(|j| (squared_distance(x, data.row(j)), j)).collect();
            let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if take < cand.len() && take > 0 {
                cand.select_nth_unstable_by(take - 1, cmp);
                cand.truncate(take);
            }
            cand.sort_by(cmp);
            cand.truncate(take);
            cand.into_iter().map(|(_, j)| j).collect()
        })
        .collect();
    (lists, truncated)
}
