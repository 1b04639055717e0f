//! Clustering scores against ground-truth classes: contingency table, ACC
//! under the optimal one-to-one cluster→class matching, ARI and NMI.
//!
//! All scores are functions of the contingency table only.

use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("prediction has {pred} entries but truth has {truth}")]
    LengthMismatch { pred: usize, truth: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: u64, got: u64 },
}

/// `counts[i][j]` = number of samples in cluster `i` and class `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<u64>>,
    pub cluster_sizes: Vec<u64>,
    pub class_sizes: Vec<u64>,
    pub total: u64,
}

impl ContingencyTable {
    /// Builds a table from raw counts (rows = clusters, columns = classes).
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Self {
        let classes = counts.iter().map(Vec::len).max().unwrap_or(0);
        let counts: Vec<Vec<u64>> = counts
            .into_iter()
            .map(|mut r| {
                r.resize(classes, 0);
                r
            })
            .collect();
        let cluster_sizes: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
        let class_sizes: Vec<u64> = (0..classes).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
        let total = cluster_sizes.iter().sum();
        Self { counts, cluster_sizes, class_sizes, total }
    }

    pub fn num_clusters(&self) -> usize {
        self.counts.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_sizes.len()
    }

    /// Same partitions up to relabeling: every non-empty row and column has
    /// exactly one non-zero cell.
    fn is_relabeling(&self) -> bool {
        let rows_ok = self.counts.iter().all(|r| r.iter().filter(|&&c| c > 0).count() <= 1);
        let cols_ok = (0..self.num_classes()).all(|j| self.counts.iter().filter(|r| r[j] > 0).count() <= 1);
        rows_ok && cols_ok
    }
}

/// Cross-tabulates cluster ids against class ids. The table has
/// `max(pred) + 1` rows and `max(truth) + 1` columns.
pub fn contingency(pred: &[usize], truth: &[usize]) -> Result<ContingencyTable, MetricsError> {
    let rows = pred.iter().max().map_or(0, |m| m + 1);
    let cols = truth.iter().max().map_or(0, |m| m + 1);
    contingency_with_shape(pred, truth, rows, cols)
}

/// Like [`contingency`] but with at least `clusters × classes` cells, so empty
/// clusters or absent classes still get a row or column.
pub fn contingency_with_shape(
    pred: &[usize],
    truth: &[usize],
    clusters: usize,
    classes: usize,
) -> Result<ContingencyTable, MetricsError> {
    if pred.len() != truth.len() {
        return Err(MetricsError::LengthMismatch { pred: pred.len(), truth: truth.len() });
    }
    if pred.is_empty() {
        return Err(MetricsError::TooFewSamples { needed: 1, got: 0 });
    }
    let rows = clusters.max(pred.iter().max().map_or(0, |m| m + 1));
    let cols = classes.max(truth.iter().max().map_or(0, |m| m + 1));
    let mut counts = vec![vec![0u64; cols]; rows];
    for (&p, &t) in pred.iter().zip(truth) {
        counts[p][t] += 1;
    }
    Ok(ContingencyTable::from_counts(counts))
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method with
/// potentials, O(n³)). Returns the column assigned to each row.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    // 1-based arrays; column 0 is a virtual start
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r = owner[col0];
            let mut delta = inf;
            let mut col1 = 0;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let reduced = cost[r - 1][col - 1] - u[r] - v[col];
                if reduced < minv[col] {
                    minv[col] = reduced;
                    way[col] = col0;
                }
                if minv[col] < delta {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for col in 1..=n {
        if owner[col] > 0 {
            assignment[owner[col] - 1] = col - 1;
        }
    }
    assignment
}

/// Cluster → class mapping that maximizes matched counts; `None` for clusters
/// left without a class when there are more clusters than classes.
pub fn optimal_mapping(table: &ContingencyTable) -> Vec<Option<usize>> {
    let size = table.num_clusters().max(table.num_classes());
    let cost: Vec<Vec<i64>> = (0..size)
        .map(|i| (0..size).map(|j| -(table.counts.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0) as i64)).collect())
        .collect();
    let assignment = min_cost_assignment(&cost);
    (0..table.num_clusters()).map(|i| Some(assignment[i]).filter(|&j| j < table.num_classes())).collect()
}

/// Clustering accuracy: matched samples under the best one-to-one mapping, over n.
pub fn acc(table: &ContingencyTable) -> f64 {
    if table.total == 0 {
        return 0.0;
    }
    let matched: u64 = optimal_mapping(table)
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| table.counts[i][j]))
        .sum();
    matched as f64 / table.total as f64
}

fn pairs(n: u64) -> i128 {
    let n = n as i128;
    n * (n - 1) / 2
}

/// Adjusted Rand index, evaluated in exact integer arithmetic and divided once.
///
/// When the denominator vanishes (both partitions trivially agree or are
/// degenerate) the result is 1.0 if the partitions are identical, else 0.0.
pub fn ari(table: &ContingencyTable) -> Result<f64, MetricsError> {
    if table.total < 2 {
        return Err(MetricsError::TooFewSamples { needed: 2, got: table.total });
    }
    let index: i128 = table.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let a: i128 = table.cluster_sizes.iter().map(|&c| pairs(c)).sum();
    let b: i128 = table.class_sizes.iter().map(|&c| pairs(c)).sum();
    let n = pairs(table.total);
    // (index − ab/n) / ((a+b)/2 − ab/n), scaled by 2n
    let numerator = 2 * n * index - 2 * a * b;
    let denominator = n * (a + b) - 2 * a * b;
    if denominator == 0 {
        return Ok(if table.is_relabeling() { 1.0 } else { 0.0 });
    }
    Ok(numerator as f64 / denominator as f64)
}

/// Normalized mutual information with the geometric-mean normalization
/// `I(U;V) / sqrt(H(U)·H(V))`, natural log, `0·log 0 = 0`.
///
/// If either partition is a single block the denominator is zero; the result
/// is 1.0 when both are single blocks and 0.0 otherwise.
pub fn nmi(table: &ContingencyTable) -> f64 {
    let n = table.total as f64;
    let entropy = |sizes: &[u64]| -> f64 {
        sizes.iter().filter(|&&s| s > 0).map(|&s| s as f64 * (table.total as f64 / s as f64).ln()).sum()
    };
    let h_clusters = entropy(&table.cluster_sizes);
    let h_classes = entropy(&table.class_sizes);
    let denominator = (h_clusters * h_classes).sqrt();
    if table.total == 0 || denominator == 0.0 {
        let blocks = |s: &[u64]| s.iter().filter(|&&c| c > 0).count();
        let both_single = blocks(&table.cluster_sizes) <= 1 && blocks(&table.class_sizes) <= 1;
        return if both_single { 1.0 } else { 0.0 };
    }
    if table.is_relabeling() {
        return 1.0;
    }
    let mut mutual = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let ratio = (n * c as f64) / (table.cluster_sizes[i] as f64 * table.class_sizes[j] as f64);
            mutual += c as f64 * ratio.ln();
        }
    }
    (mutual / denominator).clamp(0.0, 1.0)
}

/// Contingency counts with rows reordered so matched classes sit on the diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Confusion {
    /// `[clusters × classes]`, rows in display order.
    pub matrix: Vec<Vec<u64>>,
    /// Original cluster id of each displayed row.
    pub row_clusters: Vec<usize>,
    /// Class matched to each original cluster id.
    pub mapping: Vec<Option<usize>>,
}

/// Orders rows by the class they are matched to; clusters without a class
/// follow in cluster-id order.
pub fn confusion_after_assignment(table: &ContingencyTable) -> Confusion {
    let mapping = optimal_mapping(table);
    let mut matched: Vec<(usize, usize)> =
        mapping.iter().enumerate().filter_map(|(i, j)| j.map(|j| (j, i))).collect();
    matched.sort_unstable();
    let mut row_clusters: Vec<usize> = matched.into_iter().map(|(_, i)| i).collect();
    row_clusters.extend(mapping.iter().enumerate().filter(|(_, j)| j.is_none()).map(|(i, _)| i));
    let matrix = row_clusters.iter().map(|&i| table.counts[i].clone()).collect();
    Confusion { matrix, row_clusters, mapping }
}

impl Confusion {
    /// CSV with a `cluster` column followed by one column per class name.
    pub fn to_csv_string(&self, class_names: &[String]) -> String {
        let mut s = format!("cluster,{}\n", class_names.join(","));
        for (row, &cluster) in self.matrix.iter().zip(&self.row_clusters) {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            s.push_str(&format!("{cluster},{}\n", cells.join(",")));
        }
        s
    }

    pub fn write_csv(&self, class_names: &[String], path: &Path) -> std::io::Result<()> {
        fs::write(path, self.to_csv_string(class_names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(pred: &[usize], truth: &[usize]) -> ContingencyTable {
        contingency(pred, truth).unwrap()
    }

    #[test]
    fn contingency_examples() {
        assert_eq!(table(&[0, 0, 1], &[0, 0, 1]).counts, vec![vec![2, 0], vec![0, 1]]);
        assert_eq!(table(&[0, 0], &[1, 1]).counts, vec![vec![0, 2]]);
        assert_eq!(table(&[0, 1, 0, 1], &[0, 0, 1, 1]).counts, vec![vec![1, 1], vec![1, 1]]);
        assert_eq!(contingency(&[0], &[0, 1]), Err(MetricsError::LengthMismatch { pred: 1, truth: 2 }));
    }

    #[test]
    fn acc_examples() {
        assert_eq!(acc(&table(&[0, 1, 2], &[0, 1, 2])), 1.0);
        assert_eq!(acc(&table(&[0, 0, 1, 1], &[1, 1, 0, 0])), 1.0);
        assert_eq!(acc(&ContingencyTable::from_counts(vec![vec![5, 1], vec![2, 4]])), 0.75);
    }

    #[test]
    fn ari_examples() {
        assert_eq!(ari(&table(&[0, 0, 1, 1, 2], &[0, 0, 1, 1, 2])).unwrap(), 1.0);
        // 2·6·0 − 2·2·2 over 6·4 − 2·2·2
        assert_eq!(ari(&table(&[0, 1, 0, 1], &[0, 0, 1, 1])).unwrap(), -0.5);
        let a = ari(&table(&[0, 0, 1, 2, 2, 1], &[0, 0, 0, 1, 1, 1])).unwrap();
        let b = ari(&table(&[2, 2, 0, 1, 1, 0], &[0, 0, 0, 1, 1, 1])).unwrap();
        assert_eq!(a, b);
        assert_eq!(ari(&table(&[0], &[0])), Err(MetricsError::TooFewSamples { needed: 2, got: 1 }));
    }

    #[test]
    fn ari_degenerate_denominator() {
        // every sample its own cluster and class
        assert_eq!(ari(&table(&[0, 1, 2], &[2, 0, 1])).unwrap(), 1.0);
        // one cluster against one class
        assert_eq!(ari(&table(&[0, 0, 0], &[0, 0, 0])).unwrap(), 1.0);
        // all singletons against one block: denominator 0, partitions differ
        assert_eq!(ari(&table(&[0, 1, 2], &[0, 0, 0])).unwrap(), 0.0);
    }

    #[test]
    fn nmi_examples() {
        assert_eq!(nmi(&table(&[0, 0, 1, 1], &[0, 0, 1, 1])), 1.0);
        assert_eq!(nmi(&ContingencyTable::from_counts(vec![vec![1, 1], vec![1, 1]])), 0.0);
        // I = 2ln(4/3) + ln(2/3) + ln 2; H_rows = 4 ln 2; H_cols = 3 ln(4/3) + ln 4
        let i = 2.0 * (4.0f64 / 3.0).ln() + (2.0f64 / 3.0).ln() + 2.0f64.ln();
        let hr = 4.0 * 2.0f64.ln();
        let hc = 3.0 * (4.0f64 / 3.0).ln() + 4.0f64.ln();
        let expect = i / (hr * hc).sqrt();
        let got = nmi(&ContingencyTable::from_counts(vec![vec![2, 0], vec![1, 1]]));
        assert!((got - expect).abs() < 1e-12);
        assert!((got - 0.34559).abs() < 1e-4);
        assert_eq!(nmi(&table(&[0, 0], &[0, 0])), 1.0);
        assert_eq!(nmi(&table(&[0, 0, 0, 0], &[0, 1, 0, 1])), 0.0);
    }

    #[test]
    fn confusion_examples() {
        let c = confusion_after_assignment(&table(&[1, 1, 0, 2], &[0, 0, 1, 2]));
        assert_eq!(c.matrix, vec![vec![2, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let c = confusion_after_assignment(&ContingencyTable::from_counts(vec![vec![2, 4], vec![5, 1]]));
        assert_eq!(c.matrix, vec![vec![5, 1], vec![2, 4]]);
        assert_eq!(c.mapping, vec![Some(1), Some(0)]);
        let c = confusion_after_assignment(&table(&[0, 1, 2, 3], &[0, 0, 1, 1]));
        assert_eq!(c.matrix.len(), 4);
        assert!(c.matrix.iter().all(|r| r.len() == 2));
        assert_eq!(c.mapping.iter().filter(|m| m.is_none()).count(), 2);
    }

    #[test]
    fn hungarian_small() {
        let cost = vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]];
        let a = min_cost_assignment(&cost);
        let total: i64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        assert_eq!(total, 5);
    }

    fn relabel(labels: &[usize], perm: &[usize]) -> Vec<usize> {
        labels.iter().map(|&l| perm[l]).collect()
    }

    proptest! {
        #[test]
        fn metrics_invariant_under_relabeling(
            pairs in proptest::collection::vec((0usize..4, 0usize..3), 2..60),
            cp in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
            tp in Just(vec![0usize, 1, 2]).prop_shuffle(),
        ) {
            let (pred, truth): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let t0 = contingency_with_shape(&pred, &truth, 4, 3).unwrap();
            let t1 = contingency_with_shape(&relabel(&pred, &cp), &relabel(&truth, &tp), 4, 3).unwrap();
            prop_assert_eq!(acc(&t0), acc(&t1));
            prop_assert_eq!(ari(&t0).unwrap(), ari(&t1).unwrap());
            prop_assert!((nmi(&t0) - nmi(&t1)).abs() < 1e-12);
        }

        #[test]
        fn self_agreement_is_one(labels in proptest::collection::vec(0usize..5, 2..50)) {
            let t = table(&labels, &labels);
            prop_assert_eq!(acc(&t), 1.0);
            prop_assert_eq!(ari(&t).unwrap(), 1.0);
            prop_assert_eq!(nmi(&t), 1.0);
        }
    }
}
