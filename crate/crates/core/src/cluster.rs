//! k-means with k-means++ seeding, Lloyd iterations followed by single-point
//! refinement, and multi-restart selection by inertia.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::matrix::squared_distance;
use crate::{seed, Matrix};

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("no points to cluster")]
    EmptyInput,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("restarts must be at least 1")]
    InvalidRestarts,
    #[error("k = {k} exceeds the {distinct} distinct points")]
    TooFewDistinctPoints { k: usize, distinct: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        Self { k, restarts: 10, max_iters: 300, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    /// `[k × dim]`.
    pub centroids: Matrix,
    /// Sum of squared distances from points to their assigned centroid.
    pub inertia: f64,
    pub k: usize,
    pub restarts_run: usize,
    /// Final inertia of each restart, in restart order.
    pub restart_inertias: Vec<f64>,
    /// Inertia after each assignment step of the selected restart, plus the
    /// refined inertia when refinement improved it.
    pub inertia_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
}

fn distinct_count(points: &Matrix) -> usize {
    let mut rows: Vec<Vec<u64>> = points.iter_rows().map(|r| r.iter().map(|v| (v + 0.0).to_bits()).collect()).collect();
    rows.sort_unstable();
    rows.dedup();
    rows.len()
}

/// k-means++ seeding: the first centroid is a uniformly chosen point, each
/// following one is drawn with probability proportional to its squared
/// distance from the nearest centroid chosen so far.
pub fn kmeans_pp_init(points: &Matrix, k: usize, rng: &mut impl Rng) -> Result<Matrix, ClusterError> {
    if points.rows() == 0 {
        return Err(ClusterError::EmptyInput);
    }
    if k == 0 {
        return Err(ClusterError::InvalidK);
    }
    let distinct = distinct_count(points);
    if k > distinct {
        return Err(ClusterError::TooFewDistinctPoints { k, distinct });
    }
    let n = points.rows();
    let mut centroids = Matrix::zeros(k, points.cols());
    let first = rng.random_range(0..n);
    centroids.row_mut(0).copy_from_slice(points.row(first));
    let mut nearest: Vec<f64> = points.iter_rows().map(|p| squared_distance(p, points.row(first))).collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        // fall back to the last point with positive weight if rounding overshoots
        let mut chosen = nearest.iter().rposition(|&d| d > 0.0).expect("k ≤ distinct points leaves a positive weight");
        for (i, &d) in nearest.iter().enumerate() {
            acc += d;
            if d > 0.0 && acc > target {
                chosen = i;
                break;
            }
        }
        centroids.row_mut(c).copy_from_slice(points.row(chosen));
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(squared_distance(points.row(i), points.row(chosen)));
        }
    }
    Ok(centroids)
}

/// Nearest centroid per point (ties → lowest id) and the squared distance to it.
fn assign(points: &Matrix, centroids: &Matrix) -> (Vec<usize>, Vec<f64>) {
    points
        .iter_rows()
        .map(|p| {
            let mut best = (0, f64::INFINITY);
            for (c, centroid) in centroids.iter_rows().enumerate() {
                let d = squared_distance(p, centroid);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .unzip()
}

/// Centroid means; an emptied centroid moves onto the point currently farthest
/// from its own centroid (each point used at most once).
fn update(points: &Matrix, labels: &[usize], dists: &[f64], k: usize) -> Matrix {
    let dim = points.cols();
    let mut sums = Matrix::zeros(k, dim);
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter_rows().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums.row_mut(l).iter_mut().zip(p) {
            *s += v;
        }
    }
    let mut taken = vec![false; points.rows()];
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            let n = count as f64;
            sums.row_mut(c).iter_mut().for_each(|s| *s /= n);
            continue;
        }
        let far = (0..points.rows())
            .filter(|&i| !taken[i])
            .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
            .expect("k ≤ number of points");
        taken[far] = true;
        sums.row_mut(c).copy_from_slice(points.row(far));
    }
    sums
}

struct Run {
    centroids: Matrix,
    labels: Vec<usize>,
    inertia: f64,
    trace: Vec<f64>,
}

fn lloyd(points: &Matrix, mut centroids: Matrix, cfg: &KMeansConfig) -> Run {
    let (mut labels, mut dists) = assign(points, &centroids);
    let mut trace = vec![dists.iter().sum()];
    for _ in 0..cfg.max_iters {
        let next = update(points, &labels, &dists, cfg.k);
        let shift = centroids
            .iter_rows()
            .zip(next.iter_rows())
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        let (new_labels, new_dists) = assign(points, &centroids);
        let changed = new_labels != labels;
        labels = new_labels;
        dists = new_dists;
        trace.push(dists.iter().sum());
        if !changed || shift < cfg.tol {
            break;
        }
    }
    refine(points, &mut labels, &mut centroids, cfg);
    let inertia = points.iter_rows().zip(&labels).map(|(p, &l)| squared_distance(p, centroids.row(l))).sum();
    if inertia < *trace.last().unwrap_or(&f64::INFINITY) {
        trace.push(inertia);
    }
    Run { inertia, centroids, labels, trace }
}

fn means(points: &Matrix, labels: &[usize], k: usize) -> (Matrix, Vec<usize>) {
    let mut sums = Matrix::zeros(k, points.cols());
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter_rows().zip(labels) {
        counts[l] += 1;
        sums.row_mut(l).iter_mut().zip(p).for_each(|(s, v)| *s += v);
    }
    for (c, &n) in counts.iter().enumerate() {
        if n > 0 {
            sums.row_mut(c).iter_mut().for_each(|s| *s /= n as f64);
        }
    }
    (sums, counts)
}

/// Single-point moves after Lloyd has converged: a point moves to the cluster
/// that lowers the total inertia the most, accounting for both centroid shifts.
/// Passes repeat until no move helps.
fn refine(points: &Matrix, labels: &mut [usize], centroids: &mut Matrix, cfg: &KMeansConfig) {
    for _ in 0..cfg.max_iters {
        let (mut cents, mut counts) = means(points, labels, cfg.k);
        let mut moved = false;
        for (i, p) in points.iter_rows().enumerate() {
            let from = labels[i];
            if counts[from] < 2 {
                continue;
            }
            let nf = counts[from] as f64;
            let removal = nf / (nf - 1.0) * squared_distance(p, cents.row(from));
            let mut best = (from, removal);
            for to in (0..cfg.k).filter(|&c| c != from && counts[c] > 0) {
                let nt = counts[to] as f64;
                let addition = nt / (nt + 1.0) * squared_distance(p, cents.row(to));
                if addition < best.1 {
                    best = (to, addition);
                }
            }
            let (to, addition) = best;
            if to == from || removal - addition <= 1e-12 * removal {
                continue;
            }
            let nt = counts[to] as f64;
            for (c, x) in cents.row_mut(from).iter_mut().zip(p) {
                *c = (*c * nf - x) / (nf - 1.0);
            }
            for (c, x) in cents.row_mut(to).iter_mut().zip(p) {
                *c = (*c * nt + x) / (nt + 1.0);
            }
            counts[from] -= 1;
            counts[to] += 1;
            labels[i] = to;
            moved = true;
        }
        if !moved {
            break;
        }
    }
    let (cents, counts) = means(points, labels, cfg.k);
    for c in (0..cfg.k).filter(|&c| counts[c] > 0) {
        centroids.row_mut(c).copy_from_slice(cents.row(c));
    }
}

/// Runs `cfg.restarts` seeded restarts (restart `r` uses seed `seed + r`) and
/// keeps the lowest inertia, ties going to the earliest restart.
pub fn kmeans(points: &Matrix, cfg: &KMeansConfig, seed_value: u64) -> Result<(ClusterModel, ClusterAssignment), ClusterError> {
    if points.rows() == 0 {
        return Err(ClusterError::EmptyInput);
    }
    if cfg.k == 0 {
        return Err(ClusterError::InvalidK);
    }
    if cfg.restarts == 0 {
        return Err(ClusterError::InvalidRestarts);
    }
    let runs = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed::rng(seed_value.wrapping_add(r as u64));
            let init = kmeans_pp_init(points, cfg.k, &mut rng)?;
            Ok(lloyd(points, init, cfg))
        })
        .collect::<Result<Vec<Run>, ClusterError>>()?;
    let restart_inertias: Vec<f64> = runs.iter().map(|r| r.inertia).collect();
    let best = (0..runs.len())
        .min_by(|&a, &b| restart_inertias[a].total_cmp(&restart_inertias[b]).then(a.cmp(&b)))
        .expect("at least one restart");
    let run = runs.into_iter().nth(best).expect("index in range");
    Ok((
        ClusterModel {
            centroids: run.centroids,
            inertia: run.inertia,
            k: cfg.k,
            restarts_run: cfg.restarts,
            restart_inertias,
            inertia_trace: run.trace,
        },
        ClusterAssignment { labels: run.labels },
    ))
}

/// Writes `row_index,cluster_id,distance_to_centroid`.
pub fn write_assignment_csv(
    points: &Matrix,
    model: &ClusterModel,
    assignment: &ClusterAssignment,
    path: &Path,
) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    writeln!(out, "row_index,cluster_id,distance_to_centroid")?;
    for (i, &c) in assignment.labels.iter().enumerate() {
        let d = squared_distance(points.row(i), model.centroids.row(c)).sqrt();
        writeln!(out, "{i},{c},{d}")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn k_one_gives_global_mean() {
        let pts = Matrix::from_rows(&[[0.0, 0.0], [2.0, 0.0], [4.0, 3.0]]);
        let (m, a) = kmeans(&pts, &KMeansConfig::new(1), 0).unwrap();
        assert_eq!(m.centroids.row(0), &[2.0, 1.0]);
        // total variance × N = Σ‖p − mean‖²
        assert!((m.inertia - (5.0 + 1.0 + 8.0)).abs() < 1e-12);
        assert_eq!(a.labels, vec![0, 0, 0]);
    }

    #[test]
    fn k_equal_n_has_zero_inertia() {
        let pts = Matrix::from_rows(&[[0.0], [5.0], [9.0], [20.0]]);
        let (m, a) = kmeans(&pts, &KMeansConfig::new(4), 3).unwrap();
        assert_eq!(m.inertia, 0.0);
        let mut labels = a.labels.clone();
        labels.sort();
        assert_eq!(labels, vec![0, 1, 2, 3]);
    }

    #[test]
    fn two_blobs() {
        let pts = Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]]);
        let (m, a) = kmeans(&pts, &KMeansConfig::new(2), 0).unwrap();
        assert_eq!(a.labels[0], a.labels[1]);
        assert_eq!(a.labels[2], a.labels[3]);
        assert_ne!(a.labels[0], a.labels[2]);
        assert!((m.inertia - 1.0).abs() < 1e-12);
        let mut cs: Vec<Vec<f64>> = m.centroids.iter_rows().map(<[f64]>::to_vec).collect();
        cs.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(cs, vec![vec![0.0, 0.5], vec![10.0, 0.5]]);
    }

    #[test]
    fn init_edge_cases() {
        let pts = Matrix::from_rows(&[[1.0], [2.0], [3.0]]);
        let one = kmeans_pp_init(&pts, 1, &mut seed::rng(1)).unwrap();
        assert!([1.0, 2.0, 3.0].contains(&one.get(0, 0)));
        let all = kmeans_pp_init(&pts, 3, &mut seed::rng(1)).unwrap();
        let mut v: Vec<f64> = all.as_slice().to_vec();
        v.sort_by(f64::total_cmp);
        assert_eq!(v, vec![1.0, 2.0, 3.0]);
        assert_eq!(kmeans_pp_init(&pts, 3, &mut seed::rng(9)).unwrap(), kmeans_pp_init(&pts, 3, &mut seed::rng(9)).unwrap());
        let dup = Matrix::from_rows(&[[1.0], [1.0], [2.0]]);
        assert_eq!(kmeans_pp_init(&dup, 3, &mut seed::rng(0)), Err(ClusterError::TooFewDistinctPoints { k: 3, distinct: 2 }));
        assert_eq!(kmeans(&Matrix::zeros(0, 2), &KMeansConfig::new(1), 0), Err(ClusterError::EmptyInput));
    }

    #[test]
    fn reseeds_empty_cluster_onto_farthest_point() {
        let pts = Matrix::from_rows(&[[0.0], [1.0], [10.0]]);
        let labels = vec![0, 0, 0];
        let dists = vec![1.0, 0.0, 81.0];
        let c = update(&pts, &labels, &dists, 2);
        assert_eq!(c.row(0), &[11.0 / 3.0]);
        assert_eq!(c.row(1), &[10.0]);
    }

    fn points_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
        proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 2), 3..30)
    }

    proptest! {
        #[test]
        fn inertia_never_increases_and_best_restart_wins(pts in points_strategy(), k in 1usize..4, seed_value in 0u64..100) {
            let m = Matrix::from_rows(&pts);
            let cfg = KMeansConfig { restarts: 4, ..KMeansConfig::new(k.min(pts.len())) };
            let (model, assignment) = kmeans(&m, &cfg, seed_value).unwrap();
            for w in model.inertia_trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9 * w[0].max(1.0));
            }
            prop_assert!(model.restart_inertias.iter().all(|&r| model.inertia <= r));
            prop_assert!(assignment.labels.iter().all(|&l| l < cfg.k));
            prop_assert!(model.inertia >= 0.0);
        }

        #[test]
        fn translation_invariant(pts in points_strategy(), shift in proptest::collection::vec(-100.0f64..100.0, 2)) {
            let a = Matrix::from_rows(&pts);
            let moved: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0] + shift[0], p[1] + shift[1]]).collect();
            let b = Matrix::from_rows(&moved);
            let cfg = KMeansConfig::new(2);
            let (ma, aa) = kmeans(&a, &cfg, 5).unwrap();
            let (mb, ab) = kmeans(&b, &cfg, 5).unwrap();
            prop_assert_eq!(aa, ab);
            for (ca, cb) in ma.centroids.iter_rows().zip(mb.centroids.iter_rows()) {
                prop_assert!((ca[0] + shift[0] - cb[0]).abs() < 1e-9);
                prop_assert!((ca[1] + shift[1] - cb[1]).abs() < 1e-9);
            }
        }
    }
}
