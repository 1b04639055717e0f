use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{DatasetSource, ExperimentConfig, Method};
use super::crossval::{crossval_split, Fold};
use super::report::{RunReport, RunRow};
use super::ExperimentError;
use crate::autoencoder::{train, TrainingConfig};
use crate::baselines::pca_fit;
use crate::cluster::{kmeans, KMeansConfig};
use crate::features::{FeatureError, FeatureMatrix, Standardizer};
use crate::ingest::{generate_synthetic, load_canonical_csv, load_pamap2, segment_set, CsvSchema, Pamap2Options, SessionSet};
use crate::metrics::{acc, ari, confusion_after_assignment, contingency_with_shape, nmi};
use crate::neighbors::NeighborhoodIndex;
use crate::{baselines, seed, Error, Matrix};

/// Loads the configured dataset and applies the channel selection.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<SessionSet, Error> {
    let set = match &cfg.dataset {
        DatasetSource::Csv(path) => {
            let schema = CsvSchema { sample_rate: cfg.sample_rate, ..CsvSchema::default() };
            load_canonical_csv(path, &schema)?
        }
        DatasetSource::Pamap2(path) => {
            let options = Pamap2Options { sample_rate: cfg.sample_rate.unwrap_or(Pamap2Options::default().sample_rate) };
            load_pamap2(path, &options)?
        }
        DatasetSource::Synthetic(synth) => generate_synthetic(synth, cfg.seed)?,
    };
    Ok(match &cfg.channels {
        Some(channels) => set.select_channels(channels)?,
        None => set,
    })
}

/// Everything derived from one fold's training rows.
#[derive(Debug, Clone)]
pub struct FoldData {
    pub fold: Fold,
    pub standardizer: Standardizer,
    /// All rows (train and test), standardized with the training statistics.
    pub standardized: Matrix,
    /// The standardized training rows with their metadata.
    pub train_features: FeatureMatrix,
    /// Neighbor lists over `train_features` rows.
    pub neighbors: NeighborhoodIndex,
}

/// Fits the standardizer and neighborhoods on the fold's training rows only.
pub fn prepare_fold(features: &FeatureMatrix, fold: &Fold, m: usize, n: usize) -> Result<FoldData, FeatureError> {
    let standardizer = Standardizer::fit(&features.data, &fold.train)?;
    let standardized = standardizer.apply(&features.data)?;
    let train_features = FeatureMatrix {
        data: standardized.select_rows(&fold.train),
        meta: fold.train.iter().map(|&r| features.meta[r].clone()).collect(),
    };
    let neighbors = NeighborhoodIndex::build(&train_features, m, n);
    Ok(FoldData { fold: fold.clone(), standardizer, standardized, train_features, neighbors })
}

struct Embedding {
    points: Matrix,
    epochs: usize,
    best_epoch: usize,
}

fn embed(cfg: &ExperimentConfig, data: &FoldData, method: Method, fold_index: usize) -> Result<Embedding, Error> {
    match method {
        Method::Pca => {
            let d_out = cfg.embedding_dim().min(data.train_features.len()).min(data.train_features.dim());
            let model = pca_fit(&data.train_features.data, d_out, baselines::DEFAULT_TOL, baselines::DEFAULT_MAX_ITERS)?;
            Ok(Embedding { points: model.transform(&data.standardized)?, epochs: 0, best_epoch: 0 })
        }
        Method::Autoencoder(mode) => {
            let training = TrainingConfig {
                mode,
                seed: seed::derive(cfg.seed, &[seed::stream::TRAIN, fold_index as u64]),
                ..cfg.training.clone()
            };
            let mut sizes = vec![data.train_features.dim()];
            sizes.extend(&cfg.layer_sizes);
            let model = train(&data.train_features, &data.neighbors, &sizes, cfg.leaky_slope, &data.standardizer, &training)?;
            Ok(Embedding {
                points: model.encode_standardized(&data.standardized)?,
                epochs: model.stopped_epoch,
                best_epoch: model.best_epoch,
            })
        }
    }
}

struct JobOutput {
    rows: Vec<RunRow>,
}

fn run_job(
    cfg: &ExperimentConfig,
    data: &FoldData,
    labels: &[usize],
    classes: usize,
    tn: usize,
    fold_index: usize,
    method: Method,
) -> Result<JobOutput, ExperimentError> {
    let job_error = |k: Option<usize>| move |e: Error| ExperimentError::Job { fold: fold_index, method, k, source: Box::new(e) };
    let started = Instant::now();
    let embedding = embed(cfg, data, method, fold_index).map_err(job_error(None))?;
    let embed_seconds = started.elapsed().as_secs_f64();
    let scored: Vec<usize> = if cfg.score_all { (0..labels.len()).collect() } else { data.fold.test.clone() };
    let truth: Vec<usize> = scored.iter().map(|&r| labels[r]).collect();
    let mut rows = Vec::with_capacity(cfg.k_offsets.len());
    for &offset in &cfg.k_offsets {
        let k = tn + offset;
        let started = Instant::now();
        let result = (|| -> Result<RunRow, Error> {
            let km = KMeansConfig { restarts: cfg.restarts, ..KMeansConfig::new(k) };
            let (model, assignment) =
                kmeans(&embedding.points, &km, seed::derive(cfg.seed, &[seed::stream::KMEANS, fold_index as u64, k as u64]))?;
            let pred: Vec<usize> = scored.iter().map(|&r| assignment.labels[r]).collect();
            let table = contingency_with_shape(&pred, &truth, k, classes)?;
            Ok(RunRow {
                fold: fold_index,
                method,
                k,
                k_offset: offset,
                acc: acc(&table),
                ari: ari(&table)?,
                nmi: nmi(&table),
                inertia: model.inertia,
                epochs: embedding.epochs,
                best_epoch: embedding.best_epoch,
                train_rows: data.fold.train.len(),
                scored_rows: scored.len(),
                wall_seconds: embed_seconds + started.elapsed().as_secs_f64(),
                confusion: confusion_after_assignment(&table),
            })
        })();
        rows.push(result.map_err(job_error(Some(k)))?);
    }
    Ok(JobOutput { rows })
}

/// Runs the full cross-validated sweep. Folds are prepared in parallel, then
/// every (fold, method) job runs in parallel; rows are ordered by fold, then
/// by the configured method order, then by k.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport, Error> {
    cfg.validate()?;
    let set = load_dataset(cfg)?;
    let segmentation = segment_set(&set, cfg.window_seconds, cfg.step_seconds)?;
    let features = FeatureMatrix::from_segments(&segmentation.segments)?;
    let labels = features.labels();
    let tn = labels.iter().collect::<BTreeSet<_>>().len();
    let classes = set.class_names.len().max(labels.iter().max().map_or(0, |m| m + 1));
    let folds = crossval_split(&features.meta, cfg.folds, cfg.seed)?;

    let prepared: Vec<FoldData> = folds
        .par_iter()
        .map(|f| prepare_fold(&features, f, cfg.m, cfg.n))
        .collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, Method)> =
        (0..prepared.len()).flat_map(|f| cfg.methods.iter().map(move |&m| (f, m))).collect();
    let outputs: Vec<JobOutput> = jobs
        .par_iter()
        .map(|&(f, method)| run_job(cfg, &prepared[f], &labels, classes, tn, f, method))
        .collect::<Result<_, _>>()?;

    let mut class_names = set.class_names.clone();
    while class_names.len() < classes {
        class_names.push(format!("class{}", class_names.len()));
    }
    Ok(RunReport {
        config: cfg.clone(),
        tn,
        class_names,
        segments: features.len(),
        skipped_sessions: segmentation.skipped_sessions.len(),
        rows: outputs.into_iter().flat_map(|o| o.rows).collect(),
    })
}
