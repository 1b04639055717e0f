use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;

use super::grad::{backward, batch_loss, Objective};
use super::{init_network, LossWeights, MlpParams, ModelError};
use crate::features::{FeatureMatrix, Standardizer};
use crate::neighbors::NeighborhoodIndex;
use crate::{seed, Matrix};

/// Minimum drop in validation loss that counts as an improvement.
pub const IMPROVEMENT_THRESHOLD: f64 = 1e-6;

/// Which loss terms are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Reconstruction only.
    AeOnly,
    /// Reconstruction plus temporal coherence.
    TcAe,
    /// Reconstruction plus locality preservation.
    LpAe,
    /// All three terms.
    Joint,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::AeOnly, Mode::TcAe, Mode::LpAe, Mode::Joint];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::AeOnly => "AE_ONLY",
            Mode::TcAe => "TC_AE",
            Mode::LpAe => "LP_AE",
            Mode::Joint => "JOINT",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown mode `{s}` (expected AE_ONLY, TC_AE, LP_AE or JOINT)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub alpha: f64,
    pub beta: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Approximate share of sessions held out for early stopping.
    pub val_fraction: f64,
    pub seed: u64,
    pub mode: Mode,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            beta: 0.3,
            learning_rate: 0.01,
            batch_size: 32,
            max_epochs: 500,
            patience: 10,
            val_fraction: 0.15,
            seed: 0,
            mode: Mode::Joint,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        LossWeights::joint(self.alpha, self.beta)?;
        let bad = |msg: &str| Err(ModelError::InvalidConfig(msg.to_string()));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and non-negative");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1");
        }
        if self.patience == 0 {
            return bad("patience must be at least 1");
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return bad("val_fraction must lie strictly between 0 and 1");
        }
        Ok(())
    }

    pub fn weights(&self) -> Result<LossWeights, ModelError> {
        LossWeights::for_mode(self.mode, self.alpha, self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 0 is the untrained network.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    /// Parameters from the best validation epoch.
    pub params: MlpParams,
    pub standardizer: Standardizer,
    pub config: TrainingConfig,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stopped_epoch: usize,
}

impl TrainedModel {
    /// Embeds raw feature rows: standardizes them with the stored statistics first.
    pub fn encode(&self, data: &Matrix) -> Result<Matrix, ModelError> {
        let standardized = self
            .standardizer
            .apply(data)
            .map_err(|_| ModelError::DimMismatch { expected: self.standardizer.dim(), found: data.cols() })?;
        encode_matrix(&self.params, &standardized)
    }

    /// Embeds rows that are already standardized.
    pub fn encode_standardized(&self, data: &Matrix) -> Result<Matrix, ModelError> {
        encode_matrix(&self.params, data)
    }
}

pub fn encode(model: &TrainedModel, data: &Matrix) -> Result<Matrix, ModelError> {
    model.encode(data)
}

pub(crate) fn encode_matrix(params: &MlpParams, data: &Matrix) -> Result<Matrix, ModelError> {
    if data.cols() != params.input_dim() {
        return Err(ModelError::DimMismatch { expected: params.input_dim(), found: data.cols() });
    }
    let mut out = Matrix::zeros(data.rows(), params.embedding_dim());
    for (i, row) in data.iter_rows().enumerate() {
        out.row_mut(i).copy_from_slice(&params.encode(row)?);
    }
    Ok(out)
}

/// Splits rows into (train, validation) by whole sessions. Sessions are
/// shuffled and the first `round(val_fraction · sessions)` (at least one, and
/// never all) go to validation. With a single session both parts are the full set.
fn split_by_session(features: &FeatureMatrix, val_fraction: f64, rng: &mut impl rand::Rng) -> (Vec<usize>, Vec<usize>) {
    let mut sessions: BTreeMap<_, Vec<usize>> = BTreeMap::new();
    for (row, m) in features.meta.iter().enumerate() {
        sessions.entry(&m.session).or_default().push(row);
    }
    let mut groups: Vec<Vec<usize>> = sessions.into_values().collect();
    if groups.len() < 2 {
        let all: Vec<usize> = (0..features.len()).collect();
        return (all.clone(), all);
    }
    groups.shuffle(rng);
    let n_val = ((val_fraction * groups.len() as f64).round() as usize).clamp(1, groups.len() - 1);
    let mut val: Vec<usize> = groups[..n_val].concat();
    let mut train: Vec<usize> = groups[n_val..].concat();
    val.sort_unstable();
    train.sort_unstable();
    (train, val)
}

/// Mini-batch SGD on the weighted objective with early stopping.
///
/// `features` must already be standardized (with `standardizer`, which is
/// stored in the model) and `neighbors` must index its rows. Validation loss
/// is evaluated after every epoch; training stops once it has not improved by
/// more than [`IMPROVEMENT_THRESHOLD`] for `patience` epochs, and the best
/// parameters seen (including the untrained ones) are returned.
pub fn train(
    features: &FeatureMatrix,
    neighbors: &NeighborhoodIndex,
    layer_sizes: &[usize],
    leaky_slope: f64,
    standardizer: &Standardizer,
    config: &TrainingConfig,
) -> Result<TrainedModel, ModelError> {
    config.validate()?;
    if features.is_empty() {
        return Err(ModelError::EmptyBatch);
    }
    if neighbors.len() != features.len() {
        return Err(ModelError::DimMismatch { expected: features.len(), found: neighbors.len() });
    }
    let obj = Objective { data: &features.data, neighbors, weights: config.weights()? };
    let mut params = init_network(layer_sizes, leaky_slope, config.seed)?;
    if params.input_dim() != features.dim() {
        return Err(ModelError::DimMismatch { expected: params.input_dim(), found: features.dim() });
    }
    let mut rng = seed::rng(seed::derive(config.seed, &[1]));
    let (train_rows, val_rows) = split_by_session(features, config.val_fraction, &mut rng);
    let mut order = train_rows.clone();

    let diverged = |epoch| ModelError::Diverged { epoch, learning_rate: config.learning_rate };
    let evaluate = |p: &MlpParams, epoch: usize| -> Result<EpochRecord, ModelError> {
        let rec = EpochRecord {
            epoch,
            train_loss: batch_loss(p, &obj, &train_rows)?,
            val_loss: batch_loss(p, &obj, &val_rows)?,
        };
        if rec.train_loss.is_finite() && rec.val_loss.is_finite() {
            Ok(rec)
        } else {
            Err(diverged(epoch))
        }
    };

    let mut history = vec![evaluate(&params, 0)?];
    let mut best = (0usize, history[0].val_loss, params.clone());
    let mut stopped = 0;
    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let (grads, loss) = backward(&params, &obj, batch)?;
            if !loss.is_finite() {
                return Err(diverged(epoch));
            }
            for (p, g) in params.values_mut().zip(grads.values()) {
                *p -= config.learning_rate * g;
            }
        }
        if !params.is_finite() {
            return Err(diverged(epoch));
        }
        let rec = evaluate(&params, epoch)?;
        history.push(rec);
        stopped = epoch;
        if rec.val_loss < best.1 - IMPROVEMENT_THRESHOLD {
            best = (epoch, rec.val_loss, params.clone());
        } else if epoch - best.0 >= config.patience {
            break;
        }
    }

    let (best_epoch, _, best_params) = best;
    Ok(TrainedModel {
        params: best_params,
        standardizer: standardizer.clone(),
        config: config.clone(),
        history,
        best_epoch,
        stopped_epoch: stopped,
    })
}
