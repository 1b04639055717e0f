//! Fully connected LeakyReLU autoencoder trained on a weighted sum of
//! reconstruction, temporal-coherence and locality-preserving losses.
//!
//! The decoder mirrors the encoder: encoder sizes `[D, h1, …, hk]` give decoder
//! sizes `[hk, …, h1, D]`. Every layer except the last decoder layer applies
//! LeakyReLU, so the embedding is the activated output of the last encoder
//! layer and the reconstruction is an unbounded affine output.

mod checkpoint;
mod grad;
mod gradcheck;
mod loss;
mod network;
mod train;

use std::path::PathBuf;

use thiserror::Error;

pub use checkpoint::CHECKPOINT_MAGIC;
pub use grad::{backward, batch_loss, sample_losses, Objective};
pub use gradcheck::{check_gradients, run_gradient_suite, GradCheckCase, GradCheckReport, GradCheckTolerance};
pub use loss::{loss_ae, loss_joint, loss_lp, loss_tc, LossWeights, SampleLosses};
pub use network::{init_network, Forward, Layer, MlpParams, DEFAULT_LEAKY_SLOPE};
pub use train::{encode, train, EpochRecord, Mode, TrainedModel, TrainingConfig, IMPROVEMENT_THRESHOLD};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid layer sizes {0:?}: need at least two positive sizes")]
    InvalidShape(Vec<usize>),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("invalid loss weights alpha={alpha}, beta={beta}: need alpha, beta >= 0 and alpha + beta <= 1")]
    InvalidWeights { alpha: f64, beta: f64 },
    #[error("empty batch")]
    EmptyBatch,
    #[error("empty neighbor list")]
    EmptyNeighborhood,
    #[error("training diverged at epoch {epoch} (learning rate {learning_rate}): loss is not finite")]
    Diverged { epoch: usize, learning_rate: f64 },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: malformed checkpoint: {reason}")]
    Checkpoint { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
