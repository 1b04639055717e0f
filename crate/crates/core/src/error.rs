use std::path::PathBuf;

use thiserror::Error;

use crate::autoencoder::ModelError;
use crate::baselines::PcaError;
use crate::cluster::ClusterError;
use crate::experiment::{ConfigError, ExperimentError};
use crate::features::FeatureError;
use crate::ingest::IngestError;
use crate::metrics::MetricsError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-wide error. Each module has its own error enum; this one wraps them
/// and decides the process exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Pca(#[from] PcaError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code: 2 config, 3 data, 4 numerical divergence, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Ingest(_) | Error::Feature(_) => 3,
            Error::Model(ModelError::Diverged { .. }) => 4,
            Error::Experiment(e) => e.exit_code(),
            _ => 1,
        }
    }
}
