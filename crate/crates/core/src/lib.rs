//! Clustering-friendly embeddings for wearable-sensor activity windows.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`ingest`] loads sensor sessions (canonical CSV, PAMAP2 `.dat` files, or a
//!    seeded synthetic generator), repairs missing samples and cuts every session
//!    into fixed-length sliding windows.
//! 2. [`features`] turns each window into per-channel statistics
//!    (mean, var, std, median, max, min, iqr) and z-scores them.
//! 3. [`neighbors`] builds the temporal and feature-space neighbor sets.
//! 4. [`autoencoder`] trains a LeakyReLU MLP autoencoder with a weighted sum of
//!    reconstruction, temporal-coherence and locality-preserving losses.
//! 5. [`cluster`] runs k-means on the embeddings and [`metrics`] scores the
//!    result with ACC, ARI and NMI.
//!
//! [`baselines`] provides the PCA comparison and [`experiment`] wires everything
//! into a cross-validated, fully seeded experiment runner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autoencoder;
pub mod baselines;
pub mod cluster;
pub mod error;
pub mod experiment;
pub mod features;
pub mod ingest;
pub mod matrix;
pub mod metrics;
pub mod neighbors;
pub mod seed;

pub use error::{Error, Result};
pub use matrix::Matrix;
