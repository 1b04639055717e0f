//! Plain-text model checkpoints.
//!
//! ```text
//! ACTEMBED1
//! layer_sizes 14 8 4
//! leaky_slope 0.01
//! config alpha=0.3 beta=0.3 learning_rate=0.01 batch_size=32 max_epochs=500 patience=10 val_fraction=0.15 seed=0 mode=JOINT
//! epochs best=12 stopped=22
//! standardizer_mean <D values>
//! standardizer_std <D values>
//! history <epoch> <train_loss> <val_loss>      (one line per epoch)
//! weights <layer> <out> <in> <out·in values, row-major>
//! bias <layer> <out values>
//! ```
//!
//! Floats are written in shortest round-trip form, so save → load is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{EpochRecord, Layer, MlpParams, Mode, ModelError, TrainedModel, TrainingConfig};
use crate::features::Standardizer;
use crate::Matrix;

pub const CHECKPOINT_MAGIC: &str = "ACTEMBED1";

fn join<T: std::fmt::Display>(values: impl IntoIterator<Item = T>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

impl TrainedModel {
    pub fn to_checkpoint_string(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "{CHECKPOINT_MAGIC}");
        let _ = writeln!(s, "layer_sizes {}", join(&self.params.layer_sizes));
        let _ = writeln!(s, "leaky_slope {}", self.params.leaky_slope);
        let _ = writeln!(
            s,
            "config alpha={} beta={} learning_rate={} batch_size={} max_epochs={} patience={} val_fraction={} seed={} mode={}",
            c.alpha, c.beta, c.learning_rate, c.batch_size, c.max_epochs, c.patience, c.val_fraction, c.seed, c.mode
        );
        let _ = writeln!(s, "epochs best={} stopped={}", self.best_epoch, self.stopped_epoch);
        let _ = writeln!(s, "standardizer_mean {}", join(&self.standardizer.mean));
        let _ = writeln!(s, "standardizer_std {}", join(&self.standardizer.std));
        for h in &self.history {
            let _ = writeln!(s, "history {} {} {}", h.epoch, h.train_loss, h.val_loss);
        }
        for (i, l) in self.params.layers.iter().enumerate() {
            let _ = writeln!(s, "weights {i} {} {} {}", l.outputs(), l.inputs(), join(l.weights.as_slice()));
            let _ = writeln!(s, "bias {i} {}", join(&l.bias));
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        fs::write(path, self.to_checkpoint_string())
            .map_err(|source| ModelError::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text =
            fs::read_to_string(path).map_err(|source| ModelError::Io { path: path.to_path_buf(), source })?;
        Self::from_checkpoint_str(&text).map_err(|reason| ModelError::Checkpoint { path: path.to_path_buf(), reason })
    }

    pub fn from_checkpoint_str(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        if lines.next() != Some(CHECKPOINT_MAGIC) {
            return Err(format!("missing `{CHECKPOINT_MAGIC}` header"));
        }
        fn nums<T: std::str::FromStr>(tokens: &[&str], what: &str) -> Result<Vec<T>, String> {
            tokens.iter().map(|t| t.parse::<T>().map_err(|_| format!("bad {what} value `{t}`"))).collect()
        }
        fn kv<'a>(tokens: &[&'a str], key: &str) -> Result<&'a str, String> {
            tokens
                .iter()
                .find_map(|t| t.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .ok_or_else(|| format!("missing `{key}`"))
        }
        fn parse<T: std::str::FromStr>(s: &str, key: &str) -> Result<T, String> {
            s.parse().map_err(|_| format!("bad `{key}` value `{s}`"))
        }

        let mut layer_sizes = None;
        let mut slope = None;
        let mut config = None;
        let mut epochs = None;
        let mut mean = None;
        let mut std = None;
        let mut history = Vec::new();
        let mut layers: Vec<Layer> = Vec::new();
        for line in lines {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let Some((&key, rest)) = tokens.split_first() else { continue };
            match key {
                "layer_sizes" => layer_sizes = Some(nums::<usize>(rest, key)?),
                "leaky_slope" => slope = Some(parse::<f64>(rest.first().copied().unwrap_or(""), key)?),
                "config" => {
                    let p = |k: &str| kv(rest, k);
                    config = Some(TrainingConfig {
                        alpha: parse(p("alpha")?, "alpha")?,
                        beta: parse(p("beta")?, "beta")?,
                        learning_rate: parse(p("learning_rate")?, "learning_rate")?,
                        batch_size: parse(p("batch_size")?, "batch_size")?,
                        max_epochs: parse(p("max_epochs")?, "max_epochs")?,
                        patience: parse(p("patience")?, "patience")?,
                        val_fraction: parse(p("val_fraction")?, "val_fraction")?,
                        seed: parse(p("seed")?, "seed")?,
                        mode: p("mode")?.parse::<Mode>()?,
                    });
                }
                "epochs" => {
                    epochs = Some((parse::<usize>(kv(rest, "best")?, "best")?, parse::<usize>(kv(rest, "stopped")?, "stopped")?))
                }
                "standardizer_mean" => mean = Some(nums::<f64>(rest, key)?),
                "standardizer_std" => std = Some(nums::<f64>(rest, key)?),
                "history" => {
                    let v = nums::<f64>(rest, key)?;
                    if v.len() != 3 {
                        return Err("history lines hold three values".into());
                    }
                    history.push(EpochRecord { epoch: v[0] as usize, train_loss: v[1], val_loss: v[2] });
                }
                "weights" => {
                    let head = nums::<usize>(rest.get(..3).ok_or("truncated weights line")?, key)?;
                    if head[0] != layers.len() {
                        return Err(format!("weights for layer {} out of order", head[0]));
                    }
                    let values = nums::<f64>(&rest[3..], key)?;
                    if values.len() != head[1] * head[2] {
                        return Err(format!("layer {} expects {} weights", head[0], head[1] * head[2]));
                    }
                    layers.push(Layer { weights: Matrix::from_vec(head[1], head[2], values), bias: Vec::new() });
                }
                "bias" => {
                    let idx = parse::<usize>(rest.first().copied().unwrap_or(""), key)?;
                    let layer = layers.get_mut(idx).ok_or_else(|| format!("bias for unknown layer {idx}"))?;
                    layer.bias = nums::<f64>(&rest[1..], key)?;
                }
                other => return Err(format!("unknown entry `{other}`")),
            }
        }
        let params = MlpParams {
            layer_sizes: layer_sizes.ok_or("missing layer_sizes")?,
            leaky_slope: slope.ok_or("missing leaky_slope")?,
            layers,
        };
        params.check_shapes().map_err(|e| e.to_string())?;
        let (best_epoch, stopped_epoch) = epochs.ok_or("missing epochs")?;
        let standardizer = Standardizer { mean: mean.ok_or("missing standardizer_mean")?, std: std.ok_or("missing standardizer_std")? };
        if standardizer.mean.len() != params.input_dim() || standardizer.std.len() != params.input_dim() {
            return Err("standardizer size does not match the input layer".into());
        }
        if history.is_empty() {
            return Err("missing history".into());
        }
        Ok(TrainedModel {
            params,
            standardizer,
            config: config.ok_or("missing config")?,
            history,
            best_epoch,
            stopped_epoch,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::init_network;

    fn model() -> TrainedModel {
        TrainedModel {
            params: init_network(&[5, 3, 2], 0.01, 4).unwrap(),
            standardizer: Standardizer { mean: vec![0.1, -2.0, 3.5, 0.0, 1e-7], std: vec![1.0, 0.3, 2.0, 1e-12, 4.0] },
            config: TrainingConfig { mode: Mode::LpAe, seed: 99, ..Default::default() },
            history: vec![
                EpochRecord { epoch: 0, train_loss: 3.25, val_loss: 3.5 },
                EpochRecord { epoch: 1, train_loss: 1.0 / 3.0, val_loss: 0.7 },
            ],
            best_epoch: 1,
            stopped_epoch: 1,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let m = model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        m.save(&path).unwrap();
        assert!(fs::read_to_string(&path).unwrap().starts_with("ACTEMBED1\n"));
        assert_eq!(TrainedModel::load(&path).unwrap(), m);
    }

    #[test]
    fn rejects_bad_magic_and_shapes() {
        assert!(TrainedModel::from_checkpoint_str("ACTEMBED0\n").is_err());
        let text = model().to_checkpoint_string().replace("layer_sizes 5 3 2", "layer_sizes 5 4 2");
        assert!(TrainedModel::from_checkpoint_str(&text).is_err());
    }
}
