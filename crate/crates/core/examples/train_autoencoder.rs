//! Trains the joint-loss autoencoder on one fold, saves a checkpoint and
//! reloads it.
//!
//! ```text
//! cargo run --release --example train_autoencoder
//! ```

use actembed::autoencoder::{train, Mode, TrainedModel, TrainingConfig};
use actembed::experiment::{crossval_split, load_dataset, parse_config, prepare_fold};
use actembed::features::FeatureMatrix;
use actembed::ingest::segment_set;

fn main() -> actembed::Result<()> {
    let cfg = parse_config(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/synthetic.ini").as_ref())?;
    let set = load_dataset(&cfg)?;
    let seg = segment_set(&set, cfg.window_seconds, cfg.step_seconds)?;
    let features = FeatureMatrix::from_segments(&seg.segments)?;
    let folds = crossval_split(&features.meta, cfg.folds, cfg.seed)?;
    let fold = prepare_fold(&features, &folds[0], cfg.m, cfg.n)?;

    let training = TrainingConfig { mode: Mode::Joint, seed: 7, ..cfg.training.clone() };
    let mut sizes = vec![features.dim()];
    sizes.extend(&cfg.layer_sizes);
    let model = train(&fold.train_features, &fold.neighbors, &sizes, cfg.leaky_slope, &fold.standardizer, &training)?;
    for rec in model.history.iter().step_by(10) {
        println!("epoch {:>3}  train {:.5}  val {:.5}", rec.epoch, rec.train_loss, rec.val_loss);
    }
    println!("best epoch {} of {}", model.best_epoch, model.stopped_epoch);

    let path = std::env::temp_dir().join("actembed-joint.ckpt");
    model.save(&path)?;
    let reloaded = TrainedModel::load(&path)?;
    let a = model.encode(&features.data)?;
    let b = reloaded.encode(&features.data)?;
    println!("embedding {}x{}, checkpoint round trip exact: {}", a.rows(), a.cols(), a == b);
    Ok(())
}
