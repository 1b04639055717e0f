//! Per-channel window statistics and train-only standardization.
//!
//! ```text
//! cargo run --release --example feature_extraction
//! ```

use actembed::features::{channel_stats, fit_standardizer, apply_standardizer, FeatureMatrix, STATS_PER_CHANNEL};
use actembed::experiment::{load_dataset, parse_config};
use actembed::ingest::segment_set;

const NAMES: [&str; STATS_PER_CHANNEL] = ["mean", "var", "std", "median", "max", "min", "iqr"];

fn main() -> actembed::Result<()> {
    let series = [1.0, 4.0, 2.0, 8.0, 5.0, 7.0];
    let stats = channel_stats(&series)?;
    for (name, v) in NAMES.iter().zip(stats) {
        println!("{name:>6} = {v:.4}");
    }

    let cfg = parse_config(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/synthetic.ini").as_ref())?;
    let set = load_dataset(&cfg)?;
    let seg = segment_set(&set, cfg.window_seconds, cfg.step_seconds)?;
    let features = FeatureMatrix::from_segments(&seg.segments)?;
    println!("feature matrix: {} rows x {} columns", features.len(), features.dim());

    let train_rows: Vec<usize> = (0..features.len()).filter(|&i| features.meta[i].session.subject_id != "s0").collect();
    let standardizer = fit_standardizer(&features, &train_rows)?;
    let z = apply_standardizer(&standardizer, &features)?;
    let col0: Vec<f64> = train_rows.iter().map(|&i| z.data.get(i, 0)).collect();
    let mean = col0.iter().sum::<f64>() / col0.len() as f64;
    println!("column 0 mean over train rows after z-scoring: {mean:.2e}");
    Ok(())
}
