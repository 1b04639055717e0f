//! Temporal (same-session) and feature-space neighbor lists.
//!
//! ```text
//! cargo run --release --example neighborhoods
//! ```

use actembed::experiment::{load_dataset, parse_config};
use actembed::features::{apply_standardizer, fit_standardizer, FeatureMatrix};
use actembed::ingest::segment_set;
use actembed::neighbors::NeighborhoodIndex;

fn main() -> actembed::Result<()> {
    let cfg = parse_config(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/synthetic.ini").as_ref())?;
    let set = load_dataset(&cfg)?;
    let seg = segment_set(&set, cfg.window_seconds, cfg.step_seconds)?;
    let raw = FeatureMatrix::from_segments(&seg.segments)?;
    let all: Vec<usize> = (0..raw.len()).collect();
    let features = apply_standardizer(&fit_standardizer(&raw, &all)?, &raw)?;

    let index = NeighborhoodIndex::build(&features, cfg.m, cfg.n);
    println!("{} rows, m = {}, n = {}", index.len(), index.m, index.n);
    for row in [0, 1, features.len() / 2] {
        let label = |i: usize| &set.class_names[features.meta[i].label];
        let temporal: Vec<String> = index.temporal[row].iter().map(|&j| format!("#{}", features.meta[j].segment_index)).collect();
        let feature: Vec<&String> = index.feature[row].iter().map(|&j| label(j)).collect();
        println!("row {row} ({}, #{}, {})", features.meta[row].session, features.meta[row].segment_index, label(row));
        println!("  temporal: {}", temporal.join(" "));
        println!("  feature-space labels: {feature:?}");
    }

    let agree = (0..index.len())
        .map(|i| index.feature[i].iter().filter(|&&j| features.meta[j].label == features.meta[i].label).count())
        .sum::<usize>();
    let total: usize = index.feature.iter().map(Vec::len).sum();
    println!("feature neighbors sharing the row's label: {:.1}%", 100.0 * agree as f64 / total as f64);
    Ok(())
}
