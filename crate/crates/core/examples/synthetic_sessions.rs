//! Generates the synthetic dataset from `configs/synthetic.ini`, writes it as
//! canonical CSV, loads it back and cuts it into windows.
//!
//! ```text
//! cargo run --release --example synthetic_sessions
//! ```

use actembed::experiment::{parse_config, DatasetSource};
use actembed::ingest::{generate_synthetic, load_canonical_csv, segment_set, write_canonical_csv, CsvSchema};

fn main() -> actembed::Result<()> {
    let cfg = parse_config(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/synthetic.ini").as_ref())?;
    let DatasetSource::Synthetic(synth) = &cfg.dataset else { unreachable!("synthetic.ini describes a synthetic source") };

    let set = generate_synthetic(synth, cfg.seed)?;
    println!("{} sessions, {} records, {} channels", set.sessions.len(), set.record_count(), set.channel_count);
    println!("classes: {}", set.class_names.join(", "));

    let dir = std::env::temp_dir().join("actembed-example");
    std::fs::create_dir_all(&dir).map_err(|e| actembed::Error::io(&dir, e))?;
    let path = dir.join("synthetic.csv");
    write_canonical_csv(&set, &path)?;
    let reloaded = load_canonical_csv(&path, &CsvSchema { sample_rate: Some(synth.sample_rate), ..CsvSchema::default() })?;
    println!("reloaded {} records from {}", reloaded.record_count(), path.display());

    let seg = segment_set(&reloaded, cfg.window_seconds, cfg.step_seconds)?;
    println!("{} windows of {} samples", seg.segments.len(), seg.segments[0].samples.rows());
    for s in seg.segments.iter().take(3) {
        println!("  {} #{} t={:.2} label={}", s.session_ref, s.segment_index, s.start_time, reloaded.class_names[s.label]);
    }
    Ok(())
}
