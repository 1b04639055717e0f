//! Runs the complete cross-validated comparison described by an INI config
//! and writes the report files.
//!
//! ```text
//! cargo run --release --example full_experiment [config.ini] [out_dir]
//! ```

use std::path::PathBuf;

use actembed::experiment::{emit_report, parse_config, run_experiment};

fn main() -> actembed::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args.next().map_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/synthetic.ini")), PathBuf::from);
    let mut cfg = parse_config(&config)?;
    cfg.output_dir = args.next().map_or_else(|| std::env::temp_dir().join("actembed-full"), PathBuf::from);

    let report = run_experiment(&cfg)?;
    println!("{} windows, {} classes ({})", report.segments, report.tn, report.class_names.join(", "));
    println!("{:<8} {:>3} {:>8} {:>8} {:>8}", "method", "k", "ACC", "ARI", "NMI");
    for a in report.aggregate() {
        println!("{:<8} {:>3} {:>8.4} {:>8.4} {:>8.4}", a.method, a.k, a.acc_mean, a.ari_mean, a.nmi_mean);
    }
    for path in emit_report(&report, &cfg.output_dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
