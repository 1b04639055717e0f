use std::path::PathBuf;
use std::process::ExitCode;

use actembed::autoencoder::run_gradient_suite;
use actembed::experiment::{emit_report, parse_config, run_experiment, DatasetSource};
use actembed::ingest::{generate_synthetic, write_canonical_csv};
use actembed::Error;
use clap::{Parser, Subcommand};

/// Clustering-friendly embeddings of wearable-sensor activity windows.
///
/// Set ACTEMBED_THREADS to cap worker threads (0 or unset = all cores).
/// Exit codes: 0 success, 1 other failure, 2 configuration error, 3 data
/// error, 4 numerical divergence.
#[derive(Parser)]
#[command(version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the cross-validated experiment described by an INI config.
    ///
    /// Defaults for keys the config leaves out: window_seconds 5.12,
    /// step_seconds 1, m 5, n 5, leaky_slope 0.01, alpha 0.3, beta 0.3,
    /// learning_rate 0.01, batch_size 32, max_epochs 500, patience 10,
    /// val_fraction 0.15, methods PCA, AE_ONLY, TC_AE, LP_AE, JOINT,
    /// k_offsets 0, 1, 2, 3, folds 5, restarts 10, output_dir actembed-out,
    /// seed 0, score_all false.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed (overrides seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Score train and test rows instead of test rows only.
        #[arg(long)]
        score_all: bool,
    },
    /// Write the synthetic dataset of a config as canonical CSV.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Finite-difference check of the analytic gradients in all four modes.
    CheckGradients {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn configure_threads() {
    let threads = std::env::var("ACTEMBED_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { config, out, seed, score_all } => {
            let mut cfg = parse_config(&config)?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            cfg.score_all |= score_all;
            let report = run_experiment(&cfg)?;
            emit_report(&report, &cfg.output_dir)?;
            println!("method,k,acc_mean,acc_std,ari_mean,nmi_mean");
            for a in report.aggregate() {
                println!("{},{},{:.4},{:.4},{:.4},{:.4}", a.method, a.k, a.acc_mean, a.acc_std, a.ari_mean, a.nmi_mean);
            }
            eprintln!("wrote {}", cfg.output_dir.display());
        }
        Command::Synth { config, out } => {
            let cfg = parse_config(&config)?;
            let DatasetSource::Synthetic(synth) = &cfg.dataset else {
                return Err(actembed::experiment::ConfigError::Invalid("config does not describe a synthetic dataset".into()).into());
            };
            let set = generate_synthetic(synth, cfg.seed)?;
            write_canonical_csv(&set, &out)?;
            eprintln!("wrote {} sessions, {} records to {}", set.sessions.len(), set.record_count(), out.display());
        }
        Command::CheckGradients { seed } => {
            let cases = run_gradient_suite(seed)?;
            let mut failed = 0;
            for c in &cases {
                let r = &c.report;
                let shape: Vec<String> = c.layer_sizes.iter().map(usize::to_string).collect();
                println!(
                    "{} {:<8} {:<10} checked {:>4} kinks {:>3} max_rel {:.2e} max_abs {:.2e}",
                    if r.passed() { "PASS" } else { "FAIL" },
                    c.mode,
                    shape.join("-"),
                    r.checked,
                    r.skipped_kinks,
                    r.max_relative_error,
                    r.max_absolute_error
                );
                failed += usize::from(!r.passed());
            }
            if failed > 0 {
                eprintln!("{failed} of {} gradient checks failed", cases.len());
                std::process::exit(1);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
