use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::{ExperimentConfig, Method};
use super::ExperimentError;
use crate::metrics::Confusion;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Scores of one (fold, method, k) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub fold: usize,
    pub method: Method,
    pub k: usize,
    pub k_offset: usize,
    pub acc: f64,
    pub ari: f64,
    pub nmi: f64,
    pub inertia: f64,
    /// Last training epoch run (0 for PCA).
    pub epochs: usize,
    pub best_epoch: usize,
    pub train_rows: usize,
    /// Rows the scores are computed on.
    pub scored_rows: usize,
    /// Embedding plus clustering time; written to `timings.csv` only.
    pub wall_seconds: f64,
    pub confusion: Confusion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: ExperimentConfig,
    /// Number of distinct classes among the segments.
    pub tn: usize,
    pub class_names: Vec<String>,
    pub segments: usize,
    pub skipped_sessions: usize,
    pub rows: Vec<RunRow>,
}

/// Mean and sample standard deviation over folds for one (method, k).
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub method: Method,
    pub k: usize,
    pub k_offset: usize,
    pub runs: usize,
    pub acc_mean: f64,
    pub acc_std: f64,
    pub ari_mean: f64,
    pub ari_std: f64,
    pub nmi_mean: f64,
    pub nmi_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Groups rows by (method, k) in first-appearance order.
pub fn aggregate(rows: &[RunRow]) -> Vec<AggregateRow> {
    let mut keys: Vec<(Method, usize, usize)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|&(m, k, _)| m == r.method && k == r.k) {
            keys.push((r.method, r.k, r.k_offset));
        }
    }
    keys.into_iter()
        .map(|(method, k, k_offset)| {
            let group: Vec<&RunRow> = rows.iter().filter(|r| r.method == method && r.k == k).collect();
            let col = |f: fn(&RunRow) -> f64| mean_std(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (acc_mean, acc_std) = col(|r| r.acc);
            let (ari_mean, ari_std) = col(|r| r.ari);
            let (nmi_mean, nmi_std) = col(|r| r.nmi);
            AggregateRow { method, k, k_offset, runs: group.len(), acc_mean, acc_std, ari_mean, ari_std, nmi_mean, nmi_std }
        })
        .collect()
}

impl RunReport {
    pub fn aggregate(&self) -> Vec<AggregateRow> {
        aggregate(&self.rows)
    }

    /// `runs.csv` contents. Excludes timing so reruns are byte-identical.
    pub fn runs_csv(&self) -> String {
        let mut s = String::from("fold,method,k,k_offset,acc,ari,nmi,inertia,epochs,best_epoch,train_rows,scored_rows\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.fold, r.method, r.k, r.k_offset, r.acc, r.ari, r.nmi, r.inertia, r.epochs, r.best_epoch, r.train_rows, r.scored_rows
            ));
        }
        s
    }

    pub fn aggregate_csv(&self) -> String {
        let mut s = String::from("method,k,k_offset,runs,acc_mean,acc_std,ari_mean,ari_std,nmi_mean,nmi_std\n");
        for a in self.aggregate() {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                a.method, a.k, a.k_offset, a.runs, a.acc_mean, a.acc_std, a.ari_mean, a.ari_std, a.nmi_mean, a.nmi_std
            ));
        }
        s
    }

    pub fn timings_csv(&self) -> String {
        let mut s = String::from("fold,method,k,wall_seconds\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{}\n", r.fold, r.method, r.k, r.wall_seconds));
        }
        s
    }

    /// Configuration echo with the tool version and seed as leading comments;
    /// parses back to the same configuration.
    pub fn manifest(&self) -> String {
        format!(
            "# actembed {TOOL_VERSION}\n# seed {}\n# tn {} segments {} skipped_sessions {}\n\n{}",
            self.config.seed,
            self.tn,
            self.segments,
            self.skipped_sessions,
            self.config.to_ini()
        )
    }
}

/// Writes `runs.csv`, `aggregate.csv`, `timings.csv`, `run_manifest.ini` and
/// one `confusion_{method}_{fold}_{k}.csv` per row into `outdir`.
pub fn emit_report(report: &RunReport, outdir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    if report.rows.is_empty() {
        return Err(ExperimentError::EmptyReport);
    }
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ExperimentError::Io { path, source }
    };
    fs::create_dir_all(outdir).map_err(io(outdir))?;
    let mut written = Vec::new();
    let mut put = |name: String, contents: String| -> Result<(), ExperimentError> {
        let path = outdir.join(name);
        let mut f = fs::File::create(&path).map_err(io(&path))?;
        f.write_all(contents.as_bytes()).map_err(io(&path))?;
        written.push(path);
        Ok(())
    };
    put("runs.csv".into(), report.runs_csv())?;
    put("aggregate.csv".into(), report.aggregate_csv())?;
    put("timings.csv".into(), report.timings_csv())?;
    put("run_manifest.ini".into(), report.manifest())?;
    for r in &report.rows {
        put(format!("confusion_{}_{}_{}.csv", r.method, r.fold, r.k), r.confusion.to_csv_string(&report.class_names))?;
    }
    Ok(written)
}
