//! Strict INI-style experiment configuration.
//!
//! ```ini
//! [dataset]
//! source = csv            # csv | pamap2 | synthetic
//! path = data/sessions.csv
//! channels = 0, 1, 2      # optional channel subset (indices)
//! sample_rate = 50        # optional; pamap2 defaults to 100, csv infers it
//!
//! [synth]                 # only with source = synthetic
//! sample_rate = 20
//! subject_offsets = 0, 1.5, -1, 2.5
//! sessions_per_subject = 2
//! bouts_per_session = 6
//! min_bout_seconds = 10
//! max_bout_seconds = 20
//! noise_std = 0.1
//! class.walk = 1 2 1.5; 0 1 1.5     # per channel: level amplitude frequency
//! class.sit  = 0 0.1 0.2; 1 0.1 0.2
//!
//! [windowing]
//! window_seconds = 5.12
//! step_seconds = 1
//!
//! [neighbors]
//! m = 5
//! n = 5
//!
//! [model]
//! layer_sizes = 128, 64   # hidden sizes; the input size is prepended
//! leaky_slope = 0.01
//!
//! [training]
//! alpha = 0.3
//! beta = 0.3
//! learning_rate = 0.01
//! batch_size = 32
//! max_epochs = 500
//! patience = 10
//! val_fraction = 0.15
//!
//! [experiment]
//! methods = PCA, AE_ONLY, TC_AE, LP_AE, JOINT
//! k_offsets = 0, 1, 2, 3
//! folds = 5
//! restarts = 10
//! output_dir = actembed-out
//! seed = 0
//! score_all = false
//! ```
//!
//! Only `[dataset] source`, `path` (for csv and pamap2), `[model] layer_sizes`
//! and, for synthetic data, `[synth] subject_offsets` plus at least one
//! `class.<name>` are required. `#` and `;` at the start of a line begin a
//! comment; `#` after a value also does. Relative dataset paths are resolved
//! against the directory of the configuration file.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::ConfigError;
use crate::autoencoder::{Mode, TrainingConfig, DEFAULT_LEAKY_SLOPE};
use crate::ingest::{ChannelRegime, ClassRegime, SynthConfig};
use crate::neighbors::{DEFAULT_FEATURE, DEFAULT_TEMPORAL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Pca,
    Autoencoder(Mode),
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Pca,
        Method::Autoencoder(Mode::AeOnly),
        Method::Autoencoder(Mode::TcAe),
        Method::Autoencoder(Mode::LpAe),
        Method::Autoencoder(Mode::Joint),
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Pca => "PCA",
            Method::Autoencoder(mode) => mode.as_str(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "PCA" {
            return Ok(Method::Pca);
        }
        s.parse::<Mode>()
            .map(Method::Autoencoder)
            .map_err(|_| format!("unknown method `{s}` (expected PCA, AE_ONLY, TC_AE, LP_AE or JOINT)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Csv(PathBuf),
    Pamap2(PathBuf),
    Synthetic(SynthConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub channels: Option<Vec<usize>>,
    /// Overrides the dataset sample rate (csv, pamap2).
    pub sample_rate: Option<f64>,
    pub window_seconds: f64,
    pub step_seconds: f64,
    pub m: usize,
    pub n: usize,
    /// Hidden layer sizes; the last one is the embedding size.
    pub layer_sizes: Vec<usize>,
    pub leaky_slope: f64,
    /// `seed` and `mode` are set per job by the runner.
    pub training: TrainingConfig,
    pub methods: Vec<Method>,
    pub k_offsets: Vec<usize>,
    pub folds: usize,
    pub restarts: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub score_all: bool,
}

impl ExperimentConfig {
    /// Defaults for everything except the dataset and layer sizes.
    pub fn new(dataset: DatasetSource, layer_sizes: Vec<usize>) -> Self {
        Self {
            dataset,
            channels: None,
            sample_rate: None,
            window_seconds: 5.12,
            step_seconds: 1.0,
            m: DEFAULT_TEMPORAL,
            n: DEFAULT_FEATURE,
            layer_sizes,
            leaky_slope: DEFAULT_LEAKY_SLOPE,
            training: TrainingConfig::default(),
            methods: Method::ALL.to_vec(),
            k_offsets: vec![0, 1, 2, 3],
            folds: 5,
            restarts: 10,
            output_dir: PathBuf::from("actembed-out"),
            seed: 0,
            score_all: false,
        }
    }

    pub fn embedding_dim(&self) -> usize {
        self.layer_sizes.last().copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        self.training.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let DatasetSource::Synthetic(s) = &self.dataset {
            s.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        if self.layer_sizes.is_empty() || self.layer_sizes.contains(&0) {
            return bad("layer_sizes must list at least one positive size".into());
        }
        if !(self.window_seconds > 0.0 && self.step_seconds > 0.0) {
            return bad("window_seconds and step_seconds must be positive".into());
        }
        if self.sample_rate.is_some_and(|r| !(r > 0.0)) {
            return bad("sample_rate must be positive".into());
        }
        if !(self.leaky_slope >= 0.0 && self.leaky_slope < 1.0) {
            return bad("leaky_slope must lie in [0, 1)".into());
        }
        if self.folds < 2 {
            return bad(format!("folds must be at least 2, got {}", self.folds));
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1".into());
        }
        if self.methods.is_empty() || self.k_offsets.is_empty() {
            return bad("methods and k_offsets must not be empty".into());
        }
        let unique: HashSet<_> = self.methods.iter().collect();
        if unique.len() != self.methods.len() {
            return bad("methods must not repeat".into());
        }
        let unique: HashSet<_> = self.k_offsets.iter().collect();
        if unique.len() != self.k_offsets.len() {
            return bad("k_offsets must not repeat".into());
        }
        Ok(())
    }

    /// INI text that parses back to an equal configuration.
    pub fn to_ini(&self) -> String {
        fn list<T: fmt::Display>(items: &[T]) -> String {
            items.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
        }
        let mut s = String::new();
        let _ = writeln!(s, "[dataset]");
        match &self.dataset {
            DatasetSource::Csv(p) => {
                let _ = writeln!(s, "source = csv\npath = {}", p.display());
            }
            DatasetSource::Pamap2(p) => {
                let _ = writeln!(s, "source = pamap2\npath = {}", p.display());
            }
            DatasetSource::Synthetic(_) => {
                let _ = writeln!(s, "source = synthetic");
            }
        }
        if let Some(ch) = &self.channels {
            let _ = writeln!(s, "channels = {}", list(ch));
        }
        if let Some(r) = self.sample_rate {
            let _ = writeln!(s, "sample_rate = {r}");
        }
        if let DatasetSource::Synthetic(c) = &self.dataset {
            let _ = writeln!(s, "\n[synth]");
            let _ = writeln!(s, "sample_rate = {}", c.sample_rate);
            let _ = writeln!(s, "subject_offsets = {}", list(&c.subject_offsets));
            let _ = writeln!(s, "sessions_per_subject = {}", c.sessions_per_subject);
            let _ = writeln!(s, "bouts_per_session = {}", c.bouts_per_session);
            let _ = writeln!(s, "min_bout_seconds = {}", c.min_bout_seconds);
            let _ = writeln!(s, "max_bout_seconds = {}", c.max_bout_seconds);
            let _ = writeln!(s, "noise_std = {}", c.noise_std);
            for class in &c.classes {
                let channels: Vec<String> = class
                    .channels
                    .iter()
                    .map(|r| format!("{} {} {}", r.level, r.amplitude, r.frequency))
                    .collect();
                let _ = writeln!(s, "class.{} = {}", class.name, channels.join("; "));
            }
        }
        let t = &self.training;
        let _ = writeln!(s, "\n[windowing]\nwindow_seconds = {}\nstep_seconds = {}", self.window_seconds, self.step_seconds);
        let _ = writeln!(s, "\n[neighbors]\nm = {}\nn = {}", self.m, self.n);
        let _ = writeln!(s, "\n[model]\nlayer_sizes = {}\nleaky_slope = {}", list(&self.layer_sizes), self.leaky_slope);
        let _ = writeln!(
            s,
            "\n[training]\nalpha = {}\nbeta = {}\nlearning_rate = {}\nbatch_size = {}\nmax_epochs = {}\npatience = {}\nval_fraction = {}",
            t.alpha, t.beta, t.learning_rate, t.batch_size, t.max_epochs, t.patience, t.val_fraction
        );
        let _ = writeln!(
            s,
            "\n[experiment]\nmethods = {}\nk_offsets = {}\nfolds = {}\nrestarts = {}\noutput_dir = {}\nseed = {}\nscore_all = {}",
            list(&self.methods),
            list(&self.k_offsets),
            self.folds,
            self.restarts,
            self.output_dir.display(),
            self.seed,
            self.score_all
        );
        s
    }
}

const KNOWN_KEYS: &[(&str, &[&str])] = &[
    ("dataset", &["source", "path", "channels", "sample_rate"]),
    (
        "synth",
        &[
            "sample_rate",
            "subject_offsets",
            "sessions_per_subject",
            "bouts_per_session",
            "min_bout_seconds",
            "max_bout_seconds",
            "noise_std",
        ],
    ),
    ("windowing", &["window_seconds", "step_seconds"]),
    ("neighbors", &["m", "n"]),
    ("model", &["layer_sizes", "leaky_slope"]),
    ("training", &["alpha", "beta", "learning_rate", "batch_size", "max_epochs", "patience", "val_fraction"]),
    ("experiment", &["methods", "k_offsets", "folds", "restarts", "output_dir", "seed", "score_all"]),
];

struct Entry {
    value: String,
    line: usize,
}

/// `section.key` → entry, plus `class.<name>` entries of `[synth]` in file order.
struct Document {
    entries: BTreeMap<String, Entry>,
    classes: Vec<(String, Entry)>,
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn tokenize(text: &str) -> Result<Document, ConfigError> {
    let mut doc = Document { entries: BTreeMap::new(), classes: Vec::new() };
    let mut section: Option<&str> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with(';') || trimmed.starts_with('#') {
            continue;
        }
        let content = strip_comment(trimmed).trim();
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Syntax { line, reason: format!("unterminated section header `{content}`") })?
                .trim();
            let known = KNOWN_KEYS.iter().find(|(s, _)| *s == name).map(|(s, _)| *s);
            section = Some(known.ok_or_else(|| ConfigError::UnknownKey { key: format!("[{name}]"), line })?);
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line, reason: format!("expected `key = value`, got `{content}`") })?;
        let (key, value) = (key.trim(), value.trim().to_string());
        let Some(sec) = section else {
            return Err(ConfigError::Syntax { line, reason: format!("`{key}` appears before any section") });
        };
        if sec == "synth" {
            if let Some(name) = key.strip_prefix("class.") {
                if name.is_empty() || doc.classes.iter().any(|(n, _)| n == name) {
                    return Err(ConfigError::Syntax { line, reason: format!("bad or repeated class name `{key}`") });
                }
                doc.classes.push((name.to_string(), Entry { value, line }));
                continue;
            }
        }
        let allowed = KNOWN_KEYS.iter().find(|(s, _)| *s == sec).map_or(&[][..], |(_, k)| k);
        if !allowed.contains(&key) {
            return Err(ConfigError::UnknownKey { key: key.to_string(), line });
        }
        let full = format!("{sec}.{key}");
        if doc.entries.contains_key(&full) {
            return Err(ConfigError::Syntax { line, reason: format!("`{key}` is set twice in [{sec}]") });
        }
        doc.entries.insert(full, Entry { value, line });
    }
    Ok(doc)
}

fn parse_value<T: FromStr>(key: &str, entry: &Entry, expected: &'static str) -> Result<T, ConfigError> {
    entry.value.parse().map_err(|_| ConfigError::TypeError {
        key: key.to_string(),
        line: entry.line,
        expected,
        value: entry.value.clone(),
    })
}

fn parse_list<T: FromStr>(key: &str, entry: &Entry, expected: &'static str) -> Result<Vec<T>, ConfigError> {
    entry
        .value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse().map_err(|_| ConfigError::TypeError {
                key: key.to_string(),
                line: entry.line,
                expected,
                value: entry.value.clone(),
            })
        })
        .collect()
}

impl Document {
    fn get<T: FromStr>(&self, key: &str, expected: &'static str) -> Result<Option<T>, ConfigError> {
        self.entries.get(key).map(|e| parse_value(key, e, expected)).transpose()
    }

    fn list<T: FromStr>(&self, key: &str, expected: &'static str) -> Result<Option<Vec<T>>, ConfigError> {
        self.entries.get(key).map(|e| parse_list(key, e, expected)).transpose()
    }

    fn require<T>(value: Option<T>, key: &str) -> Result<T, ConfigError> {
        value.ok_or_else(|| ConfigError::MissingRequired(key.to_string()))
    }
}

fn parse_regimes(name: &str, entry: &Entry) -> Result<ClassRegime, ConfigError> {
    let key = format!("class.{name}");
    let type_error = || ConfigError::TypeError {
        key: key.clone(),
        line: entry.line,
        expected: "`level amplitude frequency` triples separated by `;`",
        value: entry.value.clone(),
    };
    let channels = entry
        .value
        .split(';')
        .map(|part| {
            let nums: Vec<f64> = part.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| type_error())?;
            match nums[..] {
                [level, amplitude, frequency] => Ok(ChannelRegime { level, amplitude, frequency }),
                _ => Err(type_error()),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ClassRegime { name: name.to_string(), channels })
}

fn parse_synth(doc: &Document) -> Result<SynthConfig, ConfigError> {
    let offsets = Document::require(doc.list::<f64>("synth.subject_offsets", "a list of numbers")?, "synth.subject_offsets")?;
    if doc.classes.is_empty() {
        return Err(ConfigError::MissingRequired("synth.class.<name>".into()));
    }
    let classes = doc.classes.iter().map(|(n, e)| parse_regimes(n, e)).collect::<Result<Vec<_>, _>>()?;
    Ok(SynthConfig {
        sample_rate: doc.get("synth.sample_rate", "a number")?.unwrap_or(50.0),
        classes,
        subject_offsets: offsets,
        sessions_per_subject: doc.get("synth.sessions_per_subject", "a non-negative integer")?.unwrap_or(2),
        bouts_per_session: doc.get("synth.bouts_per_session", "a non-negative integer")?.unwrap_or(6),
        min_bout_seconds: doc.get("synth.min_bout_seconds", "a number")?.unwrap_or(10.0),
        max_bout_seconds: doc.get("synth.max_bout_seconds", "a number")?.unwrap_or(20.0),
        noise_std: doc.get("synth.noise_std", "a number")?.unwrap_or(0.1),
    })
}

/// Parses configuration text. Relative dataset paths are joined onto `base_dir`.
pub fn parse_config_str(text: &str, base_dir: Option<&Path>) -> Result<ExperimentConfig, ConfigError> {
    let doc = tokenize(text)?;
    let resolve = |p: PathBuf| match base_dir {
        Some(base) if p.is_relative() => base.join(p),
        _ => p,
    };
    let source: String = Document::require(doc.get("dataset.source", "a string")?, "dataset.source")?;
    let path = || -> Result<PathBuf, ConfigError> {
        Ok(resolve(Document::require(doc.get::<PathBuf>("dataset.path", "a path")?, "dataset.path")?))
    };
    let dataset = match source.as_str() {
        "csv" => DatasetSource::Csv(path()?),
        "pamap2" => DatasetSource::Pamap2(path()?),
        "synthetic" => {
            if doc.entries.contains_key("dataset.path") || doc.entries.contains_key("dataset.sample_rate") {
                return Err(ConfigError::Invalid(
                    "synthetic datasets take no path, and their sample_rate belongs in [synth]".into(),
                ));
            }
            DatasetSource::Synthetic(parse_synth(&doc)?)
        }
        other => {
            let line = doc.entries["dataset.source"].line;
            return Err(ConfigError::TypeError {
                key: "dataset.source".into(),
                line,
                expected: "csv, pamap2 or synthetic",
                value: other.to_string(),
            });
        }
    };
    if !matches!(dataset, DatasetSource::Synthetic(_)) && !doc.classes.is_empty()
        || !matches!(dataset, DatasetSource::Synthetic(_)) && doc.entries.keys().any(|k| k.starts_with("synth."))
    {
        return Err(ConfigError::Invalid("[synth] is only used with source = synthetic".into()));
    }
    let layer_sizes = Document::require(doc.list("model.layer_sizes", "a list of positive integers")?, "model.layer_sizes")?;
    let mut cfg = ExperimentConfig::new(dataset, layer_sizes);

    macro_rules! set {
        ($field:expr, $key:literal, $what:literal) => {
            if let Some(v) = doc.get($key, $what)? {
                $field = v;
            }
        };
    }
    cfg.channels = doc.list("dataset.channels", "a list of channel indices")?;
    cfg.sample_rate = doc.get("dataset.sample_rate", "a number")?;
    set!(cfg.window_seconds, "windowing.window_seconds", "a number");
    set!(cfg.step_seconds, "windowing.step_seconds", "a number");
    set!(cfg.m, "neighbors.m", "a non-negative integer");
    set!(cfg.n, "neighbors.n", "a non-negative integer");
    set!(cfg.leaky_slope, "model.leaky_slope", "a number");
    set!(cfg.training.alpha, "training.alpha", "a number");
    set!(cfg.training.beta, "training.beta", "a number");
    set!(cfg.training.learning_rate, "training.learning_rate", "a number");
    set!(cfg.training.batch_size, "training.batch_size", "a positive integer");
    set!(cfg.training.max_epochs, "training.max_epochs", "a positive integer");
    set!(cfg.training.patience, "training.patience", "a positive integer");
    set!(cfg.training.val_fraction, "training.val_fraction", "a number");
    if let Some(methods) = doc.list("experiment.methods", "PCA, AE_ONLY, TC_AE, LP_AE or JOINT")? {
        cfg.methods = methods;
    }
    if let Some(offsets) = doc.list("experiment.k_offsets", "a list of non-negative integers")? {
        cfg.k_offsets = offsets;
    }
    set!(cfg.folds, "experiment.folds", "an integer ≥ 2");
    set!(cfg.restarts, "experiment.restarts", "a positive integer");
    set!(cfg.output_dir, "experiment.output_dir", "a path");
    set!(cfg.seed, "experiment.seed", "a non-negative integer");
    set!(cfg.score_all, "experiment.score_all", "true or false");
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config_str(&text, path.parent())
}
