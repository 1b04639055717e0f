use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{IngestError, SensorRecord, Session, SessionSet};

/// Activity id used by PAMAP2 for transient periods between activities.
const TRANSIENT: u32 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct Pamap2Options {
    /// The files carry no rate; 100 Hz is the IMU rate of the public release.
    pub sample_rate: f64,
}

impl Default for Pamap2Options {
    fn default() -> Self {
        Self { sample_rate: 100.0 }
    }
}

pub fn pamap2_activity_name(id: u32) -> String {
    let name = match id {
        1 => "lying",
        2 => "sitting",
        3 => "standing",
        4 => "walking",
        5 => "running",
        6 => "cycling",
        7 => "nordic_walking",
        9 => "watching_tv",
        10 => "computer_work",
        11 => "car_driving",
        12 => "ascending_stairs",
        13 => "descending_stairs",
        16 => "vacuum_cleaning",
        17 => "ironing",
        18 => "folding_laundry",
        19 => "house_cleaning",
        20 => "playing_soccer",
        24 => "rope_jumping",
        _ => return format!("activity_{id}"),
    };
    name.to_string()
}

struct RawRow {
    timestamp: f64,
    activity: u32,
    channels: Vec<f64>,
}

struct RawFile {
    stem: String,
    /// Runs of consecutive non-transient rows.
    spans: Vec<Vec<RawRow>>,
    width: usize,
}

fn parse_file(path: &Path) -> Result<RawFile, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    let malformed = |line: usize, reason: String| IngestError::MalformedRow {
        path: path.to_path_buf(),
        line: line as u64,
        reason,
    };
    let mut spans: Vec<Vec<RawRow>> = Vec::new();
    let mut current: Vec<RawRow> = Vec::new();
    let mut width: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() < 3 {
            return Err(malformed(lineno, format!("expected at least 3 columns, found {}", fields.len())));
        }
        match width {
            None => width = Some(fields.len() - 2),
            Some(w) if w != fields.len() - 2 => {
                return Err(malformed(lineno, format!("expected {} columns, found {}", w + 2, fields.len())))
            }
            _ => {}
        }
        let number = |s: &str| -> Result<f64, IngestError> {
            if s.eq_ignore_ascii_case("nan") {
                return Ok(f64::NAN);
            }
            s.parse::<f64>().map_err(|_| malformed(lineno, format!("non-numeric value `{s}`")))
        };
        let timestamp = number(fields[0])?;
        let activity = fields[1]
            .parse::<f64>()
            .ok()
            .filter(|a| a.fract() == 0.0 && *a >= 0.0)
            .ok_or_else(|| malformed(lineno, format!("invalid activity id `{}`", fields[1])))?
            as u32;
        if activity == TRANSIENT {
            if !current.is_empty() {
                spans.push(std::mem::take(&mut current));
            }
            continue;
        }
        let channels = fields[2..].iter().map(|s| number(s)).collect::<Result<Vec<_>, _>>()?;
        current.push(RawRow { timestamp, activity, channels });
    }
    if !current.is_empty() {
        spans.push(current);
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(RawFile { stem, spans, width: width.unwrap_or(0) })
}

/// Loads every `*.dat` file of a PAMAP2 `Protocol`/`Optional` directory.
///
/// Rows with the transient activity id are dropped, and each maximal run of
/// remaining rows becomes its own session `"{file stem}#{run}"`. Files are
/// parsed in parallel but merged in lexicographic path order, so class ids
/// (assigned in first-appearance order) do not depend on scheduling.
pub fn load_pamap2(directory: &Path, options: &Pamap2Options) -> Result<SessionSet, IngestError> {
    if !(options.sample_rate > 0.0) {
        return Err(IngestError::InvalidConfig(format!("sample rate must be positive, got {}", options.sample_rate)));
    }
    let entries =
        fs::read_dir(directory).map_err(|source| IngestError::Io { path: directory.to_path_buf(), source })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "dat"))
        .collect();
    if paths.is_empty() {
        return Err(IngestError::EmptyDirectory(directory.to_path_buf()));
    }
    paths.sort();

    let files: Vec<RawFile> = paths.par_iter().map(|p| parse_file(p)).collect::<Result<_, _>>()?;
    let channel_count = files.iter().map(|f| f.width).find(|&w| w > 0).unwrap_or(0);
    if let Some(bad) = files.iter().find(|f| f.width != 0 && f.width != channel_count) {
        return Err(IngestError::InvalidConfig(format!(
            "{}: {} channels, other files have {channel_count}",
            bad.stem, bad.width
        )));
    }

    let mut class_ids: HashMap<u32, usize> = HashMap::new();
    let mut class_names = Vec::new();
    let mut sessions = Vec::new();
    for file in files {
        for (span_no, span) in file.spans.into_iter().enumerate() {
            let mut records: Vec<SensorRecord> = span
                .into_iter()
                .map(|row| {
                    let next = class_names.len();
                    let id = *class_ids.entry(row.activity).or_insert_with(|| {
                        class_names.push(pamap2_activity_name(row.activity));
                        next
                    });
                    SensorRecord { timestamp: row.timestamp, channels: row.channels, label: Some(id) }
                })
                .collect();
            records.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
            sessions.push(Session {
                subject_id: file.stem.clone(),
                session_id: format!("{}#{span_no}", file.stem),
                sample_rate: options.sample_rate,
                records,
            });
        }
    }
    Ok(SessionSet { sessions, channel_count, class_names })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir_with(files: &[(&str, &str)]) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for (name, body) in files {
            fs::write(dir.path().join(name), body).unwrap();
        }
        dir
    }

    #[test]
    fn transient_only_file_yields_no_records() {
        let dir = dir_with(&[("subject101.dat", "0.00 0 1 2 3\n0.01 0 1 2 3\n")]);
        let set = load_pamap2(dir.path(), &Pamap2Options::default()).unwrap();
        assert_eq!(set.record_count(), 0);
    }

    #[test]
    fn nan_cells_are_marked_missing() {
        let dir = dir_with(&[("subject101.dat", "0.00 1 NaN 2 3\n0.01 1 1 2 3\n0.02 1 1 2 3\n")]);
        let set = load_pamap2(dir.path(), &Pamap2Options::default()).unwrap();
        assert_eq!(set.record_count(), 3);
        let missing: usize =
            set.sessions[0].records.iter().map(|r| r.channels.iter().filter(|v| v.is_nan()).count()).sum();
        assert_eq!(missing, 1);
        assert_eq!(set.channel_count, 3);
        assert_eq!(set.class_names, vec!["lying"]);
    }

    #[test]
    fn two_subject_files_give_two_sessions_in_path_order() {
        let dir = dir_with(&[
            ("subject102.dat", "0.00 4 1 2\n0.01 4 1 2\n"),
            ("subject101.dat", "0.00 5 1 2\n0.01 5 1 2\n"),
        ]);
        let set = load_pamap2(dir.path(), &Pamap2Options::default()).unwrap();
        assert!(set.sessions.len() >= 2);
        assert_eq!(set.sessions[0].subject_id, "subject101");
        assert_eq!(set.class_names, vec!["running", "walking"]);
    }

    #[test]
    fn transient_rows_split_sessions() {
        let dir = dir_with(&[("subject101.dat", "0.00 1 1\n0.01 1 1\n0.02 0 1\n0.03 2 1\n")]);
        let set = load_pamap2(dir.path(), &Pamap2Options::default()).unwrap();
        assert_eq!(set.sessions.len(), 2);
        assert_eq!(set.sessions[1].session_id, "subject101#1");
    }

    #[test]
    fn empty_directory_and_malformed_row() {
        let dir = dir_with(&[]);
        assert!(matches!(load_pamap2(dir.path(), &Pamap2Options::default()), Err(IngestError::EmptyDirectory(_))));
        let dir = dir_with(&[("subject101.dat", "0.00 1 1\n0.01 1 x\n")]);
        assert!(matches!(
            load_pamap2(dir.path(), &Pamap2Options::default()),
            Err(IngestError::MalformedRow { line: 2, .. })
        ));
    }
}
