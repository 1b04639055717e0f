use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::{IngestError, SensorRecord, Session, SessionSet};

/// Column mapping for the canonical CSV layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub timestamp: String,
    pub subject: String,
    pub session: String,
    pub label: String,
    /// Channel columns in order. `None` takes every other column in header order.
    pub channels: Option<Vec<String>>,
    /// Sampling rate in Hz. `None` infers it per session from the median
    /// timestamp spacing.
    pub sample_rate: Option<f64>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            timestamp: "timestamp".into(),
            subject: "subject".into(),
            session: "session".into(),
            label: "label".into(),
            channels: None,
            sample_rate: None,
        }
    }
}

fn is_nan_token(s: &str) -> bool {
    s.eq_ignore_ascii_case("nan")
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, IngestError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
}

fn infer_rate(records: &[SensorRecord]) -> Option<f64> {
    let mut gaps: Vec<f64> =
        records.windows(2).map(|w| w[1].timestamp - w[0].timestamp).filter(|d| *d > 0.0).collect();
    if gaps.is_empty() {
        return None;
    }
    gaps.sort_by(f64::total_cmp);
    Some(1.0 / gaps[gaps.len() / 2])
}

/// Loads the canonical `timestamp,subject,session,label,ch0..chN` layout.
///
/// Sessions appear in first-appearance order of their (subject, session) pair;
/// class ids are assigned in first-appearance order of the label strings. An
/// empty label cell or `nan` marks an unlabeled record.
pub fn load_canonical_csv(path: &Path, schema: &CsvSchema) -> Result<SessionSet, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let malformed = |line: u64, reason: String| IngestError::MalformedRow { path: path.to_path_buf(), line, reason };

    let headers = reader.headers().map_err(|e| malformed(1, e.to_string()))?.clone();
    let ts_col = column(&headers, &schema.timestamp)?;
    let subject_col = column(&headers, &schema.subject)?;
    let session_col = column(&headers, &schema.session)?;
    let label_col = column(&headers, &schema.label)?;
    let channel_cols: Vec<usize> = match &schema.channels {
        Some(names) => names.iter().map(|n| column(&headers, n)).collect::<Result<_, _>>()?,
        None => (0..headers.len())
            .filter(|c| ![ts_col, subject_col, session_col, label_col].contains(c))
            .collect(),
    };
    if channel_cols.is_empty() {
        return Err(IngestError::MissingColumn("<channel>".into()));
    }

    let mut class_names: Vec<String> = Vec::new();
    let mut class_ids: HashMap<String, usize> = HashMap::new();
    let mut order: Vec<(String, String)> = Vec::new();
    let mut groups: HashMap<(String, String), Vec<SensorRecord>> = HashMap::new();

    for result in reader.records() {
        let row = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let parse = |col: usize, what: &str| -> Result<f64, IngestError> {
            let cell = &row[col];
            if is_nan_token(cell) {
                return Ok(f64::NAN);
            }
            cell.parse::<f64>().map_err(|_| malformed(line, format!("non-numeric {what} value `{cell}`")))
        };
        let timestamp = parse(ts_col, "timestamp")?;
        if timestamp.is_nan() {
            return Err(malformed(line, "missing timestamp".into()));
        }
        let channels = channel_cols
            .iter()
            .map(|&c| parse(c, &format!("channel `{}`", &headers[c])))
            .collect::<Result<Vec<_>, _>>()?;
        let raw_label = &row[label_col];
        let label = if raw_label.is_empty() || is_nan_token(raw_label) {
            None
        } else {
            let next = class_names.len();
            let id = *class_ids.entry(raw_label.to_string()).or_insert_with(|| {
                class_names.push(raw_label.to_string());
                next
            });
            Some(id)
        };
        let key = (row[subject_col].to_string(), row[session_col].to_string());
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(SensorRecord { timestamp, channels, label });
    }
    if order.is_empty() {
        return Err(IngestError::EmptyFile(path.to_path_buf()));
    }

    let mut sessions = Vec::with_capacity(order.len());
    for key in order {
        let mut records = groups.remove(&key).unwrap_or_default();
        records.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
        let sample_rate = match schema.sample_rate {
            Some(rate) => rate,
            None => infer_rate(&records).ok_or_else(|| {
                IngestError::InvalidConfig(format!(
                    "cannot infer sample rate of session {}/{}; set it explicitly",
                    key.0, key.1
                ))
            })?,
        };
        if !(sample_rate > 0.0) {
            return Err(IngestError::InvalidConfig(format!("sample rate must be positive, got {sample_rate}")));
        }
        sessions.push(Session { subject_id: key.0, session_id: key.1, sample_rate, records });
    }
    Ok(SessionSet { sessions, channel_count: channel_cols.len(), class_names })
}

/// Writes a session set in the canonical layout (`ch0..chN` channel columns).
/// Floats use the shortest round-trip representation, so reloading is exact.
pub fn write_canonical_csv(set: &SessionSet, path: &Path) -> Result<(), IngestError> {
    let io = |source| IngestError::Io { path: path.to_path_buf(), source };
    let mut out = std::io::BufWriter::new(File::create(path).map_err(io)?);
    let mut header = String::from("timestamp,subject,session,label");
    for c in 0..set.channel_count {
        header.push_str(&format!(",ch{c}"));
    }
    writeln!(out, "{header}").map_err(io)?;
    for s in &set.sessions {
        for r in &s.records {
            let label = r.label.map_or("", |l| set.class_names[l].as_str());
            write!(out, "{},{},{},{}", r.timestamp, s.subject_id, s.session_id, label).map_err(io)?;
            for v in &r.channels {
                if v.is_nan() {
                    write!(out, ",NaN").map_err(io)?;
                } else {
                    write!(out, ",{v}").map_err(io)?;
                }
            }
            writeln!(out).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn four_rows_one_subject() {
        let f = write_tmp(
            "timestamp,subject,session,label,ch0,ch1\n\
             0.0,a,1,walk,1,2\n0.5,a,1,walk,3,4\n1.0,a,1,sit,5,6\n1.5,a,1,sit,7,8\n",
        );
        let set = load_canonical_csv(f.path(), &CsvSchema::default()).unwrap();
        assert_eq!(set.sessions.len(), 1);
        assert_eq!(set.sessions[0].records.len(), 4);
        assert_eq!(set.channel_count, 2);
        assert_eq!(set.class_names, vec!["walk", "sit"]);
        assert_eq!(set.sessions[0].sample_rate, 2.0);
    }

    #[test]
    fn two_subjects_two_sessions() {
        let f = write_tmp("timestamp,subject,session,label,ch0\n0,a,1,x,1\n1,a,1,x,1\n0,b,1,y,2\n1,b,1,x,2\n");
        let set = load_canonical_csv(f.path(), &CsvSchema::default()).unwrap();
        assert_eq!(set.sessions.len(), 2);
        assert_eq!(set.sessions[1].subject_id, "b");
        assert_eq!(set.sessions[1].records[1].label, Some(0));
    }

    #[test]
    fn non_numeric_cell_names_the_line() {
        let f = write_tmp("timestamp,subject,session,label,ch0\n0,a,1,x,1\n1,a,1,x,abc\n");
        match load_canonical_csv(f.path(), &CsvSchema::default()) {
            Err(IngestError::MalformedRow { line, reason, .. }) => {
                assert_eq!(line, 3);
                assert!(reason.contains("abc"));
            }
            other => panic!("expected MalformedRow, got {other:?}"),
        }
    }

    #[test]
    fn nan_token_marks_missing_and_rows_sort_by_time() {
        let f = write_tmp("timestamp,subject,session,label,ch0\n1,a,1,x,NAN\n0,a,1,x,1\n2,a,1,,nan\n");
        let set = load_canonical_csv(f.path(), &CsvSchema::default()).unwrap();
        let recs = &set.sessions[0].records;
        assert_eq!(recs[0].channels[0], 1.0);
        assert!(recs[1].channels[0].is_nan());
        assert_eq!(recs[2].label, None);
    }

    #[test]
    fn missing_column_and_empty_file() {
        let f = write_tmp("timestamp,subject,label,ch0\n0,a,x,1\n");
        assert!(matches!(load_canonical_csv(f.path(), &CsvSchema::default()), Err(IngestError::MissingColumn(c)) if c == "session"));
        let f = write_tmp("timestamp,subject,session,label,ch0\n");
        assert!(matches!(load_canonical_csv(f.path(), &CsvSchema::default()), Err(IngestError::EmptyFile(_))));
    }

    #[test]
    fn write_then_load_is_exact() {
        let f = write_tmp("timestamp,subject,session,label,ch0,ch1\n0,a,1,x,0.1,NaN\n0.25,a,1,y,-3e-7,2\n");
        let set = load_canonical_csv(f.path(), &CsvSchema::default()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_canonical_csv(&set, out.path()).unwrap();
        let back = load_canonical_csv(out.path(), &CsvSchema::default()).unwrap();
        assert_eq!(set.sessions[0].records[1], back.sessions[0].records[1]);
        assert!(back.sessions[0].records[0].channels[1].is_nan());
        assert_eq!(set.class_names, back.class_names);
    }
}
