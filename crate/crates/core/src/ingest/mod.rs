//! Sensor sessions: loading, missing-sample repair and sliding-window segmentation.
//!
//! Missing channel readings are stored as `NaN` inside [`SensorRecord::channels`]
//! until [`repair_missing`] fills them.

mod canonical;
mod pamap2;
mod synth;

use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::Matrix;

pub use self::canonical::{load_canonical_csv, write_canonical_csv, CsvSchema};
pub use self::pamap2::{load_pamap2, pamap2_activity_name, Pamap2Options};
pub use self::synth::{generate_synthetic, ChannelRegime, ClassRegime, SynthConfig};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: line {line}: {reason}")]
    MalformedRow { path: PathBuf, line: u64, reason: String },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("{0}: file has no data rows")]
    EmptyFile(PathBuf),
    #[error("{0}: no data files found")]
    EmptyDirectory(PathBuf),
    #[error("session {session}: channel {channel} has no readings")]
    AllMissingChannel { session: SessionRef, channel: usize },
    #[error("session {session}: {len} samples cannot hold a {window}-sample window")]
    WindowLongerThanSession { session: SessionRef, len: usize, window: usize },
    #[error("session {session}: sample {sample} still missing; repair before segmenting")]
    UnrepairedSession { session: SessionRef, sample: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One timestamped multichannel reading.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorRecord {
    pub timestamp: f64,
    /// `NaN` marks a missing reading.
    pub channels: Vec<f64>,
    pub label: Option<usize>,
}

/// (subject, session) pair identifying a contiguous recording.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SessionRef {
    pub subject_id: String,
    pub session_id: String,
}

impl SessionRef {
    pub fn new(subject_id: impl Into<String>, session_id: impl Into<String>) -> Self {
        Self { subject_id: subject_id.into(), session_id: session_id.into() }
    }
}

impl fmt::Display for SessionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.subject_id, self.session_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub subject_id: String,
    pub session_id: String,
    pub sample_rate: f64,
    pub records: Vec<SensorRecord>,
}

impl Session {
    pub fn session_ref(&self) -> SessionRef {
        SessionRef::new(&self.subject_id, &self.session_id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionSet {
    pub sessions: Vec<Session>,
    pub channel_count: usize,
    /// Class id → name.
    pub class_names: Vec<String>,
}

impl SessionSet {
    pub fn record_count(&self) -> usize {
        self.sessions.iter().map(Session::len).sum()
    }

    /// Keeps only the listed channels, in the listed order.
    pub fn select_channels(&self, channels: &[usize]) -> Result<SessionSet, IngestError> {
        if let Some(&bad) = channels.iter().find(|&&c| c >= self.channel_count) {
            return Err(IngestError::InvalidConfig(format!(
                "channel {bad} out of range (dataset has {})",
                self.channel_count
            )));
        }
        let sessions = self
            .sessions
            .iter()
            .map(|s| Session {
                records: s
                    .records
                    .iter()
                    .map(|r| SensorRecord {
                        timestamp: r.timestamp,
                        channels: channels.iter().map(|&c| r.channels[c]).collect(),
                        label: r.label,
                    })
                    .collect(),
                ..s.clone()
            })
            .collect();
        Ok(SessionSet { sessions, channel_count: channels.len(), class_names: self.class_names.clone() })
    }
}

/// A fixed-length window cut from one session.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// Window ordinal within its session (offset / step).
    pub segment_index: usize,
    pub session_ref: SessionRef,
    pub start_time: f64,
    /// `[window_length × channel_count]`.
    pub samples: Matrix,
    pub label: usize,
}

/// Converts a duration to a sample count, rounding to the nearest sample.
pub fn seconds_to_samples(seconds: f64, sample_rate: f64) -> usize {
    (seconds * sample_rate).round().max(0.0) as usize
}

/// Fills missing readings by per-channel linear interpolation; gaps at either
/// end take the nearest available value.
pub fn repair_missing(session: &Session) -> Result<Session, IngestError> {
    let mut out = session.clone();
    let n = out.records.len();
    if n == 0 {
        return Ok(out);
    }
    let channels = out.records[0].channels.len();
    for c in 0..channels {
        let known: Vec<usize> = (0..n).filter(|&i| !out.records[i].channels[c].is_nan()).collect();
        let (&first, &last) = match (known.first(), known.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(IngestError::AllMissingChannel { session: session.session_ref(), channel: c }),
        };
        let head = out.records[first].channels[c];
        for r in &mut out.records[..first] {
            r.channels[c] = head;
        }
        let tail = out.records[last].channels[c];
        for r in &mut out.records[last + 1..] {
            r.channels[c] = tail;
        }
        for pair in known.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b - a < 2 {
                continue;
            }
            let (va, vb) = (out.records[a].channels[c], out.records[b].channels[c]);
            let span = (b - a) as f64;
            for i in a + 1..b {
                let t = (i - a) as f64 / span;
                out.records[i].channels[c] = va + t * (vb - va);
            }
        }
    }
    Ok(out)
}

/// Majority label among labeled rows; ties go to the class seen first.
/// `None` when no row carries a label.
fn majority_label(labels: impl Iterator<Item = Option<usize>>) -> Option<usize> {
    // (class, count, first position)
    let mut tally: Vec<(usize, usize, usize)> = Vec::new();
    for (pos, label) in labels.enumerate() {
        let Some(label) = label else { continue };
        match tally.iter_mut().find(|t| t.0 == label) {
            Some(t) => t.1 += 1,
            None => tally.push((label, 1, pos)),
        }
    }
    tally
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)))
        .map(|t| t.0)
}

/// Cuts a repaired session into windows of `window_seconds`, advancing by
/// `step_seconds`. A trailing partial window is dropped, as are windows that
/// contain no labeled record (their ordinal is skipped, not reused).
pub fn segment_sliding_window(
    session: &Session,
    window_seconds: f64,
    step_seconds: f64,
) -> Result<Vec<Segment>, IngestError> {
    if !(window_seconds > 0.0 && step_seconds > 0.0) {
        return Err(IngestError::InvalidConfig(format!(
            "window ({window_seconds} s) and step ({step_seconds} s) must be positive"
        )));
    }
    let window = seconds_to_samples(window_seconds, session.sample_rate);
    let step = seconds_to_samples(step_seconds, session.sample_rate);
    if window == 0 || step == 0 {
        return Err(IngestError::InvalidConfig(format!(
            "window/step round to zero samples at {} Hz",
            session.sample_rate
        )));
    }
    if let Some((sample, _)) =
        session.records.iter().enumerate().find(|(_, r)| r.channels.iter().any(|v| v.is_nan()))
    {
        return Err(IngestError::UnrepairedSession { session: session.session_ref(), sample });
    }
    let len = session.records.len();
    if len < window {
        return Err(IngestError::WindowLongerThanSession { session: session.session_ref(), len, window });
    }
    let channels = session.records[0].channels.len();
    let session_ref = session.session_ref();
    let count = (len - window) / step + 1;
    let mut segments = Vec::with_capacity(count);
    for index in 0..count {
        let start = index * step;
        let rows = &session.records[start..start + window];
        let Some(label) = majority_label(rows.iter().map(|r| r.label)) else { continue };
        let mut samples = Matrix::zeros(window, channels);
        for (i, r) in rows.iter().enumerate() {
            samples.row_mut(i).copy_from_slice(&r.channels);
        }
        segments.push(Segment {
            segment_index: index,
            session_ref: session_ref.clone(),
            start_time: rows[0].timestamp,
            samples,
            label,
        });
    }
    Ok(segments)
}

/// Outcome of segmenting a whole [`SessionSet`].
#[derive(Debug, Clone, Default)]
pub struct Segmentation {
    pub segments: Vec<Segment>,
    /// Sessions too short for a single window.
    pub skipped_sessions: Vec<SessionRef>,
}

/// Repairs and segments every session in order. Sessions shorter than one
/// window are reported in [`Segmentation::skipped_sessions`] instead of failing.
pub fn segment_set(set: &SessionSet, window_seconds: f64, step_seconds: f64) -> Result<Segmentation, IngestError> {
    let mut out = Segmentation::default();
    for session in &set.sessions {
        if session.is_empty() {
            out.skipped_sessions.push(session.session_ref());
            continue;
        }
        let repaired = repair_missing(session)?;
        match segment_sliding_window(&repaired, window_seconds, step_seconds) {
            Ok(mut segs) => out.segments.append(&mut segs),
            Err(IngestError::WindowLongerThanSession { session, .. }) => out.skipped_sessions.push(session),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn session_from(values: &[f64], labels: &[usize], rate: f64) -> Session {
        Session {
            subject_id: "s".into(),
            session_id: "0".into(),
            sample_rate: rate,
            records: values
                .iter()
                .zip(labels)
                .enumerate()
                .map(|(i, (&v, &l))| SensorRecord { timestamp: i as f64 / rate, channels: vec![v], label: Some(l) })
                .collect(),
        }
    }

    fn channel(s: &Session) -> Vec<f64> {
        s.records.iter().map(|r| r.channels[0]).collect()
    }

    #[test]
    fn interpolates_interior_gap() {
        let s = session_from(&[1.0, f64::NAN, 3.0], &[0, 0, 0], 1.0);
        assert_eq!(channel(&repair_missing(&s).unwrap()), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn extends_leading_gap() {
        let s = session_from(&[f64::NAN, 5.0], &[0, 0], 1.0);
        assert_eq!(channel(&repair_missing(&s).unwrap()), vec![5.0, 5.0]);
    }

    #[test]
    fn all_missing_channel_is_an_error() {
        let s = session_from(&[f64::NAN, f64::NAN], &[0, 0], 1.0);
        assert!(matches!(repair_missing(&s), Err(IngestError::AllMissingChannel { channel: 0, .. })));
    }

    #[test]
    fn ten_samples_window_four_step_two() {
        let vals: Vec<f64> = (0..10).map(f64::from).collect();
        let s = session_from(&vals, &[0; 10], 1.0);
        let segs = segment_sliding_window(&s, 4.0, 2.0).unwrap();
        let starts: Vec<f64> = segs.iter().map(|g| g.samples.get(0, 0)).collect();
        assert_eq!(starts, vec![0.0, 2.0, 4.0, 6.0]);
        assert_eq!(segs.iter().map(|g| g.segment_index).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn window_equal_to_session_gives_one_segment() {
        let s = session_from(&[1.0; 6], &[0; 6], 2.0);
        for step in [0.5, 1.0, 10.0] {
            assert_eq!(segment_sliding_window(&s, 3.0, step).unwrap().len(), 1);
        }
    }

    #[test]
    fn pamap2_defaults_round_to_512_and_100() {
        assert_eq!(seconds_to_samples(5.12, 100.0), 512);
        assert_eq!(seconds_to_samples(1.0, 100.0), 100);
    }

    #[test]
    fn short_session_reports_window_error() {
        let s = session_from(&[1.0; 3], &[0; 3], 1.0);
        assert!(matches!(
            segment_sliding_window(&s, 4.0, 1.0),
            Err(IngestError::WindowLongerThanSession { len: 3, window: 4, .. })
        ));
    }

    #[test]
    fn majority_label_tie_goes_to_first_seen() {
        assert_eq!(majority_label([Some(2), Some(1), Some(1), Some(2)].into_iter()), Some(2));
        assert_eq!(majority_label([Some(1), Some(2), Some(2)].into_iter()), Some(2));
        assert_eq!(majority_label([None, None].into_iter()), None);
    }

    #[test]
    fn unlabeled_window_is_skipped_but_ordinal_kept() {
        let mut s = session_from(&[0.0; 6], &[0; 6], 1.0);
        s.records[2].label = None;
        s.records[3].label = None;
        let segs = segment_sliding_window(&s, 2.0, 2.0).unwrap();
        assert_eq!(segs.iter().map(|g| g.segment_index).collect::<Vec<_>>(), vec![0, 2]);
    }

    proptest! {
        #[test]
        fn segment_count_formula(len in 1usize..200, window in 1usize..50, step in 1usize..20) {
            let s = session_from(&vec![0.0; len], &vec![0; len], 1.0);
            let expected = if len >= window { (len - window) / step + 1 } else { 0 };
            let got = segment_sliding_window(&s, window as f64, step as f64).map(|v| v.len()).unwrap_or(0);
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn segments_copy_original_samples(len in 5usize..120, window in 1usize..20, step in 1usize..10) {
            prop_assume!(len >= window);
            let vals: Vec<f64> = (0..len).map(|i| (i as f64 * 0.37).sin()).collect();
            let s = session_from(&vals, &vec![0; len], 1.0);
            for seg in segment_sliding_window(&s, window as f64, step as f64).unwrap() {
                let start = seg.segment_index * step;
                for i in 0..window {
                    prop_assert_eq!(seg.samples.get(i, 0), vals[start + i]);
                }
            }
        }

        #[test]
        fn repair_is_idempotent(vals in proptest::collection::vec(prop_oneof![Just(f64::NAN), -10.0f64..10.0], 1..40)) {
            prop_assume!(vals.iter().any(|v| !v.is_nan()));
            let s = session_from(&vals, &vec![0; vals.len()], 1.0);
            let once = repair_missing(&s).unwrap();
            let twice = repair_missing(&once).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
