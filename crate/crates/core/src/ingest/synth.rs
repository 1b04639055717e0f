use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{IngestError, SensorRecord, Session, SessionSet};
use crate::seed;

/// Signal shape of one channel under one activity:
/// `level + amplitude · cos(2π · frequency · t)`, `t` measured from bout start.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRegime {
    pub level: f64,
    pub amplitude: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassRegime {
    pub name: String,
    pub channels: Vec<ChannelRegime>,
}

/// Desk-scale activity generator with known ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub sample_rate: f64,
    pub classes: Vec<ClassRegime>,
    /// One additive offset per synthetic subject, applied to every channel.
    pub subject_offsets: Vec<f64>,
    pub sessions_per_subject: usize,
    pub bouts_per_session: usize,
    pub min_bout_seconds: f64,
    pub max_bout_seconds: f64,
    pub noise_std: f64,
}

impl SynthConfig {
    pub fn channel_count(&self) -> usize {
        self.classes.first().map_or(0, |c| c.channels.len())
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let bad = |msg: String| Err(IngestError::InvalidConfig(msg));
        if !(self.sample_rate > 0.0) {
            return bad(format!("sample_rate must be positive, got {}", self.sample_rate));
        }
        if !(self.min_bout_seconds > 0.0) || !(self.max_bout_seconds >= self.min_bout_seconds) {
            return bad(format!(
                "bout duration range [{}, {}] s is invalid",
                self.min_bout_seconds, self.max_bout_seconds
            ));
        }
        if self.classes.is_empty() {
            return bad("at least one activity class is required".into());
        }
        let channels = self.channel_count();
        if channels == 0 || self.classes.iter().any(|c| c.channels.len() != channels) {
            return bad("every class must describe the same non-zero number of channels".into());
        }
        if self.subject_offsets.is_empty() || self.sessions_per_subject == 0 || self.bouts_per_session == 0 {
            return bad("need at least one subject, session and bout".into());
        }
        if !(self.noise_std >= 0.0) {
            return bad(format!("noise_std must be non-negative, got {}", self.noise_std));
        }
        if self.seconds_to_samples(self.min_bout_seconds) == 0 {
            return bad("min_bout_seconds is shorter than one sample".into());
        }
        Ok(())
    }

    fn seconds_to_samples(&self, s: f64) -> usize {
        super::seconds_to_samples(s, self.sample_rate)
    }
}

/// Generates one session per (subject, session slot). Each session is a chain
/// of bouts; classes are drawn as repeated seeded permutations so every class
/// appears once per block of `classes.len()` bouts. Output depends only on
/// `(config, seed)`.
pub fn generate_synthetic(config: &SynthConfig, seed: u64) -> Result<SessionSet, IngestError> {
    config.validate()?;
    let channels = config.channel_count();
    let noise = Normal::new(0.0, config.noise_std).map_err(|e| IngestError::InvalidConfig(e.to_string()))?;
    let min_len = config.seconds_to_samples(config.min_bout_seconds);
    let max_len = config.seconds_to_samples(config.max_bout_seconds).max(min_len);
    let dt = 1.0 / config.sample_rate;

    let mut sessions = Vec::new();
    for (subject, &offset) in config.subject_offsets.iter().enumerate() {
        for slot in 0..config.sessions_per_subject {
            let mut rng = seed::rng(seed::derive(seed, &[seed::stream::SYNTH, subject as u64, slot as u64]));
            let mut order: Vec<usize> = Vec::new();
            let mut records = Vec::new();
            for _ in 0..config.bouts_per_session {
                if order.is_empty() {
                    order = (0..config.classes.len()).collect();
                    order.shuffle(&mut rng);
                }
                let class = order.pop().unwrap_or(0);
                let regime = &config.classes[class];
                let len = if max_len > min_len { rng.random_range(min_len..=max_len) } else { min_len };
                for i in 0..len {
                    let t = i as f64 * dt;
                    let values: Vec<f64> = regime
                        .channels
                        .iter()
                        .map(|ch| {
                            let clean = ch.level
                                + ch.amplitude * (std::f64::consts::TAU * ch.frequency * t).cos()
                                + offset;
                            if config.noise_std > 0.0 {
                                clean + noise.sample(&mut rng)
                            } else {
                                clean
                            }
                        })
                        .collect();
                    records.push(SensorRecord {
                        timestamp: records.len() as f64 * dt,
                        channels: values,
                        label: Some(class),
                    });
                }
            }
            sessions.push(Session {
                subject_id: format!("subj{subject}"),
                session_id: format!("s{subject}-{slot}"),
                sample_rate: config.sample_rate,
                records,
            });
        }
    }
    let class_names = config.classes.iter().map(|c| c.name.clone()).collect();
    Ok(SessionSet { sessions, channel_count: channels, class_names })
}
