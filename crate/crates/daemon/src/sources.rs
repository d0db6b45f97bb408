//! Sampling sources of a pusher.

use std::path::Path;

use odaframe_core::{SensorReading, Topic, NS_PER_MS};
use odaframe_operators::plugins::tester::TesterSource;
use serde::Deserialize;

use crate::config::{SourceConfig, SourceKind};

pub trait Source: Send {
    fn name(&self) -> &str;
    fn interval_ns(&self) -> u64;
    /// Topics the source may produce.
    fn topics(&self) -> Vec<Topic>;
    fn sample(&mut self, now: u64) -> Vec<(Topic, SensorReading)>;
}

pub struct Tester {
    name: String,
    interval_ns: u64,
    inner: TesterSource,
}

impl Tester {
    pub fn new(name: &str, prefix: &str, count: usize, interval_ns: u64) -> Result<Self, String> {
        Ok(Tester {
            name: name.to_string(),
            interval_ns,
            inner: TesterSource::new(prefix, count).map_err(|e| e.to_string())?,
        })
    }
}

impl Source for Tester {
    fn name(&self) -> &str {
        &self.name
    }

    fn interval_ns(&self) -> u64 {
        self.interval_ns
    }

    fn topics(&self) -> Vec<Topic> {
        self.inner.topics().to_vec()
    }

    fn sample(&mut self, now: u64) -> Vec<(Topic, SensorReading)> {
        self.inner.sample(now)
    }
}

#[derive(Deserialize)]
struct ReplayRow {
    topic: String,
    timestamp_ns: u64,
    value: i64,
}

/// Replays recorded readings with their original spacing. The first sample
/// call anchors the recording's first timestamp at `now`; every later call
/// emits the rows that have become due.
pub struct Replay {
    name: String,
    interval_ns: u64,
    rows: Vec<(Topic, SensorReading)>,
    cursor: usize,
    shift: Option<i128>,
}

impl Replay {
    pub fn from_csv(name: &str, text: &str, interval_ns: u64) -> Result<Self, String> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (i, row) in reader.deserialize::<ReplayRow>().enumerate() {
            let row = row.map_err(|e| format!("row {}: {e}", i + 2))?;
            let topic = Topic::new(&row.topic).map_err(|e| format!("row {}: {e}", i + 2))?;
            rows.push((topic, SensorReading::new(row.value, row.timestamp_ns)));
        }
        rows.sort_by_key(|(_, r)| r.timestamp);
        Ok(Replay {
            name: name.to_string(),
            interval_ns,
            rows,
            cursor: 0,
            shift: None,
        })
    }

    pub fn open(name: &str, path: &Path, interval_ns: u64) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_csv(name, &text, interval_ns).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn remaining(&self) -> usize {
        self.rows.len() - self.cursor
    }
}

impl Source for Replay {
    fn name(&self) -> &str {
        &self.name
    }

    fn interval_ns(&self) -> u64 {
        self.interval_ns
    }

    fn topics(&self) -> Vec<Topic> {
        let mut t: Vec<Topic> = self.rows.iter().map(|(t, _)| t.clone()).collect();
        t.sort();
        t.dedup();
        t
    }

    fn sample(&mut self, now: u64) -> Vec<(Topic, SensorReading)> {
        let Some(first) = self.rows.first() else {
            return Vec::new();
        };
        let shift = *self.shift.get_or_insert(now as i128 - first.1.timestamp as i128);
        let mut out = Vec::new();
        while let Some((topic, r)) = self.rows.get(self.cursor) {
            let at = r.timestamp as i128 + shift;
            if at > now as i128 {
                break;
            }
            out.push((topic.clone(), SensorReading::new(r.value, at.max(0) as u64)));
            self.cursor += 1;
        }
        out
    }
}

pub fn build(cfg: &SourceConfig) -> Result<Box<dyn Source>, String> {
    let interval = cfg.interval_ms * NS_PER_MS;
    Ok(match &cfg.kind {
        SourceKind::Tester { prefix, count } => Box::new(Tester::new(&cfg.name, prefix, *count, interval)?),
        SourceKind::Replay { file } => Box::new(Replay::open(&cfg.name, file, interval)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_keeps_spacing() {
        let csv = "topic,timestamp_ns,value\n/a/x,100,1\n/a/y,150,2\n/a/x,300,3\n";
        let mut r = Replay::from_csv("r", csv, 100).unwrap();
        assert_eq!(r.topics().len(), 2);
        let first = r.sample(1000);
        assert_eq!(first.len(), 1);
        assert_eq!(first[0].1, SensorReading::new(1, 1000));
        let next = r.sample(1100);
        assert_eq!(next[0].1, SensorReading::new(2, 1050));
        assert!(r.sample(1150).is_empty());
        assert_eq!(r.sample(5000)[0].1, SensorReading::new(3, 1200));
        assert_eq!(r.remaining(), 0);
    }

    #[test]
    fn replay_reports_bad_rows() {
        let err = Replay::from_csv("r", "topic,timestamp_ns,value\nnope,1,2\n", 1).err().unwrap();
        assert!(err.starts_with("row 2"), "{err}");
    }
}
