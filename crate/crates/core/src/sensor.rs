//! Sensor identities and readings.

use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::TopicError;

/// A sensor topic such as `/rack4/chassis2/server3/power`.
///
/// The last segment is the sensor name; the preceding segments describe where
/// the sensor sits in the monitored system. Cloning is cheap.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Topic(Arc<str>);

impl Topic {
    pub fn new(path: impl AsRef<str>) -> Result<Self, TopicError> {
        let path = path.as_ref();
        validate(path)?;
        Ok(Topic(Arc::from(path)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Path segments without the leading empty segment.
    pub fn segments(&self) -> impl Iterator<Item = &str> {
        self.0[1..].split('/')
    }

    /// The sensor name (last segment).
    pub fn name(&self) -> &str {
        let idx = self.0.rfind('/').unwrap_or(0);
        &self.0[idx + 1..]
    }

    /// Placement of the sensor, with trailing slash: `/rack4/chassis2/server3/`.
    pub fn parent_path(&self) -> &str {
        let idx = self.0.rfind('/').unwrap_or(0);
        &self.0[..=idx]
    }

    /// `true` if this topic lies under `prefix` on a path-segment boundary,
    /// or `prefix` is the empty string or `/`.
    pub fn has_prefix(&self, prefix: &str) -> bool {
        if prefix.is_empty() || prefix == "/" {
            return true;
        }
        let s = self.as_str();
        if !s.starts_with(prefix) {
            return false;
        }
        prefix.ends_with('/') || s.len() == prefix.len() || s.as_bytes()[prefix.len()] == b'/'
    }
}

fn validate(path: &str) -> Result<(), TopicError> {
    if path.is_empty() {
        return Err(TopicError::Empty);
    }
    if !path.starts_with('/') {
        return Err(TopicError::MissingLeadingSlash(path.to_string()));
    }
    if path.len() > 1 && path.ends_with('/') || path == "/" {
        return Err(TopicError::TrailingSlash(path.to_string()));
    }
    if path[1..].split('/').any(str::is_empty) {
        return Err(TopicError::EmptySegment(path.to_string()));
    }
    if path.chars().any(char::is_control) {
        return Err(TopicError::ControlCharacter(path.to_string()));
    }
    Ok(())
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Topic({:?})", &*self.0)
    }
}

impl FromStr for Topic {
    type Err = TopicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Topic::new(s)
    }
}

impl AsRef<str> for Topic {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Topic {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl Serialize for Topic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Topic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Topic::new(s).map_err(serde::de::Error::custom)
    }
}

/// One timestamped sample. Timestamps are nanoseconds since the Unix epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SensorReading {
    pub value: i64,
    pub timestamp: u64,
}

impl SensorReading {
    pub const fn new(value: i64, timestamp: u64) -> Self {
        SensorReading { value, timestamp }
    }
}

pub const NS_PER_MS: u64 = 1_000_000;
pub const NS_PER_SEC: u64 = 1_000_000_000;

/// Fixed-point factor used for fractional analysis outputs.
pub const FIXED_POINT_SCALE: i64 = 1000;

pub fn to_fixed(value: f64) -> i64 {
    (value * FIXED_POINT_SCALE as f64).round() as i64
}

pub fn from_fixed(value: i64) -> f64 {
    value as f64 / FIXED_POINT_SCALE as f64
}

/// Wall-clock time in nanoseconds since the epoch.
pub fn now_ns() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(1)
}
