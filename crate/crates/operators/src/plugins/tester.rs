//! Synthetic source of monotonic counters used for overhead measurements.

use odaframe_core::{SensorReading, Topic, TopicError};

#[derive(Debug, Clone)]
pub struct TesterSource {
    topics: Vec<Topic>,
    counter: i64,
}

impl TesterSource {
    /// `count` sensors named `{prefix}/tester{i}`; `prefix` is a node path
    /// such as `/n01`.
    pub fn new(prefix: &str, count: usize) -> Result<Self, TopicError> {
        let prefix = prefix.trim_end_matches('/');
        let topics = (0..count)
            .map(|i| Topic::new(format!("{prefix}/tester{i:04}")))
            .collect::<Result<_, _>>()?;
        Ok(TesterSource { topics, counter: 0 })
    }

    pub fn topics(&self) -> &[Topic] {
        &self.topics
    }

    /// One reading per sensor; every call increments the shared counter.
    pub fn sample(&mut self, now: u64) -> Vec<(Topic, SensorReading)> {
        self.counter += 1;
        let r = SensorReading::new(self.counter, now);
        self.topics.iter().map(|t| (t.clone(), r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_up_from_one() {
        let mut s = TesterSource::new("/n1", 3).unwrap();
        let values: Vec<i64> = (1..=5).map(|t| s.sample(t)[0].1.value).collect();
        assert_eq!(values, vec![1, 2, 3, 4, 5]);
        assert_eq!(s.sample(6).len(), 3);
        let mut fresh = TesterSource::new("/n1", 3).unwrap();
        assert_eq!(fresh.sample(7)[0].1.value, 1);
    }

    #[test]
    fn thousand_sensors() {
        let mut s = TesterSource::new("/n1/", 1000).unwrap();
        assert_eq!(s.sample(1).len(), 1000);
        assert_eq!(s.topics()[999].as_str(), "/n1/tester0999");
    }
}
