//! Topic-to-cache registry owned by a daemon.

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::RwLock;
use serde::Serialize;

use crate::cache::SharedCache;
use crate::sensor::{SensorReading, Topic};

/// Per-sensor metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SensorMeta {
    /// Readings are stored as `value * scale`; 1 for raw counters, 1000 for
    /// fixed-point analysis outputs.
    pub scale: i64,
}

impl Default for SensorMeta {
    fn default() -> Self {
        SensorMeta { scale: 1 }
    }
}

#[derive(Debug, Clone)]
struct Entry {
    cache: SharedCache,
    meta: SensorMeta,
}

#[derive(Debug)]
pub struct SensorRegistry {
    capacity_ns: u64,
    interval_ns: u64,
    entries: RwLock<HashMap<Topic, Entry>>,
}

impl SensorRegistry {
    /// Creates a registry whose caches retain `capacity_ns` of history and
    /// assume sampling every `interval_ns`.
    pub fn new(capacity_ns: u64, interval_ns: u64) -> Arc<Self> {
        Arc::new(SensorRegistry {
            capacity_ns,
            interval_ns,
            entries: RwLock::new(HashMap::new()),
        })
    }

    pub fn capacity_ns(&self) -> u64 {
        self.capacity_ns
    }

    pub fn get(&self, topic: &Topic) -> Option<SharedCache> {
        self.entries.read().get(topic).map(|e| e.cache.clone())
    }

    pub fn meta(&self, topic: &Topic) -> Option<SensorMeta> {
        self.entries.read().get(topic).map(|e| e.meta)
    }

    /// Registers a sensor with its own sampling interval. Returns `true` if
    /// the topic was new.
    pub fn register(&self, topic: &Topic, interval_ns: u64, meta: SensorMeta) -> bool {
        let mut entries = self.entries.write();
        if let Some(e) = entries.get_mut(topic) {
            e.meta = meta;
            return false;
        }
        entries.insert(
            topic.clone(),
            Entry {
                cache: SharedCache::new(self.capacity_ns, interval_ns),
                meta,
            },
        );
        true
    }

    /// Stores readings, creating the cache on first sight. Returns `true`
    /// if the topic was new.
    pub fn store(&self, topic: &Topic, readings: &[SensorReading]) -> bool {
        if let Some(cache) = self.get(topic) {
            cache.store_all(readings);
            return false;
        }
        let is_new = self.register(topic, self.interval_ns, SensorMeta::default());
        if let Some(cache) = self.get(topic) {
            cache.store_all(readings);
        }
        is_new
    }

    pub fn topics(&self) -> Vec<Topic> {
        let mut topics: Vec<Topic> = self.entries.read().keys().cloned().collect();
        topics.sort();
        topics
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.read().is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_creates_caches() {
        let reg = SensorRegistry::new(10, 1);
        let t = Topic::new("/a/b").unwrap();
        assert!(reg.store(&t, &[SensorReading::new(1, 1)]));
        assert!(!reg.store(&t, &[SensorReading::new(2, 2)]));
        assert_eq!(reg.get(&t).unwrap().len(), 2);
        assert_eq!(reg.meta(&t), Some(SensorMeta { scale: 1 }));
        assert!(reg.register(&Topic::new("/a/c").unwrap(), 1, SensorMeta { scale: 1000 }));
        assert_eq!(reg.topics().len(), 2);
    }
}
