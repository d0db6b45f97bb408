//! The query engine: the single access point through which operators see
//! the sensor space and its data.
//!
//! Data is served from the local sensor caches when the requested range is
//! fully covered by them, and from persistent storage otherwise.

use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::cache::SharedCache;
use crate::error::{InvalidRange, QueryError};
use crate::job::JobInfo;
use crate::sensor::{SensorReading, Topic};
use crate::tree::{HierarchySpec, SensorTree};

/// Access to persistent storage.
pub trait StoreLookup: Send + Sync {
    /// Readings of `topic` in `[t0, t1]`, or `None` if the topic was never
    /// stored.
    fn query_range(&self, topic: &Topic, t0: u64, t1: u64) -> Result<Option<Vec<SensorReading>>, String>;

    /// Most recent stored reading of `topic`.
    fn newest(&self, topic: &Topic) -> Result<Option<SensorReading>, String>;
}

pub type CacheLookup = Arc<dyn Fn(&Topic) -> Option<SharedCache> + Send + Sync>;
pub type JobLookup = Arc<dyn Fn() -> Vec<JobInfo> + Send + Sync>;

/// Callbacks set once by the hosting daemon.
#[derive(Clone)]
pub struct DataSourceBinding {
    pub cache_lookup: CacheLookup,
    pub store_lookup: Option<Arc<dyn StoreLookup>>,
    pub job_lookup: Option<JobLookup>,
}

impl DataSourceBinding {
    pub fn caches(lookup: impl Fn(&Topic) -> Option<SharedCache> + Send + Sync + 'static) -> Self {
        DataSourceBinding {
            cache_lookup: Arc::new(lookup),
            store_lookup: None,
            job_lookup: None,
        }
    }

    pub fn with_store(mut self, store: Arc<dyn StoreLookup>) -> Self {
        self.store_lookup = Some(store);
        self
    }

    pub fn with_jobs(mut self, jobs: impl Fn() -> Vec<JobInfo> + Send + Sync + 'static) -> Self {
        self.job_lookup = Some(Arc::new(jobs));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum TimeRange {
    /// Everything within `offset_ns` of the newest reading.
    Relative { offset_ns: u64 },
    /// Everything in `[t0, t1]`.
    Absolute { t0: u64, t1: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryRequest {
    pub topic: Topic,
    pub range: TimeRange,
}

impl QueryRequest {
    pub fn relative(topic: Topic, offset_ns: u64) -> Self {
        QueryRequest {
            topic,
            range: TimeRange::Relative { offset_ns },
        }
    }

    pub fn absolute(topic: Topic, t0: u64, t1: u64) -> Self {
        QueryRequest {
            topic,
            range: TimeRange::Absolute { t0, t1 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    Cache,
    Store,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResult {
    pub readings: Vec<SensorReading>,
    /// The range reaches further back than the cache and no store is bound.
    pub partial: bool,
    pub source: DataSource,
}

pub struct QueryEngine {
    bindings: DataSourceBinding,
    hierarchy: Option<HierarchySpec>,
    tree: RwLock<Arc<SensorTree>>,
}

impl QueryEngine {
    pub fn new(bindings: DataSourceBinding, hierarchy: Option<HierarchySpec>) -> Arc<Self> {
        Arc::new(QueryEngine {
            bindings,
            hierarchy,
            tree: RwLock::new(Arc::new(SensorTree::empty())),
        })
    }

    /// Current sensor tree snapshot. Holders keep their snapshot across
    /// later updates.
    pub fn navigator(&self) -> Arc<SensorTree> {
        self.tree.read().clone()
    }

    /// Replaces the tree with one built from `topics`.
    pub fn set_topics<'a>(&self, topics: impl IntoIterator<Item = &'a Topic>) {
        let tree = SensorTree::build_lenient(topics, self.hierarchy.as_ref());
        *self.tree.write() = Arc::new(tree);
    }

    /// Adds topics to the tree. The new tree is built off-lock and swapped in.
    pub fn announce<'a>(&self, topics: impl IntoIterator<Item = &'a Topic>) {
        let topics: Vec<&Topic> = topics.into_iter().collect();
        let current = self.navigator();
        if topics.iter().all(|t| current.contains(t)) {
            return;
        }
        let mut guard = self.tree.write();
        let next = guard.with_topics(topics);
        *guard = Arc::new(next);
    }

    pub fn has_store(&self) -> bool {
        self.bindings.store_lookup.is_some()
    }

    pub fn query(&self, req: &QueryRequest) -> Result<QueryResult, QueryError> {
        if let TimeRange::Absolute { t0, t1 } = req.range {
            if t0 > t1 {
                return Err(InvalidRange { t0, t1 }.into());
            }
        }
        let cache = (self.bindings.cache_lookup)(&req.topic);
        if let Some(cache) = &cache {
            if let Some(result) = self.serve_cached(cache, req)? {
                return Ok(result);
            }
        }
        if let Some(store) = &self.bindings.store_lookup {
            let stored = self.serve_stored(store.as_ref(), req, cache.as_ref())?;
            match stored {
                Some(readings) => {
                    return Ok(QueryResult {
                        readings,
                        partial: false,
                        source: DataSource::Store,
                    })
                }
                None if cache.is_some() => {
                    return Ok(QueryResult {
                        readings: Vec::new(),
                        partial: false,
                        source: DataSource::Cache,
                    })
                }
                None => {}
            }
        } else if cache.is_some() {
            return Ok(QueryResult {
                readings: Vec::new(),
                partial: false,
                source: DataSource::Cache,
            });
        }
        Err(QueryError::UnknownSensor(req.topic.to_string()))
    }

    /// Serves from the cache when it covers the range, or when nothing else
    /// can (flagging the answer partial). `None` defers to the store.
    fn serve_cached(&self, cache: &SharedCache, req: &QueryRequest) -> Result<Option<QueryResult>, QueryError> {
        let has_store = self.has_store();
        cache.with(|c| {
            let (Some(oldest), Some(newest)) = (c.oldest(), c.newest()) else {
                return Ok(None);
            };
            let (start, readings) = match req.range {
                TimeRange::Relative { offset_ns } => {
                    let start = newest.timestamp.saturating_sub(offset_ns);
                    let covered = start >= oldest.timestamp;
                    if !covered && has_store {
                        return Ok(None);
                    }
                    (start, c.view_relative(offset_ns))
                }
                TimeRange::Absolute { t0, t1 } => {
                    if t0 < oldest.timestamp && has_store {
                        return Ok(None);
                    }
                    (t0, c.view_absolute(t0, t1)?)
                }
            };
            Ok(Some(QueryResult {
                readings,
                partial: start < oldest.timestamp,
                source: DataSource::Cache,
            }))
        })
    }

    fn serve_stored(
        &self,
        store: &dyn StoreLookup,
        req: &QueryRequest,
        cache: Option<&SharedCache>,
    ) -> Result<Option<Vec<SensorReading>>, QueryError> {
        let (t0, t1) = match req.range {
            TimeRange::Absolute { t0, t1 } => (t0, t1),
            TimeRange::Relative { offset_ns } => {
                let newest = match cache.and_then(SharedCache::newest) {
                    Some(r) => Some(r),
                    None => store.newest(&req.topic).map_err(QueryError::Storage)?,
                };
                match newest {
                    Some(r) => (r.timestamp.saturating_sub(offset_ns), r.timestamp),
                    None => {
                        return store
                            .query_range(&req.topic, 0, 0)
                            .map(|known| known.map(|_| Vec::new()))
                            .map_err(QueryError::Storage)
                    }
                }
            }
        };
        store.query_range(&req.topic, t0, t1).map_err(QueryError::Storage)
    }

    /// Jobs active at `now`.
    pub fn jobs(&self, now: u64) -> Result<Vec<JobInfo>, QueryError> {
        let lookup = self.bindings.job_lookup.as_ref().ok_or(QueryError::JobsUnavailable)?;
        Ok(lookup().into_iter().filter(|j| j.is_active(now)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::SensorRegistry;
    use crate::sensor::NS_PER_SEC;
    use std::collections::BTreeMap;
    use parking_lot::Mutex;

    #[derive(Default)]
    struct MemStore(Mutex<BTreeMap<Topic, Vec<SensorReading>>>);

    impl StoreLookup for MemStore {
        fn query_range(&self, topic: &Topic, t0: u64, t1: u64) -> Result<Option<Vec<SensorReading>>, String> {
            Ok(self.0.lock().get(topic).map(|v| {
                v.iter()
                    .filter(|r| r.timestamp >= t0 && r.timestamp <= t1)
                    .copied()
                    .collect()
            }))
        }

        fn newest(&self, topic: &Topic) -> Result<Option<SensorReading>, String> {
            Ok(self.0.lock().get(topic).and_then(|v| v.last().copied()))
        }
    }

    fn topic(s: &str) -> Topic {
        Topic::new(s).unwrap()
    }

    fn setup(with_store: bool) -> (Arc<QueryEngine>, Arc<SensorRegistry>, Arc<MemStore>) {
        let reg = SensorRegistry::new(180 * NS_PER_SEC, NS_PER_SEC);
        let store = Arc::new(MemStore::default());
        let r = reg.clone();
        let mut binding = DataSourceBinding::caches(move |t| r.get(t));
        if with_store {
            binding = binding.with_store(store.clone());
        }
        let t = topic("/n1/power");
        for s in 1..=600u64 {
            let reading = SensorReading::new(s as i64 * 10, s * NS_PER_SEC);
            reg.store(&t, &[reading]);
            store.0.lock().entry(t.clone()).or_default().push(reading);
        }
        let qe = QueryEngine::new(binding, None);
        qe.set_topics(&reg.topics());
        (qe, reg, store)
    }

    #[test]
    fn cached_relative_matches_direct_view() {
        let (qe, reg, _) = setup(false);
        let t = topic("/n1/power");
        let res = qe.query(&QueryRequest::relative(t.clone(), 60 * NS_PER_SEC)).unwrap();
        assert_eq!(res.source, DataSource::Cache);
        assert!(!res.partial);
        assert_eq!(res.readings, reg.get(&t).unwrap().view_relative(60 * NS_PER_SEC));
    }

    #[test]
    fn unknown_topic() {
        let (qe, _, _) = setup(true);
        assert_eq!(
            qe.query(&QueryRequest::relative(topic("/nope/x"), 0)).unwrap_err(),
            QueryError::UnknownSensor("/nope/x".into())
        );
    }

    #[test]
    fn old_range_goes_to_store() {
        let (qe, _, _) = setup(true);
        let res = qe
            .query(&QueryRequest::absolute(topic("/n1/power"), 100 * NS_PER_SEC, 110 * NS_PER_SEC))
            .unwrap();
        assert_eq!(res.source, DataSource::Store);
        assert_eq!(res.readings.len(), 11);
        assert_eq!(res.readings[0].timestamp, 100 * NS_PER_SEC);
    }

    #[test]
    fn old_range_without_store_is_partial() {
        let (qe, _, _) = setup(false);
        let res = qe
            .query(&QueryRequest::absolute(topic("/n1/power"), 100 * NS_PER_SEC, 430 * NS_PER_SEC))
            .unwrap();
        assert!(res.partial);
        assert_eq!(res.readings.len(), 11);
        let res = qe.query(&QueryRequest::relative(topic("/n1/power"), 300 * NS_PER_SEC)).unwrap();
        assert!(res.partial);
        assert_eq!(res.readings.len(), 181);
    }

    #[test]
    fn store_only_topic_is_queryable() {
        let (qe, _, store) = setup(true);
        let t = topic("/archived/x");
        store.0.lock().insert(t.clone(), vec![SensorReading::new(1, 5), SensorReading::new(2, 9)]);
        let res = qe.query(&QueryRequest::relative(t.clone(), 4)).unwrap();
        assert_eq!(res.readings.len(), 2);
        // not announced, so invisible to the navigator
        assert!(!qe.navigator().contains(&t));
    }

    #[test]
    fn cache_and_store_agree_where_both_cover() {
        let (qe, _, store) = setup(true);
        let t = topic("/n1/power");
        let (t0, t1) = (500 * NS_PER_SEC, 550 * NS_PER_SEC);
        let cached = qe.query(&QueryRequest::absolute(t.clone(), t0, t1)).unwrap();
        assert_eq!(cached.source, DataSource::Cache);
        assert_eq!(cached.readings, store.query_range(&t, t0, t1).unwrap().unwrap());
    }

    #[test]
    fn invalid_range() {
        let (qe, _, _) = setup(false);
        assert!(matches!(
            qe.query(&QueryRequest::absolute(topic("/n1/power"), 2, 1)),
            Err(QueryError::InvalidRange(_))
        ));
    }

    #[test]
    fn navigator_snapshots() {
        let (qe, _, _) = setup(false);
        let before = qe.navigator();
        assert_eq!(before.leaf_count(), 1);
        let extra = [topic("/n2/power"), topic("/n3/power")];
        qe.announce(&extra);
        assert_eq!(qe.navigator().leaf_count(), 3);
        assert_eq!(before.leaf_count(), 1);
        assert!(!Arc::ptr_eq(&before, &qe.navigator()));
    }

    #[test]
    fn empty_engine_has_empty_tree() {
        let qe = QueryEngine::new(DataSourceBinding::caches(|_| None), None);
        assert!(qe.navigator().is_empty());
    }

    #[test]
    fn jobs() {
        let (qe, _, _) = setup(false);
        assert_eq!(qe.jobs(1).unwrap_err(), QueryError::JobsUnavailable);
        let job = |id: &str, start, end| JobInfo {
            job_id: id.into(),
            user_id: "u".into(),
            node_list: vec!["/n1/".into()],
            start,
            end,
        };
        let registry = vec![job("A", 10, Some(20)), job("B", 15, None)];
        let qe = QueryEngine::new(
            DataSourceBinding::caches(|_| None).with_jobs(move || registry.clone()),
            None,
        );
        let ids = |now| qe.jobs(now).unwrap().into_iter().map(|j| j.job_id).collect::<Vec<_>>();
        assert_eq!(ids(12), vec!["A"]);
        assert_eq!(ids(16), vec!["A", "B"]);
        assert!(ids(5).is_empty());
    }
}
