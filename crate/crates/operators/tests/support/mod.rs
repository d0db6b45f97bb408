#![allow(dead_code)]

use std::sync::Arc;

use odaframe_core::{DataSourceBinding, JobInfo, QueryEngine, SensorReading, SensorRegistry, Topic, NS_PER_SEC};
use odaframe_operators::{OperatorManager, PluginRegistry};
use parking_lot::Mutex;

pub const S: u64 = NS_PER_SEC;

pub struct Rig {
    pub reg: Arc<SensorRegistry>,
    pub qe: Arc<QueryEngine>,
    pub mgr: OperatorManager,
    pub jobs: Arc<Mutex<Vec<JobInfo>>>,
}

pub fn topic(s: &str) -> Topic {
    Topic::new(s).unwrap()
}

pub fn rig(topics: &[&str], plugins: PluginRegistry) -> Rig {
    let reg = SensorRegistry::new(180 * S, S);
    let jobs: Arc<Mutex<Vec<JobInfo>>> = Arc::default();
    let r = reg.clone();
    let j = jobs.clone();
    let qe = QueryEngine::new(
        DataSourceBinding::caches(move |t| r.get(t)).with_jobs(move || j.lock().clone()),
        None,
    );
    for t in topics {
        reg.register(&topic(t), S, Default::default());
    }
    qe.set_topics(&reg.topics());
    let mgr = OperatorManager::with_epoch(qe.clone(), reg.clone(), plugins, 0);
    Rig { reg, qe, mgr, jobs }
}

impl Rig {
    pub fn put(&self, t: &str, value: i64, ts: u64) {
        self.reg.store(&topic(t), &[SensorReading::new(value, ts)]);
    }

    pub fn values(&self, t: &str) -> Vec<(u64, i64)> {
        self.reg
            .get(&topic(t))
            .map(|c| c.view_absolute(0, u64::MAX).unwrap().iter().map(|r| (r.timestamp, r.value)).collect())
            .unwrap_or_default()
    }
}

pub const IDENTITY: &str = "\
[operator id]
interval_ms = 1000
input:
    <bottomup>in
output:
    <bottomup>out
";
