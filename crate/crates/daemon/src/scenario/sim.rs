//! In-process pushers and a collector stepped in simulated time.
//!
//! Every step samples each pusher and ticks its operators, waits until the
//! collector has ingested everything the pushers sent, then ticks the
//! collector's operators. Results therefore do not depend on thread timing.

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use odaframe_core::{SensorReading, Topic};
use odaframe_operators::ManagerError;
use odaframe_transport::{PublisherOptions, Store};

use super::ScenarioError;
use crate::node::{Collector, Pusher, Runtime, RuntimeOptions};
use crate::sources::Source;

/// Simulated clock origin (2023-11-14T22:13:20Z).
pub const T0: u64 = 1_700_000_000_000_000_000;

const BARRIER_TIMEOUT: Duration = Duration::from_secs(30);

pub struct SimSpec {
    pub interval_ns: u64,
    pub pusher_cache_ns: u64,
    pub collector_cache_ns: u64,
}

pub struct SimCluster {
    pub collector: Collector,
    pub pushers: Vec<Pusher>,
    pub store: Arc<Store>,
    interval_ns: u64,
}

impl SimCluster {
    /// One pusher per entry of `sources`, all publishing to one collector
    /// whose store lives in `store_dir`.
    pub fn start(spec: &SimSpec, store_dir: &Path, sources: Vec<Vec<Box<dyn Source>>>) -> Result<Self, ScenarioError> {
        let store = Arc::new(Store::open(store_dir).map_err(|e| ScenarioError::Daemon(e.to_string()))?);
        let mut copts = RuntimeOptions::new(spec.collector_cache_ns, spec.interval_ns);
        copts.store = Some(store.clone());
        copts.epoch = Some(T0);
        let collector = Collector::start(Runtime::new(copts), "127.0.0.1:0")
            .map_err(|e| ScenarioError::Daemon(format!("collector bind: {e}")))?;
        let addr = collector.data_addr().to_string();
        let pushers = sources
            .into_iter()
            .map(|srcs| {
                let mut popts = RuntimeOptions::new(spec.pusher_cache_ns, spec.interval_ns);
                popts.epoch = Some(T0);
                let opts = PublisherOptions {
                    queue_capacity: usize::MAX,
                    ..PublisherOptions::default()
                };
                Pusher::new(Runtime::new(popts), srcs, &addr, opts)
            })
            .collect();
        Ok(SimCluster {
            collector,
            pushers,
            store,
            interval_ns: spec.interval_ns,
        })
    }

    pub fn interval_ns(&self) -> u64 {
        self.interval_ns
    }

    /// Time of step `k`.
    pub fn at(&self, k: u64) -> u64 {
        T0 + k * self.interval_ns
    }

    pub fn step(&self, now: u64) -> Result<(), ScenarioError> {
        for p in &self.pushers {
            p.sample_all(now);
            p.rt.manager.tick_due(now);
        }
        self.barrier()?;
        self.collector.rt.manager.tick_due(now);
        Ok(())
    }

    /// Waits until the collector has ingested every frame sent so far.
    pub fn barrier(&self) -> Result<(), ScenarioError> {
        let mut sent = 0;
        for p in &self.pushers {
            if !p.flush(BARRIER_TIMEOUT) {
                return Err(ScenarioError::Daemon("publisher did not drain".into()));
            }
            let s = p.publisher().stats();
            if s.dropped > 0 || s.lost > 0 {
                return Err(ScenarioError::Daemon(format!(
                    "transport lost data: {} dropped, {} lost",
                    s.dropped, s.lost
                )));
            }
            sent += s.sent;
        }
        if !self.collector.wait_frames(sent, BARRIER_TIMEOUT) {
            return Err(ScenarioError::Daemon(format!(
                "collector ingested {} of {sent} frames",
                self.collector.frames()
            )));
        }
        Ok(())
    }

    pub fn load_on_collector(&self, plugin: &str, text: &str) -> Result<(), ScenarioError> {
        load(&self.collector.rt, plugin, text)
    }

    pub fn load_on_pusher(&self, i: usize, plugin: &str, text: &str) -> Result<(), ScenarioError> {
        load(&self.pushers[i].rt, plugin, text)
    }

    /// Stored readings of `topic`, oldest first.
    pub fn stored(&self, topic: &Topic) -> Result<Vec<SensorReading>, ScenarioError> {
        self.store
            .query(topic, 0, u64::MAX)
            .map_err(|e| ScenarioError::Daemon(e.to_string()))
    }

    pub fn shutdown(self) -> Result<(), ScenarioError> {
        drop(self.pushers);
        self.collector
            .shutdown()
            .map_err(|e| ScenarioError::Daemon(e.to_string()))
    }
}

fn load(rt: &Runtime, plugin: &str, text: &str) -> Result<(), ScenarioError> {
    let wrap = |e: ManagerError| ScenarioError::Plugin {
        plugin: plugin.to_string(),
        message: e.to_string(),
    };
    rt.manager.load_plugin(plugin, text).map_err(wrap)?;
    rt.manager.start_all(plugin).map_err(wrap)
}
