//! The building blocks shared by both daemons and the scenario harness:
//! caches, query engine, operator manager, and the pusher and collector
//! data paths.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use log::warn;
use odaframe_core::{
    DataSourceBinding, HierarchySpec, QueryEngine, SensorMeta, SensorReading, SensorRegistry, Topic,
};
use odaframe_operators::{OperatorManager, PluginRegistry, Publisher};
use odaframe_transport::{Broker, Frame, FramePublisher, PublisherOptions, Store};
use parking_lot::{Condvar, Mutex};

use crate::jobs::JobRegistry;
use crate::sources::Source;

/// Per-daemon state. Cloning shares it.
#[derive(Clone)]
pub struct Runtime {
    pub registry: Arc<SensorRegistry>,
    pub qe: Arc<QueryEngine>,
    pub manager: OperatorManager,
    pub jobs: Arc<JobRegistry>,
    pub store: Option<Arc<Store>>,
    /// Nominal interval assumed for topics first seen on the wire.
    pub interval_ns: u64,
}

pub struct RuntimeOptions {
    pub cache_ns: u64,
    pub interval_ns: u64,
    pub hierarchy: Option<HierarchySpec>,
    pub store: Option<Arc<Store>>,
    /// Tick alignment origin; wall-clock now when `None`.
    pub epoch: Option<u64>,
    pub plugins: PluginRegistry,
}

impl RuntimeOptions {
    pub fn new(cache_ns: u64, interval_ns: u64) -> Self {
        RuntimeOptions {
            cache_ns,
            interval_ns,
            hierarchy: None,
            store: None,
            epoch: None,
            plugins: PluginRegistry::builtin(),
        }
    }
}

impl Runtime {
    pub fn new(opts: RuntimeOptions) -> Runtime {
        let registry = SensorRegistry::new(opts.cache_ns, opts.interval_ns);
        let jobs = JobRegistry::new();
        let r = registry.clone();
        let j = jobs.clone();
        let mut binding = DataSourceBinding::caches(move |t| r.get(t)).with_jobs(move || j.snapshot());
        if let Some(store) = &opts.store {
            binding = binding.with_store(store.clone());
        }
        let qe = QueryEngine::new(binding, opts.hierarchy);
        let manager = match opts.epoch {
            Some(e) => OperatorManager::with_epoch(qe.clone(), registry.clone(), opts.plugins, e),
            None => OperatorManager::new(qe.clone(), registry.clone(), opts.plugins),
        };
        if let Some(store) = &opts.store {
            manager.set_publisher(Arc::new(StoreOut(store.clone())));
        }
        Runtime {
            registry,
            qe,
            manager,
            jobs,
            store: opts.store,
            interval_ns: opts.interval_ns,
        }
    }

    /// Registers topics not seen before and makes them visible to the
    /// navigator.
    pub fn declare(&self, topics: &[Topic], interval_ns: u64) {
        let fresh: Vec<&Topic> = topics
            .iter()
            .filter(|t| self.registry.register(t, interval_ns, SensorMeta::default()))
            .collect();
        if !fresh.is_empty() {
            self.qe.announce(fresh);
        }
    }

    /// Writes readings to the caches and, in a collector, the store.
    pub fn ingest(&self, topic: &Topic, readings: &[SensorReading]) {
        if self.registry.get(topic).is_none() {
            self.declare(std::slice::from_ref(topic), self.interval_ns);
        }
        self.registry.store(topic, readings);
        if let Some(store) = &self.store {
            if let Err(e) = store.append(topic, readings) {
                warn!("store append for {topic} failed: {e}");
            }
        }
    }
}

/// Streams operator outputs of a collector into its store.
struct StoreOut(Arc<Store>);

impl Publisher for StoreOut {
    fn publish(&self, topic: &Topic, readings: &[SensorReading]) {
        if let Err(e) = self.0.append(topic, readings) {
            warn!("store append for {topic} failed: {e}");
        }
    }
}

/// Streams operator outputs of a pusher to its collector.
struct TransportOut(Arc<FramePublisher>);

impl Publisher for TransportOut {
    fn publish(&self, topic: &Topic, readings: &[SensorReading]) {
        if let Err(e) = self.0.publish(topic, readings) {
            warn!("cannot publish {topic}: {e}");
        }
    }
}

struct Slot {
    source: Box<dyn Source>,
    next_due: u64,
}

/// Sampling side of a pusher: sources feed the caches and the transport.
pub struct Pusher {
    pub rt: Runtime,
    sources: Mutex<Vec<Slot>>,
    publisher: Arc<FramePublisher>,
}

impl Pusher {
    /// Declares every source topic up front so operators can bind to them
    /// before the first sample.
    pub fn new(rt: Runtime, sources: Vec<Box<dyn Source>>, collector: &str, opts: PublisherOptions) -> Pusher {
        for s in &sources {
            rt.declare(&s.topics(), s.interval_ns());
        }
        let publisher = Arc::new(FramePublisher::start(collector, opts));
        rt.manager.set_publisher(Arc::new(TransportOut(publisher.clone())));
        Pusher {
            rt,
            sources: Mutex::new(sources.into_iter().map(|source| Slot { source, next_due: 0 }).collect()),
            publisher,
        }
    }

    /// Samples every source at `now`; returns the number of readings.
    pub fn sample_all(&self, now: u64) -> usize {
        let mut batch = Vec::new();
        for slot in self.sources.lock().iter_mut() {
            batch.extend(slot.source.sample(now));
        }
        self.emit(batch)
    }

    /// Samples the sources whose interval boundary has passed and returns
    /// the earliest next boundary.
    pub fn sample_due(&self, now: u64) -> (usize, u64) {
        let mut batch = Vec::new();
        let mut wake = u64::MAX;
        for slot in self.sources.lock().iter_mut() {
            let interval = slot.source.interval_ns().max(1);
            if now >= slot.next_due {
                batch.extend(slot.source.sample(now));
                slot.next_due = (now / interval + 1) * interval;
            }
            wake = wake.min(slot.next_due);
        }
        (self.emit(batch), wake)
    }

    fn emit(&self, batch: Vec<(Topic, SensorReading)>) -> usize {
        let n = batch.len();
        let mut grouped: BTreeMap<Topic, Vec<SensorReading>> = BTreeMap::new();
        for (t, r) in batch {
            grouped.entry(t).or_default().push(r);
        }
        for (topic, readings) in grouped {
            self.rt.ingest(&topic, &readings);
            if let Err(e) = self.publisher.publish(&topic, &readings) {
                warn!("cannot publish {topic}: {e}");
            }
        }
        n
    }

    pub fn publisher(&self) -> &FramePublisher {
        &self.publisher
    }

    /// Waits until everything published so far has been written out.
    pub fn flush(&self, timeout: Duration) -> bool {
        self.publisher.flush(timeout)
    }
}

#[derive(Default)]
struct Counts {
    frames: u64,
    readings: u64,
}

#[derive(Default)]
struct Progress {
    counts: Mutex<Counts>,
    changed: Condvar,
}

impl Progress {
    fn wait(&self, done: impl Fn(&Counts) -> bool, timeout: Duration) -> bool {
        let deadline = Instant::now() + timeout;
        let mut c = self.counts.lock();
        while !done(&c) {
            if self.changed.wait_until(&mut c, deadline).timed_out() {
                return done(&c);
            }
        }
        true
    }
}

/// Receiving side of a collector: the broker feeds caches and the store.
pub struct Collector {
    pub rt: Runtime,
    broker: Option<Broker>,
    progress: Arc<Progress>,
}

impl Collector {
    pub fn start(rt: Runtime, listen: &str) -> std::io::Result<Collector> {
        let progress = Arc::new(Progress::default());
        let sink_rt = rt.clone();
        let p = progress.clone();
        let broker = Broker::bind(
            listen,
            Arc::new(move |frame: &Frame| {
                sink_rt.ingest(&frame.topic, &frame.readings);
                let mut c = p.counts.lock();
                c.frames += 1;
                c.readings += frame.readings.len() as u64;
                p.changed.notify_all();
            }),
        )?;
        Ok(Collector {
            rt,
            broker: Some(broker),
            progress,
        })
    }

    pub fn data_addr(&self) -> SocketAddr {
        self.broker.as_ref().expect("running").local_addr()
    }

    /// Readings written to caches and store so far.
    pub fn ingested(&self) -> u64 {
        self.progress.counts.lock().readings
    }

    pub fn frames(&self) -> u64 {
        self.progress.counts.lock().frames
    }

    /// Blocks until at least `n` readings have been ingested.
    pub fn wait_ingested(&self, n: u64, timeout: Duration) -> bool {
        self.progress.wait(|c| c.readings >= n, timeout)
    }

    /// Blocks until at least `n` frames have been ingested.
    pub fn wait_frames(&self, n: u64, timeout: Duration) -> bool {
        self.progress.wait(|c| c.frames >= n, timeout)
    }

    /// Stops accepting data and flushes the store.
    pub fn shutdown(mut self) -> Result<(), odaframe_transport::StoreError> {
        if let Some(b) = self.broker.take() {
            b.shutdown();
        }
        match &self.rt.store {
            Some(s) => s.flush(),
            None => Ok(()),
        }
    }
}
