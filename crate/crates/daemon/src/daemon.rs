//! Wall-clock lifecycle of a pusher or collector process.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use log::{error, info, warn};
use odaframe_core::sensor::now_ns;
use odaframe_operators::{ManagerError, PluginRegistry, Scheduler};
use odaframe_transport::{PublisherOptions, Store, StoreError};
use thiserror::Error;

use crate::config::{DaemonConfig, PluginSection, Role};
use crate::node::{Collector, Pusher, Runtime, RuntimeOptions};
use crate::rest::{Api, RestServer};
use crate::sources;

const REST_THREADS: usize = 4;
const LOAD_RETRY: Duration = Duration::from_secs(1);
const MAX_SAMPLER_SLEEP: Duration = Duration::from_millis(50);

#[derive(Debug, Error)]
pub enum DaemonError {
    #[error("cannot bind {what} on {addr}: {source}")]
    Bind {
        what: &'static str,
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("source {name}: {message}")]
    Source { name: String, message: String },
    #[error("plugin {name}: {message}")]
    Plugin { name: String, message: String },
    #[error("jobs: {0}")]
    Jobs(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// A running daemon. Dropping it stops the threads and flushes the store;
/// [`Daemon::shutdown`] does the same and also reports flush errors.
pub struct Daemon {
    role: Role,
    rt: Runtime,
    pusher: Option<Arc<Pusher>>,
    collector: Option<Collector>,
    rest: Option<RestServer>,
    scheduler: Option<Scheduler>,
    stop: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

impl Daemon {
    pub fn start(cfg: &DaemonConfig) -> Result<Daemon, DaemonError> {
        Self::start_with(cfg, PluginRegistry::builtin())
    }

    pub fn start_with(cfg: &DaemonConfig, plugins: PluginRegistry) -> Result<Daemon, DaemonError> {
        let store = match (&cfg.role, &cfg.store) {
            (Role::Collector, Some(dir)) => Some(Arc::new(Store::open(dir)?)),
            _ => None,
        };
        let mut opts = RuntimeOptions::new(cfg.cache_ns(), cfg.interval_ns());
        opts.hierarchy = cfg.hierarchy_spec();
        opts.store = store;
        opts.plugins = plugins;
        let rt = Runtime::new(opts);
        if let Some(path) = &cfg.jobs {
            let n = rt.jobs.load_file(path).map_err(DaemonError::Jobs)?;
            info!("loaded {n} jobs from {}", path.display());
        }

        let stop = Arc::new(AtomicBool::new(false));
        let mut threads = Vec::new();
        let mut pusher = None;
        let mut collector = None;
        match cfg.role {
            Role::Pusher => {
                let mut srcs = Vec::new();
                for s in &cfg.sources {
                    srcs.push(sources::build(s).map_err(|message| DaemonError::Source {
                        name: s.name.clone(),
                        message,
                    })?);
                }
                let addr = cfg.connect.clone().expect("validated");
                let popts = PublisherOptions {
                    queue_capacity: cfg.queue,
                    ..PublisherOptions::default()
                };
                let p = Arc::new(Pusher::new(rt.clone(), srcs, &addr, popts));
                let (s, p2) = (stop.clone(), p.clone());
                threads.push(
                    std::thread::Builder::new()
                        .name("sampler".into())
                        .spawn(move || sampler(&p2, &s))
                        .expect("spawn sampler"),
                );
                pusher = Some(p);
            }
            Role::Collector => {
                let addr = cfg.listen.clone().expect("validated");
                let c = Collector::start(rt.clone(), &addr).map_err(|source| DaemonError::Bind {
                    what: "data listener",
                    addr,
                    source,
                })?;
                info!("collector listening on {}", c.data_addr());
                collector = Some(c);
            }
        }

        let pending = load_plugins(&rt, &cfg.plugins)?;
        if !pending.is_empty() {
            let (rt2, s) = (rt.clone(), stop.clone());
            threads.push(
                std::thread::Builder::new()
                    .name("plugin-loader".into())
                    .spawn(move || retry_loads(&rt2, pending, &s))
                    .expect("spawn loader"),
            );
        }
        let scheduler = Some(rt.manager.spawn_scheduler(cfg.workers));

        let rest = match &cfg.rest {
            Some(addr) => {
                let server = RestServer::start(addr, Api::new(rt.clone()), REST_THREADS).map_err(|source| {
                    DaemonError::Bind {
                        what: "REST API",
                        addr: addr.clone(),
                        source,
                    }
                })?;
                info!("REST API on http://{}", server.local_addr());
                Some(server)
            }
            None => None,
        };
        Ok(Daemon {
            role: cfg.role,
            rt,
            pusher,
            collector,
            rest,
            scheduler,
            stop,
            threads,
        })
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn runtime(&self) -> &Runtime {
        &self.rt
    }

    pub fn rest_addr(&self) -> Option<SocketAddr> {
        self.rest.as_ref().map(RestServer::local_addr)
    }

    /// Where pushers connect, for a collector.
    pub fn data_addr(&self) -> Option<SocketAddr> {
        self.collector.as_ref().map(Collector::data_addr)
    }

    pub fn pusher(&self) -> Option<&Pusher> {
        self.pusher.as_deref()
    }

    pub fn collector(&self) -> Option<&Collector> {
        self.collector.as_ref()
    }

    /// Stops sampling, operators and the API, drains the publisher and
    /// flushes the store.
    pub fn shutdown(mut self) -> Result<(), DaemonError> {
        self.halt();
        if let Some(p) = self.pusher.take() {
            if !p.flush(Duration::from_secs(2)) {
                warn!("publisher queue not drained at shutdown");
            }
        }
        if let Some(c) = self.collector.take() {
            c.shutdown()?;
        }
        Ok(())
    }

    fn halt(&mut self) {
        self.stop.store(true, Ordering::Release);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
        if let Some(s) = self.scheduler.take() {
            s.shutdown();
        }
        if let Some(r) = self.rest.take() {
            r.shutdown();
        }
    }
}

impl Drop for Daemon {
    fn drop(&mut self) {
        self.halt();
        if let Some(c) = self.collector.take() {
            if let Err(e) = c.shutdown() {
                error!("store flush failed: {e}");
            }
        }
    }
}

fn sampler(p: &Pusher, stop: &AtomicBool) {
    while !stop.load(Ordering::Acquire) {
        let (_, wake) = p.sample_due(now_ns());
        let now = now_ns();
        let sleep = Duration::from_nanos(wake.saturating_sub(now)).min(MAX_SAMPLER_SLEEP);
        std::thread::sleep(sleep);
    }
}

struct Pending {
    name: String,
    text: String,
    start: bool,
}

/// Loads the configured plugins. Those whose blocks cannot be resolved yet,
/// typically in a collector that has not heard from any pusher, are
/// returned for later retries.
fn load_plugins(rt: &Runtime, plugins: &[PluginSection]) -> Result<Vec<Pending>, DaemonError> {
    let mut pending = Vec::new();
    for p in plugins {
        let text = std::fs::read_to_string(&p.config).map_err(|e| DaemonError::Plugin {
            name: p.name.clone(),
            message: format!("{}: {e}", p.config.display()),
        })?;
        let job = Pending {
            name: p.name.clone(),
            text,
            start: p.start,
        };
        match try_load(rt, &job) {
            Ok(()) => {}
            Err(ManagerError::Instantiation { operator, source }) => {
                info!("plugin {}: operator {operator} waits for sensors ({source})", p.name);
                pending.push(job);
            }
            Err(e) => {
                return Err(DaemonError::Plugin {
                    name: p.name.clone(),
                    message: match &e {
                        ManagerError::Config(c) => format!("{}:{}: {}", p.config.display(), c.line, c.message),
                        _ => e.to_string(),
                    },
                })
            }
        }
    }
    Ok(pending)
}

fn try_load(rt: &Runtime, p: &Pending) -> Result<(), ManagerError> {
    let report = rt.manager.load_plugin(&p.name, &p.text)?;
    let blocks: usize = report.operators.iter().map(|o| o.blocks.len()).sum();
    info!("plugin {} loaded with {} operators and {blocks} blocks", p.name, report.operators.len());
    if p.start {
        rt.manager.start_all(&p.name)?;
    }
    Ok(())
}

fn retry_loads(rt: &Runtime, mut pending: Vec<Pending>, stop: &AtomicBool) {
    while !stop.load(Ordering::Acquire) && !pending.is_empty() {
        let mut waited = Duration::ZERO;
        while waited < LOAD_RETRY && !stop.load(Ordering::Acquire) {
            std::thread::sleep(MAX_SAMPLER_SLEEP);
            waited += MAX_SAMPLER_SLEEP;
        }
        pending.retain(|p| match try_load(rt, p) {
            Ok(()) => false,
            Err(ManagerError::Instantiation { .. }) => true,
            Err(e) => {
                error!("plugin {} gave up: {e}", p.name);
                false
            }
        });
    }
}
