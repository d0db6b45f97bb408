//! Loads plugins, owns their operators and runs their computations.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;

use log::{debug, warn};
use odaframe_core::block::resolve_inputs_for_nodes;
use odaframe_core::sensor::now_ns;
use odaframe_core::{
    instantiate_blocks, Block, JobInfo, QueryEngine, QueryError, SensorMeta, SensorReading, SensorRegistry,
    SensorTree, SkippedBlock, Topic,
};
use parking_lot::{Mutex, RwLock};
use serde::Serialize;

use crate::config::{parse_plugin_config, Arrangement, Mode, OperatorConfig};
use crate::error::ManagerError;
use crate::plugin::{BlockOutputs, ComputeError, Ctx, OperatorLogic, PluginRegistry, Publisher};

/// One schedulable operator instance.
pub struct Operator {
    pub name: String,
    /// Configured operator name; differs from `name` for parallel instances.
    pub group: String,
    pub plugin: String,
    pub config: OperatorConfig,
    scale: i64,
    blocks: RwLock<Vec<Block>>,
    logic: Mutex<Box<dyn OperatorLogic>>,
    running: AtomicBool,
    lifecycle: Mutex<()>,
    busy: AtomicBool,
    pub(crate) in_flight: AtomicBool,
    pub(crate) last_slot: AtomicU64,
    ticks: AtomicU64,
    skipped: AtomicU64,
    not_ready: AtomicU64,
    failures: AtomicU64,
}

impl Operator {
    pub fn is_running(&self) -> bool {
        self.running.load(Ordering::Acquire)
    }

    pub fn blocks(&self) -> Vec<Block> {
        self.blocks.read().clone()
    }

    pub fn ticks(&self) -> u64 {
        self.ticks.load(Ordering::Relaxed)
    }

    /// Scheduled ticks dropped because the previous one was still running.
    pub fn skipped(&self) -> u64 {
        self.skipped.load(Ordering::Relaxed)
    }

    pub(crate) fn count_skip(&self) {
        self.skipped.fetch_add(1, Ordering::Relaxed);
    }

    pub fn status(&self) -> OperatorStatus {
        let state = if !self.is_running() {
            "stopped"
        } else if self.busy.load(Ordering::Relaxed) {
            "busy"
        } else {
            "running"
        };
        OperatorStatus {
            plugin: self.plugin.clone(),
            name: self.name.clone(),
            group: self.group.clone(),
            mode: self.config.mode,
            arrangement: self.config.arrangement,
            state,
            interval_ms: self.config.interval_ns / 1_000_000,
            blocks: self.blocks.read().len(),
            ticks: self.ticks(),
            skipped: self.skipped(),
            not_ready: self.not_ready.load(Ordering::Relaxed),
            failures: self.failures.load(Ordering::Relaxed),
        }
    }

    fn operator_topic(&self, sensor: &str) -> Option<Topic> {
        Topic::new(format!("/{}/{}/{}", self.plugin, self.name, sensor)).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OperatorStatus {
    pub plugin: String,
    pub name: String,
    pub group: String,
    pub mode: Mode,
    pub arrangement: Arrangement,
    pub state: &'static str,
    pub interval_ms: u64,
    pub blocks: usize,
    pub ticks: u64,
    pub skipped: u64,
    pub not_ready: u64,
    pub failures: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OperatorReport {
    pub name: String,
    pub blocks: Vec<String>,
    pub skipped: Vec<SkippedBlock>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub plugin: String,
    /// A previous instance of the plugin was stopped and replaced.
    pub replaced: bool,
    pub operators: Vec<OperatorReport>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TickReport {
    pub blocks: usize,
    pub outputs: usize,
    pub not_ready: usize,
    pub failed: usize,
}

struct Loaded {
    name: String,
    operators: Vec<Arc<Operator>>,
}

pub(crate) struct Inner {
    qe: Arc<QueryEngine>,
    sensors: Arc<SensorRegistry>,
    publisher: RwLock<Option<Arc<dyn Publisher>>>,
    plugins: PluginRegistry,
    loaded: RwLock<Vec<Loaded>>,
    pub(crate) epoch: u64,
}

/// Thread-safe operator manager. Cloning shares the same state.
#[derive(Clone)]
pub struct OperatorManager {
    pub(crate) inner: Arc<Inner>,
}

/// Builds one block per job from a job operator's template: inputs are the
/// template's input expressions resolved against every node of the job,
/// outputs live under `job_prefix/job_id/`.
pub fn job_blocks(tree: &SensorTree, config: &OperatorConfig, jobs: &[JobInfo]) -> (Vec<Block>, Vec<SkippedBlock>) {
    let mut blocks = Vec::new();
    let mut skipped = Vec::new();
    for job in jobs {
        let skip = |reason: String| SkippedBlock {
            name: job.job_id.clone(),
            reason,
        };
        let nodes: Vec<_> = job.node_list.iter().filter_map(|p| tree.find(p)).collect();
        let inputs = resolve_inputs_for_nodes(tree, &config.template, &nodes);
        if inputs.is_empty() {
            skipped.push(skip("no input resolves on the job's nodes".into()));
            continue;
        }
        let outputs: Result<Vec<Topic>, _> = config
            .template
            .outputs
            .iter()
            .map(|e| Topic::new(format!("{}/{}/{}", config.job_prefix, job.job_id, e.sensor_name)))
            .collect();
        match outputs {
            Ok(outputs) => blocks.push(Block {
                name: job.job_id.clone(),
                inputs,
                outputs,
            }),
            Err(e) => skipped.push(skip(e.to_string())),
        }
    }
    (blocks, skipped)
}

fn block_matches(block: &str, wanted: &str) -> bool {
    block == wanted || block.strip_suffix('/') == Some(wanted)
}

impl OperatorManager {
    pub fn new(qe: Arc<QueryEngine>, sensors: Arc<SensorRegistry>, plugins: PluginRegistry) -> Self {
        Self::with_epoch(qe, sensors, plugins, now_ns())
    }

    /// Ticks are aligned to multiples of each operator's interval counted
    /// from `epoch`.
    pub fn with_epoch(qe: Arc<QueryEngine>, sensors: Arc<SensorRegistry>, plugins: PluginRegistry, epoch: u64) -> Self {
        OperatorManager {
            inner: Arc::new(Inner {
                qe,
                sensors,
                publisher: RwLock::new(None),
                plugins,
                loaded: RwLock::new(Vec::new()),
                epoch,
            }),
        }
    }

    pub fn set_publisher(&self, publisher: Arc<dyn Publisher>) {
        *self.inner.publisher.write() = Some(publisher);
    }

    pub fn query_engine(&self) -> &Arc<QueryEngine> {
        &self.inner.qe
    }

    pub fn sensors(&self) -> &Arc<SensorRegistry> {
        &self.inner.sensors
    }

    pub fn epoch(&self) -> u64 {
        self.inner.epoch
    }

    pub fn plugin_names(&self) -> Vec<String> {
        self.inner.plugins.names().into_iter().map(str::to_string).collect()
    }

    /// Loads (or reloads) a plugin from configuration text. Operators start
    /// stopped; a previously loaded instance is stopped and replaced.
    pub fn load_plugin(&self, name: &str, config_text: &str) -> Result<LoadReport, ManagerError> {
        let plugin = self
            .inner
            .plugins
            .get(name)
            .ok_or_else(|| ManagerError::UnknownPlugin(name.to_string()))?;
        let configs = parse_plugin_config(config_text)?;
        if configs.is_empty() {
            return Err(ManagerError::NoOperators);
        }
        let tree = self.inner.qe.navigator();
        let scale = plugin.output_scale();
        let mut operators = Vec::new();
        let mut reports = Vec::new();
        for cfg in configs {
            let invalid = |message: String| ManagerError::Invalid {
                operator: cfg.name.clone(),
                message,
            };
            let (instances, skipped) = if cfg.job {
                if cfg.arrangement == Arrangement::Parallel {
                    return Err(invalid("job operators are always sequential".into()));
                }
                (vec![(cfg.name.clone(), Vec::new())], Vec::new())
            } else {
                let inst = instantiate_blocks(&tree, &cfg.template).map_err(|source| ManagerError::Instantiation {
                    operator: cfg.name.clone(),
                    source,
                })?;
                for s in &inst.skipped {
                    warn!("{name}/{}: skipping block {}: {}", cfg.name, s.name, s.reason);
                }
                let instances = match cfg.arrangement {
                    Arrangement::Sequential => vec![(cfg.name.clone(), inst.blocks)],
                    Arrangement::Parallel => inst
                        .blocks
                        .into_iter()
                        .enumerate()
                        .map(|(i, b)| (format!("{}.{i}", cfg.name), vec![b]))
                        .collect(),
                };
                (instances, inst.skipped)
            };
            reports.push(OperatorReport {
                name: cfg.name.clone(),
                blocks: instances.iter().flat_map(|(_, b)| b.iter().map(|b| b.name.clone())).collect(),
                skipped,
            });
            for (op_name, blocks) in instances {
                let logic = plugin.create(&cfg).map_err(invalid)?;
                operators.push(Arc::new(Operator {
                    name: op_name,
                    group: cfg.name.clone(),
                    plugin: name.to_string(),
                    config: cfg.clone(),
                    scale,
                    blocks: RwLock::new(blocks),
                    logic: Mutex::new(logic),
                    running: AtomicBool::new(false),
                    lifecycle: Mutex::new(()),
                    busy: AtomicBool::new(false),
                    in_flight: AtomicBool::new(false),
                    last_slot: AtomicU64::new(0),
                    ticks: AtomicU64::new(0),
                    skipped: AtomicU64::new(0),
                    not_ready: AtomicU64::new(0),
                    failures: AtomicU64::new(0),
                }));
            }
        }

        let mut declared = Vec::new();
        for op in &operators {
            for block in op.blocks.read().iter() {
                for t in &block.outputs {
                    self.inner.sensors.register(t, op.config.interval_ns, SensorMeta { scale });
                    declared.push(t.clone());
                }
            }
        }
        self.inner.qe.announce(&declared);

        let previous = {
            let loaded = self.inner.loaded.read();
            loaded.iter().find(|l| l.name == name).map(|l| l.operators.clone())
        };
        if let Some(old) = &previous {
            for op in old {
                self.stop_operator(op);
            }
        }
        let mut loaded = self.inner.loaded.write();
        match loaded.iter_mut().find(|l| l.name == name) {
            Some(slot) => slot.operators = operators,
            None => loaded.push(Loaded {
                name: name.to_string(),
                operators,
            }),
        }
        Ok(LoadReport {
            plugin: name.to_string(),
            replaced: previous.is_some(),
            operators: reports,
        })
    }

    /// Stops and removes a plugin's operators.
    pub fn unload_plugin(&self, name: &str) -> Result<(), ManagerError> {
        let ops = self.plugin_operators(name)?;
        for op in &ops {
            self.stop_operator(op);
        }
        self.inner.loaded.write().retain(|l| l.name != name);
        Ok(())
    }

    fn plugin_operators(&self, plugin: &str) -> Result<Vec<Arc<Operator>>, ManagerError> {
        let loaded = self.inner.loaded.read();
        loaded
            .iter()
            .find(|l| l.name == plugin)
            .map(|l| l.operators.clone())
            .ok_or_else(|| {
                if self.inner.plugins.get(plugin).is_some() {
                    ManagerError::NotLoaded(plugin.to_string())
                } else {
                    ManagerError::UnknownPlugin(plugin.to_string())
                }
            })
    }

    /// Instances named `operator`, or all instances of the configured
    /// operator `operator`.
    pub fn find(&self, plugin: &str, operator: &str) -> Result<Vec<Arc<Operator>>, ManagerError> {
        let ops: Vec<_> = self
            .plugin_operators(plugin)?
            .into_iter()
            .filter(|o| o.name == operator || o.group == operator)
            .collect();
        if ops.is_empty() {
            return Err(ManagerError::UnknownOperator {
                plugin: plugin.to_string(),
                operator: operator.to_string(),
            });
        }
        Ok(ops)
    }

    /// Every operator instance in load order.
    pub fn all_operators(&self) -> Vec<Arc<Operator>> {
        self.inner
            .loaded
            .read()
            .iter()
            .flat_map(|l| l.operators.iter().cloned())
            .collect()
    }

    pub fn statuses(&self) -> Vec<OperatorStatus> {
        self.all_operators().iter().map(|o| o.status()).collect()
    }

    pub fn start(&self, plugin: &str, operator: &str) -> Result<(), ManagerError> {
        let now = now_ns();
        for op in self.find(plugin, operator)? {
            self.start_operator(&op, now);
        }
        Ok(())
    }

    /// Starts every operator of a plugin.
    pub fn start_all(&self, plugin: &str) -> Result<(), ManagerError> {
        let now = now_ns();
        for op in self.plugin_operators(plugin)? {
            self.start_operator(&op, now);
        }
        Ok(())
    }

    /// Stops the operators and waits for in-flight computations.
    pub fn stop(&self, plugin: &str, operator: &str) -> Result<(), ManagerError> {
        for op in self.find(plugin, operator)? {
            self.stop_operator(&op);
        }
        Ok(())
    }

    fn start_operator(&self, op: &Operator, now: u64) {
        let _guard = op.lifecycle.lock();
        if op.is_running() {
            return;
        }
        op.last_slot.store(self.slot(op, now), Ordering::Release);
        op.running.store(true, Ordering::Release);
        debug!("started {}/{}", op.plugin, op.name);
    }

    fn stop_operator(&self, op: &Operator) {
        let _guard = op.lifecycle.lock();
        op.running.store(false, Ordering::Release);
        drop(op.logic.lock());
    }

    pub(crate) fn slot(&self, op: &Operator, now: u64) -> u64 {
        now.saturating_sub(self.inner.epoch) / op.config.interval_ns.max(1)
    }

    /// Runs one tick of a running online operator at time `now`.
    pub fn tick_operator(&self, op: &Operator, now: u64) -> TickReport {
        let mut logic = op.logic.lock();
        if !op.is_running() || op.config.mode != Mode::Online {
            return TickReport::default();
        }
        if op.config.job {
            let jobs = match self.inner.qe.jobs(now) {
                Ok(j) => j,
                Err(QueryError::JobsUnavailable) => Vec::new(),
                Err(e) => {
                    warn!("{}/{}: {e}", op.plugin, op.name);
                    Vec::new()
                }
            };
            let (blocks, skipped) = job_blocks(&self.inner.qe.navigator(), &op.config, &jobs);
            for s in skipped {
                warn!("{}/{}: skipping job {}: {}", op.plugin, op.name, s.name, s.reason);
            }
            *op.blocks.write() = blocks;
        }
        let blocks = op.blocks.read().clone();
        let ctx = Ctx {
            qe: &self.inner.qe,
            now,
            config: &op.config,
        };
        let mut report = TickReport {
            blocks: blocks.len(),
            ..TickReport::default()
        };
        for (block, result) in logic.compute_operator(&ctx, &blocks) {
            match result {
                Ok(outputs) => {
                    report.outputs += outputs.len();
                    self.write(op, outputs, now);
                }
                Err(ComputeError::NotReady(why)) => {
                    report.not_ready += 1;
                    op.not_ready.fetch_add(1, Ordering::Relaxed);
                    debug!("{}/{} block {block}: {why}", op.plugin, op.name);
                }
                Err(ComputeError::Failed(why)) => {
                    report.failed += 1;
                    op.failures.fetch_add(1, Ordering::Relaxed);
                    warn!("{}/{} block {block}: {why}", op.plugin, op.name);
                }
            }
        }
        let level: BlockOutputs = logic
            .operator_outputs(&ctx)
            .into_iter()
            .filter(|(n, _)| op.config.template.operator_outputs.contains(n))
            .filter_map(|(n, v)| Some((op.operator_topic(&n)?, v)))
            .collect();
        report.outputs += level.len();
        self.write(op, level, now);
        op.ticks.fetch_add(1, Ordering::Relaxed);
        report
    }

    /// Ticks every running online operator at `now`, synchronously and in
    /// load order. Used for simulated time.
    pub fn tick_all(&self, now: u64) -> TickReport {
        let mut total = TickReport::default();
        for op in self.all_operators() {
            if op.is_running() && op.config.mode == Mode::Online {
                let r = self.tick_operator(&op, now);
                total.blocks += r.blocks;
                total.outputs += r.outputs;
                total.not_ready += r.not_ready;
                total.failed += r.failed;
            }
        }
        total
    }

    /// Ticks the running online operators whose interval divides `now -
    /// epoch`, in load order.
    pub fn tick_due(&self, now: u64) -> TickReport {
        let mut total = TickReport::default();
        for op in self.all_operators() {
            let elapsed = now.saturating_sub(self.inner.epoch);
            if op.is_running() && op.config.mode == Mode::Online && elapsed.is_multiple_of(op.config.interval_ns.max(1)) {
                let r = self.tick_operator(&op, now);
                total.blocks += r.blocks;
                total.outputs += r.outputs;
                total.not_ready += r.not_ready;
                total.failed += r.failed;
            }
        }
        total
    }

    fn write(&self, op: &Operator, outputs: BlockOutputs, now: u64) {
        if outputs.is_empty() {
            return;
        }
        let publisher = if op.config.streaming {
            self.inner.publisher.read().clone()
        } else {
            None
        };
        let mut fresh = Vec::new();
        for (topic, value) in outputs {
            let reading = SensorReading::new(value, now);
            if self.inner.sensors.get(&topic).is_none() {
                self.inner
                    .sensors
                    .register(&topic, op.config.interval_ns, SensorMeta { scale: op.scale });
                fresh.push(topic.clone());
            }
            self.inner.sensors.store(&topic, &[reading]);
            if let Some(p) = &publisher {
                p.publish(&topic, &[reading]);
            }
        }
        if !fresh.is_empty() {
            self.inner.qe.announce(&fresh);
        }
    }

    /// Computes one block of an on-demand operator and returns its outputs
    /// without writing them anywhere.
    pub fn on_demand(&self, plugin: &str, operator: &str, block: &str) -> Result<Vec<(Topic, SensorReading)>, ManagerError> {
        self.on_demand_at(plugin, operator, block, now_ns())
    }

    pub fn on_demand_at(
        &self,
        plugin: &str,
        operator: &str,
        block: &str,
        now: u64,
    ) -> Result<Vec<(Topic, SensorReading)>, ManagerError> {
        let ops = self.find(plugin, operator)?;
        if ops[0].config.mode != Mode::OnDemand {
            return Err(ManagerError::WrongMode {
                operator: operator.to_string(),
                mode: ops[0].config.mode.as_str(),
            });
        }
        let unknown = || ManagerError::UnknownBlock {
            operator: operator.to_string(),
            block: block.to_string(),
        };
        let (op, target) = if ops[0].config.job {
            let op = &ops[0];
            let jobs = self.inner.qe.jobs(now)?;
            let (blocks, _) = job_blocks(&self.inner.qe.navigator(), &op.config, &jobs);
            let b = blocks.into_iter().find(|b| b.name == block).ok_or_else(unknown)?;
            (op.clone(), b)
        } else {
            ops.iter()
                .find_map(|op| {
                    let b = op.blocks.read().iter().find(|b| block_matches(&b.name, block)).cloned();
                    b.map(|b| (op.clone(), b))
                })
                .ok_or_else(unknown)?
        };
        if !op.is_running() {
            return Err(ManagerError::Stopped {
                operator: op.name.clone(),
            });
        }
        let mut logic = op.logic.lock();
        let ctx = Ctx {
            qe: &self.inner.qe,
            now,
            config: &op.config,
        };
        let outputs = logic.compute(&ctx, &target).map_err(|e| ManagerError::Compute(e.to_string()))?;
        Ok(outputs
            .into_iter()
            .map(|(t, v)| (t, SensorReading::new(v, now)))
            .collect())
    }

    /// Runs a plugin-declared action on every instance of the operator.
    pub fn custom_action(
        &self,
        plugin: &str,
        operator: &str,
        action: &str,
        params: &BTreeMap<String, String>,
    ) -> Result<String, ManagerError> {
        self.custom_action_at(plugin, operator, action, params, now_ns())
    }

    pub fn custom_action_at(
        &self,
        plugin: &str,
        operator: &str,
        action: &str,
        params: &BTreeMap<String, String>,
        now: u64,
    ) -> Result<String, ManagerError> {
        let ops = self.find(plugin, operator)?;
        let mut statuses = Vec::new();
        for op in ops {
            let mut logic = op.logic.lock();
            if !logic.actions().contains(&action) {
                return Err(ManagerError::UnknownAction {
                    plugin: plugin.to_string(),
                    action: action.to_string(),
                });
            }
            op.busy.store(true, Ordering::Relaxed);
            let ctx = Ctx {
                qe: &self.inner.qe,
                now,
                config: &op.config,
            };
            let blocks = op.blocks.read().clone();
            let outcome = logic.custom_action(&ctx, action, params, &blocks);
            op.busy.store(false, Ordering::Relaxed);
            let outcome = outcome.map_err(ManagerError::Action)?;
            self.write(&op, outcome.outputs, now);
            statuses.push(outcome.status);
        }
        statuses.dedup();
        Ok(statuses.join("; "))
    }

    /// REST-style dispatch: `start`, `stop` or a custom action.
    pub fn action(
        &self,
        plugin: &str,
        operator: &str,
        action: &str,
        params: &BTreeMap<String, String>,
    ) -> Result<String, ManagerError> {
        match action {
            "start" => self.start(plugin, operator).map(|_| "running".to_string()),
            "stop" => self.stop(plugin, operator).map(|_| "stopped".to_string()),
            other => self.custom_action(plugin, operator, other, params),
        }
    }
}
