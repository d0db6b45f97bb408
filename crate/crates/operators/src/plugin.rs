//! The interface between the operator manager and analysis plugins.

use std::collections::BTreeMap;
use std::sync::Arc;

use odaframe_core::{Block, QueryEngine, QueryError, QueryRequest, SensorReading, Topic};

use crate::config::OperatorConfig;

/// Everything a compute call may look at.
pub struct Ctx<'a> {
    pub qe: &'a QueryEngine,
    /// Tick timestamp; written outputs carry it.
    pub now: u64,
    pub config: &'a OperatorConfig,
}

impl Ctx<'_> {
    /// Most recent reading of `topic`, if any.
    pub fn latest(&self, topic: &Topic) -> Result<Option<SensorReading>, QueryError> {
        Ok(self.qe.query(&QueryRequest::relative(topic.clone(), 0))?.readings.pop())
    }

    /// Readings of `topic` no older than `offset_ns` before its newest one.
    pub fn window(&self, topic: &Topic, offset_ns: u64) -> Result<Vec<SensorReading>, QueryError> {
        Ok(self.qe.query(&QueryRequest::relative(topic.clone(), offset_ns))?.readings)
    }

    pub fn interval_ns(&self) -> u64 {
        self.config.interval_ns
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComputeError {
    /// Nothing to output this tick (missing data, model not trained).
    NotReady(String),
    Failed(String),
}

impl std::fmt::Display for ComputeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ComputeError::NotReady(m) => write!(f, "not ready: {m}"),
            ComputeError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<QueryError> for ComputeError {
    fn from(e: QueryError) -> Self {
        ComputeError::NotReady(e.to_string())
    }
}

pub type BlockOutputs = Vec<(Topic, i64)>;

/// Status text of a custom action plus any outputs it produced, which are
/// written like tick outputs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActionOutcome {
    pub status: String,
    pub outputs: BlockOutputs,
}

impl ActionOutcome {
    pub fn status(status: impl Into<String>) -> Self {
        ActionOutcome {
            status: status.into(),
            outputs: Vec::new(),
        }
    }
}

/// Outcome of one block in one tick.
pub type BlockResult = (String, Result<BlockOutputs, ComputeError>);

/// Per-operator plugin state. The manager never calls into one instance
/// from two threads at once.
pub trait OperatorLogic: Send {
    fn compute(&mut self, ctx: &Ctx<'_>, block: &Block) -> Result<BlockOutputs, ComputeError>;

    /// Runs a whole tick. The default visits blocks in order; plugins that
    /// need all blocks at once (clustering) override it.
    fn compute_operator(&mut self, ctx: &Ctx<'_>, blocks: &[Block]) -> Vec<BlockResult> {
        blocks
            .iter()
            .map(|b| (b.name.clone(), self.compute(ctx, b)))
            .collect()
    }

    /// Operator-level outputs by sensor name, read after each tick.
    fn operator_outputs(&mut self, _ctx: &Ctx<'_>) -> Vec<(String, i64)> {
        Vec::new()
    }

    fn actions(&self) -> &'static [&'static str] {
        &[]
    }

    /// Runs a declared custom action.
    fn custom_action(
        &mut self,
        _ctx: &Ctx<'_>,
        action: &str,
        _params: &BTreeMap<String, String>,
        _blocks: &[Block],
    ) -> Result<ActionOutcome, String> {
        Err(format!("no action {action:?}"))
    }
}

/// A plugin creates operator state from configuration.
pub trait Plugin: Send + Sync {
    fn name(&self) -> &str;

    fn create(&self, config: &OperatorConfig) -> Result<Box<dyn OperatorLogic>, String>;

    /// Scale of block outputs: 1 for raw values, 1000 for fixed-point.
    fn output_scale(&self) -> i64 {
        1
    }
}

/// Compiled-in plugins selectable by name.
#[derive(Clone, Default)]
pub struct PluginRegistry {
    plugins: BTreeMap<String, Arc<dyn Plugin>>,
}

impl PluginRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry with every built-in analysis plugin.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        for p in crate::plugins::all() {
            r.register(p);
        }
        r
    }

    pub fn register(&mut self, plugin: Arc<dyn Plugin>) {
        self.plugins.insert(plugin.name().to_string(), plugin);
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn Plugin>> {
        self.plugins.get(name).cloned()
    }

    pub fn names(&self) -> Vec<&str> {
        self.plugins.keys().map(String::as_str).collect()
    }
}

/// Destination of streamed operator outputs (the transport in a pusher, the
/// store in a collector).
pub trait Publisher: Send + Sync {
    fn publish(&self, topic: &Topic, readings: &[SensorReading]);
}
