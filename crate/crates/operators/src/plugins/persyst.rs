//! Per-job distribution summary: the deciles of the newest values of every
//! input in a job block, written as `OUTPUT-decile0` .. `OUTPUT-decile10`.
//!
//! Inputs older than `max_age_ms` (one operator interval by default) are
//! ignored. Values keep the input scale; deciles are rounded to integers.

use odaframe_analytics::deciles;
use odaframe_core::{Block, Topic};

use super::Builtin;
use crate::config::OperatorConfig;
use crate::plugin::{BlockOutputs, ComputeError, Ctx, OperatorLogic};

pub const PLUGIN: Builtin = Builtin::new("persyst", 1000, create);

fn create(config: &OperatorConfig) -> Result<Box<dyn OperatorLogic>, String> {
    let max_age_ns = match config.param::<u64>("max_age_ms")? {
        Some(ms) => ms * 1_000_000,
        None => config.interval_ns,
    };
    Ok(Box::new(Persyst { max_age_ns }))
}

struct Persyst {
    max_age_ns: u64,
}

/// Output topic of decile `k` for a declared output.
pub fn decile_topic(output: &Topic, k: usize) -> Topic {
    Topic::new(format!("{output}-decile{k}")).expect("suffix keeps the topic valid")
}

impl OperatorLogic for Persyst {
    fn compute(&mut self, ctx: &Ctx<'_>, block: &Block) -> Result<BlockOutputs, ComputeError> {
        let mut values = Vec::with_capacity(block.inputs.len());
        for t in &block.inputs {
            if let Some(r) = ctx.latest(t)? {
                if r.timestamp + self.max_age_ns >= ctx.now {
                    values.push(r.value as f64);
                }
            }
        }
        let d = deciles(&values).ok_or_else(|| ComputeError::NotReady("no fresh input values".into()))?;
        Ok(block
            .outputs
            .iter()
            .flat_map(|out| d.iter().enumerate().map(move |(k, v)| (decile_topic(out, k), v.round() as i64)))
            .collect())
    }
}
