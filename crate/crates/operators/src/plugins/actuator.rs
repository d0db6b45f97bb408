//! Control stub: logs the knob setting it would apply and records it as an
//! output, without touching the system.

use log::info;
use odaframe_core::Block;

use super::Builtin;
use crate::config::OperatorConfig;
use crate::plugin::{BlockOutputs, ComputeError, Ctx, OperatorLogic};

pub const PLUGIN: Builtin = Builtin::new("actuator", 1, create);

fn create(config: &OperatorConfig) -> Result<Box<dyn OperatorLogic>, String> {
    Ok(Box::new(Actuator {
        knob: config.param_or("knob", "frequency".to_string())?,
        min: config.param_or("min", i64::MIN)?,
        max: config.param_or("max", i64::MAX)?,
    }))
}

struct Actuator {
    knob: String,
    min: i64,
    max: i64,
}

impl OperatorLogic for Actuator {
    fn compute(&mut self, ctx: &Ctx<'_>, block: &Block) -> Result<BlockOutputs, ComputeError> {
        let input = &block.inputs[0];
        let r = ctx
            .latest(input)?
            .ok_or_else(|| ComputeError::NotReady(format!("no data for {input}")))?;
        let setting = r.value.clamp(self.min, self.max);
        info!("would set {} of {} to {setting}", self.knob, block.name);
        Ok(block.outputs.iter().map(|t| (t.clone(), setting)).collect())
    }
}
