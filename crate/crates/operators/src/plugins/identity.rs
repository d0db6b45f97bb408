//! Copies the newest reading of input `i` to output `i` (the last input
//! feeds any surplus outputs). Optional `delay_ms` simulates compute cost.

use std::time::Duration;

use odaframe_core::Block;

use super::Builtin;
use crate::config::OperatorConfig;
use crate::plugin::{BlockOutputs, ComputeError, Ctx, OperatorLogic};

pub const PLUGIN: Builtin = Builtin::new("identity", 1, create);

fn create(config: &OperatorConfig) -> Result<Box<dyn OperatorLogic>, String> {
    Ok(Box::new(Identity {
        delay: Duration::from_millis(config.param_or("delay_ms", 0u64)?),
    }))
}

struct Identity {
    delay: Duration,
}

impl OperatorLogic for Identity {
    fn compute(&mut self, ctx: &Ctx<'_>, block: &Block) -> Result<BlockOutputs, ComputeError> {
        if !self.delay.is_zero() {
            std::thread::sleep(self.delay);
        }
        let mut out = Vec::with_capacity(block.outputs.len());
        for (i, topic) in block.outputs.iter().enumerate() {
            let input = &block.inputs[i.min(block.inputs.len() - 1)];
            let reading = ctx
                .latest(input)?
                .ok_or_else(|| ComputeError::NotReady(format!("no data for {input}")))?;
            out.push((topic.clone(), reading.value));
        }
        Ok(out)
    }
}
