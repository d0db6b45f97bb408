//! Derived performance metrics from counter sensors.
//!
//! `kind = ratio` divides the deltas of the `numerator` and `denominator`
//! counters (CPI, vectorization ratio); `kind = rate` divides the delta of
//! `counter` by elapsed seconds (FLOPS). Deltas span `window_intervals`
//! operator intervals (1) back from the newest reading. Outputs are
//! fixed-point.

use odaframe_analytics::perf::{self, Suppressed};
use odaframe_core::sensor::to_fixed;
use odaframe_core::{Block, Topic};

use super::{input_named, Builtin};
use crate::config::OperatorConfig;
use crate::plugin::{BlockOutputs, ComputeError, Ctx, OperatorLogic};

pub const PLUGIN: Builtin = Builtin::new("perfmetrics", 1000, create);

enum Kind {
    Ratio { numerator: String, denominator: String },
    Rate { counter: String },
}

fn create(config: &OperatorConfig) -> Result<Box<dyn OperatorLogic>, String> {
    let need = |key: &str| -> Result<String, String> { config.param(key)?.ok_or(format!("missing key {key}")) };
    let kind = match config.param_or("kind", "ratio".to_string())?.as_str() {
        "ratio" => Kind::Ratio {
            numerator: need("numerator")?,
            denominator: need("denominator")?,
        },
        "rate" => Kind::Rate { counter: need("counter")? },
        other => return Err(format!("unknown kind {other:?} (expected ratio or rate)")),
    };
    Ok(Box::new(Perfmetrics {
        kind,
        window_intervals: config.param_or("window_intervals", 1)?,
        resets: 0,
        zero_denominators: 0,
    }))
}

struct Perfmetrics {
    kind: Kind,
    window_intervals: u64,
    resets: u64,
    zero_denominators: u64,
}

impl Perfmetrics {
    fn counter(&self, ctx: &Ctx<'_>, block: &Block, name: &str) -> Result<Vec<(u64, i64)>, ComputeError> {
        let topic: &Topic = input_named(block, name)
            .ok_or_else(|| ComputeError::Failed(format!("block {} has no {name} input", block.name)))?;
        Ok(ctx
            .window(topic, self.window_intervals * ctx.interval_ns())?
            .into_iter()
            .map(|r| (r.timestamp, r.value))
            .collect())
    }
}

impl OperatorLogic for Perfmetrics {
    fn compute(&mut self, ctx: &Ctx<'_>, block: &Block) -> Result<BlockOutputs, ComputeError> {
        let value = match &self.kind {
            Kind::Ratio { numerator, denominator } => {
                let n = self.counter(ctx, block, numerator)?;
                let d = self.counter(ctx, block, denominator)?;
                perf::ratio(&n, &d)
            }
            Kind::Rate { counter } => perf::rate(&self.counter(ctx, block, counter)?),
        };
        match value {
            Ok(v) => Ok(block.outputs.iter().map(|t| (t.clone(), to_fixed(v))).collect()),
            Err(s) => {
                match s {
                    Suppressed::CounterReset => self.resets += 1,
                    Suppressed::ZeroDenominator => self.zero_denominators += 1,
                    Suppressed::InsufficientData => {}
                }
                Err(ComputeError::NotReady(format!("{s:?}")))
            }
        }
    }

    fn operator_outputs(&mut self, _ctx: &Ctx<'_>) -> Vec<(String, i64)> {
        vec![
            ("counter-resets".to_string(), to_fixed(self.resets as f64)),
            ("zero-denominators".to_string(), to_fixed(self.zero_denominators as f64)),
        ]
    }
}
