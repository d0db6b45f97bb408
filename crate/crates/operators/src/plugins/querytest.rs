//! Query-load generator for overhead measurements. Each tick issues
//! `queries` queries of `range_ms` over the operator's inputs, round-robin,
//! and reports latency statistics as operator-level outputs (nanoseconds).
//!
//! `query_mode` is `relative`, `absolute` or `both`; `both` also checks that the
//! two modes return the same readings and counts mismatches.

use std::time::Instant;

use odaframe_core::{Block, QueryRequest, Topic, NS_PER_MS};

use super::Builtin;
use crate::config::OperatorConfig;
use crate::plugin::{BlockOutputs, BlockResult, ComputeError, Ctx, OperatorLogic};

pub const PLUGIN: Builtin = Builtin::new("querytest", 1, create);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum QueryMode {
    Relative,
    Absolute,
    Both,
}

fn create(config: &OperatorConfig) -> Result<Box<dyn OperatorLogic>, String> {
    let mode = match config.param_or("query_mode", "relative".to_string())?.as_str() {
        "relative" => QueryMode::Relative,
        "absolute" => QueryMode::Absolute,
        "both" => QueryMode::Both,
        other => return Err(format!("unknown mode {other:?}")),
    };
    Ok(Box::new(Querytest {
        queries: config.param_or("queries", 10)?,
        range_ns: config.param_or("range_ms", 0u64)? * NS_PER_MS,
        mode,
        cursor: 0,
        latencies: Vec::new(),
        readings: 0,
        mismatches: 0,
        failures: 0,
    }))
}

struct Querytest {
    queries: usize,
    range_ns: u64,
    mode: QueryMode,
    cursor: usize,
    latencies: Vec<u64>,
    readings: usize,
    mismatches: u64,
    failures: u64,
}

impl Querytest {
    fn timed(&mut self, ctx: &Ctx<'_>, req: &QueryRequest) -> Option<Vec<odaframe_core::SensorReading>> {
        let start = Instant::now();
        let res = ctx.qe.query(req);
        self.latencies.push(start.elapsed().as_nanos() as u64);
        match res {
            Ok(r) => {
                self.readings += r.readings.len();
                Some(r.readings)
            }
            Err(_) => {
                self.failures += 1;
                None
            }
        }
    }
}

impl OperatorLogic for Querytest {
    fn compute(&mut self, _ctx: &Ctx<'_>, _block: &Block) -> Result<BlockOutputs, ComputeError> {
        Ok(Vec::new())
    }

    fn compute_operator(&mut self, ctx: &Ctx<'_>, blocks: &[Block]) -> Vec<BlockResult> {
        self.latencies.clear();
        self.readings = 0;
        let topics: Vec<&Topic> = blocks.iter().flat_map(|b| &b.inputs).collect();
        if self.queries > 0 && !topics.is_empty() {
            for _ in 0..self.queries {
                let topic = topics[self.cursor % topics.len()].clone();
                self.cursor = self.cursor.wrapping_add(1);
                match self.mode {
                    QueryMode::Relative => {
                        self.timed(ctx, &QueryRequest::relative(topic, self.range_ns));
                    }
                    QueryMode::Absolute => {
                        let t0 = ctx.now.saturating_sub(self.range_ns);
                        self.timed(ctx, &QueryRequest::absolute(topic, t0, ctx.now));
                    }
                    QueryMode::Both => {
                        let rel = self.timed(ctx, &QueryRequest::relative(topic.clone(), self.range_ns));
                        if let Some(newest) = rel.as_ref().and_then(|r| r.last()) {
                            let t1 = newest.timestamp;
                            let abs = self.timed(ctx, &QueryRequest::absolute(topic, t1.saturating_sub(self.range_ns), t1));
                            if abs != rel {
                                self.mismatches += 1;
                            }
                        }
                    }
                }
            }
        }
        blocks.iter().map(|b| (b.name.clone(), Ok(Vec::new()))).collect()
    }

    fn operator_outputs(&mut self, _ctx: &Ctx<'_>) -> Vec<(String, i64)> {
        let mut out = vec![
            ("queries".to_string(), self.latencies.len() as i64),
            ("readings".to_string(), self.readings as i64),
            ("mismatches".to_string(), self.mismatches as i64),
            ("failures".to_string(), self.failures as i64),
        ];
        if !self.latencies.is_empty() {
            let mut l = self.latencies.clone();
            l.sort_unstable();
            out.push(("latency-median".to_string(), l[l.len() / 2] as i64));
            out.push(("latency-max".to_string(), l[l.len() - 1] as i64));
        }
        out
    }
}
