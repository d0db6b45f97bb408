//! Online regression: predicts the next value of a target sensor from window
//! statistics of the block's inputs using a random forest.
//!
//! Feature vectors are paired with the target reading of the following tick
//! and accumulated until `training_set_size` pairs exist; the forest is then
//! trained once and shared by every block of the operator.
//!
//! Operator-level outputs: `training-size`, `avg-error` (mean relative
//! error of the previous tick's predictions) and, once trained,
//! `response-min` / `response-max` of the training responses.
//!
//! Keys: `target` (sensor name, required), `window_intervals` (4),
//! `training_set_size` (30000), `min_training_size` (50), `trees` (32),
//! `max_depth` (12), `seed` (0).

use std::collections::{BTreeMap, HashMap};

use odaframe_analytics::{feature_vector, ForestModel, ForestParams};
use odaframe_core::sensor::to_fixed;
use odaframe_core::Block;

use super::{input_named, Builtin};
use crate::config::OperatorConfig;
use crate::plugin::{ActionOutcome, BlockOutputs, ComputeError, Ctx, OperatorLogic};

pub const PLUGIN: Builtin = Builtin::new("regressor", 1000, create);

fn create(config: &OperatorConfig) -> Result<Box<dyn OperatorLogic>, String> {
    let target: String = config.param("target")?.ok_or("missing key target")?;
    if !config.template.inputs.iter().any(|e| e.sensor_name == target) {
        return Err(format!("target {target:?} is not among the inputs"));
    }
    let forest = ForestParams {
        n_trees: config.param_or("trees", 32)?,
        max_depth: config.param_or("max_depth", 12)?,
        ..ForestParams::default()
    };
    Ok(Box::new(Regressor {
        target,
        window_intervals: config.param_or("window_intervals", 4)?,
        training_set_size: config.param_or("training_set_size", 30_000)?,
        min_training_size: config.param_or("min_training_size", 50)?,
        seed: config.param_or("seed", 0)?,
        forest,
        pending: HashMap::new(),
        last_prediction: HashMap::new(),
        x: Vec::new(),
        y: Vec::new(),
        model: None,
        rejected: 0,
        err_sum: 0.0,
        err_n: 0,
    }))
}

struct Regressor {
    target: String,
    window_intervals: u64,
    training_set_size: usize,
    min_training_size: usize,
    seed: u64,
    forest: ForestParams,
    /// Features of the previous tick per block, waiting for their response.
    pending: HashMap<String, (u64, Vec<f64>)>,
    last_prediction: HashMap<String, (u64, f64)>,
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    model: Option<ForestModel>,
    rejected: u64,
    err_sum: f64,
    err_n: u64,
}

impl Regressor {
    fn train(&mut self) -> Result<(), String> {
        let model = ForestModel::train(&self.x, &self.y, &self.forest, self.seed).map_err(|e| e.to_string())?;
        self.model = Some(model);
        Ok(())
    }
}

impl OperatorLogic for Regressor {
    fn compute(&mut self, ctx: &Ctx<'_>, block: &Block) -> Result<BlockOutputs, ComputeError> {
        let target = input_named(block, &self.target)
            .ok_or_else(|| ComputeError::Failed(format!("block {} has no {} input", block.name, self.target)))?;
        let span = self.window_intervals * ctx.interval_ns();
        let mut windows = Vec::with_capacity(block.inputs.len());
        for t in &block.inputs {
            let w = ctx.window(t, span)?;
            windows.push(w.iter().map(|r| r.value as f64).collect::<Vec<f64>>());
        }
        let features = feature_vector(&windows).ok_or_else(|| ComputeError::NotReady("empty input window".into()))?;
        let response = ctx
            .latest(target)?
            .ok_or_else(|| ComputeError::NotReady("no target reading".into()))?;
        let y = response.value as f64;

        if let Some((ts, prev)) = self.pending.remove(&block.name) {
            let aligned = ctx.now.checked_sub(ts) == Some(ctx.interval_ns()) && response.timestamp > ts;
            if self.model.is_none() {
                if aligned {
                    self.x.push(prev);
                    self.y.push(y);
                    if self.x.len() >= self.training_set_size {
                        self.train().map_err(ComputeError::Failed)?;
                    }
                } else {
                    self.rejected += 1;
                }
            }
        }
        if let Some((ts, pred)) = self.last_prediction.get(&block.name) {
            if ctx.now.checked_sub(*ts) == Some(ctx.interval_ns()) && y != 0.0 {
                self.err_sum += ((pred - y) / y).abs();
                self.err_n += 1;
            }
        }
        self.pending.insert(block.name.clone(), (ctx.now, features.clone()));

        let Some(model) = &self.model else {
            return Err(ComputeError::NotReady(format!(
                "training set {}/{}",
                self.x.len(),
                self.training_set_size
            )));
        };
        let pred = model.predict(&features).map_err(|e| ComputeError::Failed(e.to_string()))?;
        self.last_prediction.insert(block.name.clone(), (ctx.now, pred));
        Ok(block.outputs.iter().map(|t| (t.clone(), to_fixed(pred))).collect())
    }

    fn operator_outputs(&mut self, _ctx: &Ctx<'_>) -> Vec<(String, i64)> {
        let mut out = vec![("training-size".to_string(), to_fixed(self.x.len() as f64))];
        if self.err_n > 0 {
            out.push(("avg-error".to_string(), to_fixed(self.err_sum / self.err_n as f64)));
        }
        if let Some(m) = &self.model {
            let (lo, hi) = m.response_range();
            out.push(("response-min".to_string(), to_fixed(lo)));
            out.push(("response-max".to_string(), to_fixed(hi)));
        }
        out
    }

    fn actions(&self) -> &'static [&'static str] {
        &["train"]
    }

    fn custom_action(
        &mut self,
        _ctx: &Ctx<'_>,
        action: &str,
        _params: &BTreeMap<String, String>,
        _blocks: &[Block],
    ) -> Result<ActionOutcome, String> {
        match action {
            "train" => {
                if self.x.len() < self.min_training_size {
                    return Err(format!(
                        "not enough training data: {} of {}",
                        self.x.len(),
                        self.min_training_size
                    ));
                }
                self.train()?;
                Ok(ActionOutcome::status("trained"))
            }
            other => Err(format!("no action {other:?}")),
        }
    }
}
