//! Clusters blocks by the window averages of their inputs with a
//! variational Bayesian Gaussian mixture and writes each block's cluster
//! label, or -1 for outliers.
//!
//! Keys: `window_ms` (3600000), `k_max` (8), `threshold` (0.001), `seed` (0),
//! `standardize` (true), `prune_floor`, `covariance_prior_scale` (0.1) and
//! `density` (`relative` to each component's peak, or `absolute`).
//!
//! Blocks in the fit are tested against their component re-estimated
//! without them; on-demand requests use the fitted components directly.

use std::collections::BTreeMap;

use odaframe_analytics::{stats, DensityScale, MixtureModel, MixtureParams};
use odaframe_core::{Block, NS_PER_MS};

use super::Builtin;
use crate::config::OperatorConfig;
use crate::plugin::{ActionOutcome, BlockOutputs, BlockResult, ComputeError, Ctx, OperatorLogic};

pub const PLUGIN: Builtin = Builtin::new("clustering", 1, create);

fn create(config: &OperatorConfig) -> Result<Box<dyn OperatorLogic>, String> {
    let k_max: usize = config.param_or("k_max", 8)?;
    if k_max == 0 {
        return Err("k_max must be positive".into());
    }
    let density = match config.param_or("density", "relative".to_string())?.as_str() {
        "relative" => DensityScale::Relative,
        "absolute" => DensityScale::Absolute,
        other => return Err(format!("unknown density {other:?} (expected relative or absolute)")),
    };
    Ok(Box::new(Clustering {
        window_ns: config.param_or("window_ms", 3_600_000u64)? * NS_PER_MS,
        k_max,
        threshold: config.param_or("threshold", 0.001)?,
        seed: config.param_or("seed", 0)?,
        standardize: config.param_or("standardize", true)?,
        prune_floor: config.param("prune_floor")?,
        prior_scale: config.param_or("covariance_prior_scale", 0.1)?,
        density,
        fitted: None,
    }))
}

struct Fitted {
    model: MixtureModel,
    center: Vec<f64>,
    spread: Vec<f64>,
    outliers: usize,
}

struct Clustering {
    window_ns: u64,
    k_max: usize,
    threshold: f64,
    seed: u64,
    standardize: bool,
    prune_floor: Option<f64>,
    prior_scale: f64,
    density: DensityScale,
    fitted: Option<Fitted>,
}

impl Clustering {
    fn point(&self, ctx: &Ctx<'_>, block: &Block) -> Result<Vec<f64>, ComputeError> {
        block
            .inputs
            .iter()
            .map(|t| {
                let w: Vec<f64> = ctx.window(t, self.window_ns)?.iter().map(|r| r.value as f64).collect();
                stats::mean(&w).ok_or_else(|| ComputeError::NotReady(format!("no data for {t}")))
            })
            .collect()
    }

    fn scaled(f: &Fitted, p: &[f64]) -> Vec<f64> {
        p.iter()
            .zip(f.center.iter().zip(&f.spread))
            .map(|(v, (c, s))| (v - c) / s)
            .collect()
    }

    fn label(&self, f: &Fitted, p: &[f64]) -> Result<i64, ComputeError> {
        f.model
            .assign_scaled(&Self::scaled(f, p), self.threshold, self.density)
            .map(|a| a.label())
            .map_err(|e| ComputeError::Failed(e.to_string()))
    }

    /// Fits the model and returns the labels of the fitted points.
    fn fit(&mut self, points: &[Vec<f64>]) -> Result<Vec<i64>, String> {
        let d = points[0].len();
        let n = points.len() as f64;
        let mut center = vec![0.0; d];
        let mut spread = vec![1.0; d];
        if self.standardize {
            for j in 0..d {
                let col: Vec<f64> = points.iter().map(|p| p[j]).collect();
                let m = col.iter().sum::<f64>() / n;
                let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
                center[j] = m;
                spread[j] = if sd > 0.0 { sd } else { 1.0 };
            }
        }
        let scaled: Vec<Vec<f64>> = points
            .iter()
            .map(|p| p.iter().zip(center.iter().zip(&spread)).map(|(v, (c, s))| (v - c) / s).collect())
            .collect();
        let params = MixtureParams {
            k_max: self.k_max.min(points.len()),
            prune_floor: self.prune_floor,
            covariance_prior_scale: self.prior_scale,
            ..MixtureParams::default()
        };
        let model = MixtureModel::fit(&scaled, &params, self.seed).map_err(|e| e.to_string())?;
        let labels: Vec<i64> = model
            .label_points(&scaled, self.threshold, self.density)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|a| a.label())
            .collect();
        self.fitted = Some(Fitted {
            outliers: labels.iter().filter(|l| **l < 0).count(),
            model,
            center,
            spread,
        });
        Ok(labels)
    }

    fn run(&mut self, ctx: &Ctx<'_>, blocks: &[Block]) -> Vec<BlockResult> {
        let mut points = Vec::new();
        let mut results: Vec<BlockResult> = Vec::new();
        let mut ready = Vec::new();
        for b in blocks {
            match self.point(ctx, b) {
                Ok(p) => {
                    ready.push(b);
                    points.push(p);
                }
                Err(e) => results.push((b.name.clone(), Err(e))),
            }
        }
        if points.len() < 2 {
            results.extend(ready.iter().map(|b| (b.name.clone(), Err(ComputeError::NotReady("too few blocks with data".into())))));
            return results;
        }
        match self.fit(&points) {
            Ok(labels) => results.extend(
                ready
                    .iter()
                    .zip(labels)
                    .map(|(b, label)| (b.name.clone(), Ok(b.outputs.iter().map(|t| (t.clone(), label)).collect()))),
            ),
            Err(e) => results.extend(ready.iter().map(|b| (b.name.clone(), Err(ComputeError::Failed(e.clone()))))),
        }
        results
    }
}

impl OperatorLogic for Clustering {
    /// Labels one block against the most recent fit.
    fn compute(&mut self, ctx: &Ctx<'_>, block: &Block) -> Result<BlockOutputs, ComputeError> {
        let f = self
            .fitted
            .as_ref()
            .ok_or_else(|| ComputeError::NotReady("model not fitted".into()))?;
        let p = self.point(ctx, block)?;
        let label = self.label(f, &p)?;
        Ok(block.outputs.iter().map(|t| (t.clone(), label)).collect())
    }

    fn compute_operator(&mut self, ctx: &Ctx<'_>, blocks: &[Block]) -> Vec<BlockResult> {
        self.run(ctx, blocks)
    }

    fn operator_outputs(&mut self, _ctx: &Ctx<'_>) -> Vec<(String, i64)> {
        match &self.fitted {
            Some(f) => vec![
                ("clusters".to_string(), f.model.effective_components() as i64),
                ("outliers".to_string(), f.outliers as i64),
            ],
            None => Vec::new(),
        }
    }

    fn actions(&self) -> &'static [&'static str] {
        &["reassign"]
    }

    fn custom_action(
        &mut self,
        ctx: &Ctx<'_>,
        action: &str,
        _params: &BTreeMap<String, String>,
        blocks: &[Block],
    ) -> Result<ActionOutcome, String> {
        if action != "reassign" {
            return Err(format!("no action {action:?}"));
        }
        let mut outputs = Vec::new();
        let mut failed = 0;
        for (_, r) in self.run(ctx, blocks) {
            match r {
                Ok(o) => outputs.extend(o),
                Err(_) => failed += 1,
            }
        }
        let clusters = self.fitted.as_ref().map_or(0, |f| f.model.effective_components());
        Ok(ActionOutcome {
            status: format!("reassigned {} blocks into {clusters} clusters ({failed} without data)", blocks.len() - failed),
            outputs,
        })
    }
}
