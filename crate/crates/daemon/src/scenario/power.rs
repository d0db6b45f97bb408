//! Node power prediction: one pusher per node runs an in-band regressor
//! that predicts the node's power one interval ahead; the collector stores
//! both series and the harness scores them.

use std::collections::BTreeMap;

use odaframe_core::sensor::from_fixed;
use odaframe_core::{SensorReading, NS_PER_MS, NS_PER_SEC};
use serde::Serialize;

use super::signals::{rng, topic, FnSource, PowerModel, Topology};
use super::sim::{SimCluster, SimSpec};
use super::{round3, scratch, Case, Options, Report, ScenarioError};
use crate::sources::Source;

pub const TOPOLOGY: Topology = Topology {
    racks: 1,
    chassis: 2,
    nodes: 2,
    cpus: 1,
};
pub const INTERVAL_MS: u64 = 250;
pub const DEFAULT_DURATION_S: u64 = 600;
pub const TRAINING_SET_SIZE: usize = 2000;
const BAND_W: f64 = 50.0;

#[derive(Debug, Clone, Serialize)]
pub struct SeriesRow {
    pub node: String,
    pub timestamp_ns: u64,
    pub actual_w: i64,
    /// Prediction made one interval earlier for this timestamp.
    pub predicted_w: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BandRow {
    pub band_lo_w: f64,
    pub band_hi_w: f64,
    pub samples: usize,
    pub mean_relative_error: f64,
}

pub struct PowerRun {
    pub report: Report,
    pub series: Vec<SeriesRow>,
    /// Per node: training response range and the predictions, in watts.
    pub ranges: Vec<(f64, f64)>,
    pub predictions: Vec<Vec<f64>>,
}

fn regressor_config(name: &str, seed: u64, training: usize) -> String {
    format!(
        "[operator {name}]
interval_ms = {INTERVAL_MS}
target = power
training_set_size = {training}
window_intervals = 4
seed = {seed}
input:
    <bottomup>power
    <bottomup>load
    <bottomup>temp
output:
    <bottomup>power-pred
operator_output:
    training-size
    avg-error
    response-min
    response-max
"
    )
}

fn node_source(node: &str, seed: u64, stream: u64, interval_ns: u64) -> Box<dyn Source> {
    let power = topic(&format!("{node}power"));
    let load = topic(&format!("{node}load"));
    let temp = topic(&format!("{node}temp"));
    let topics = vec![power.clone(), load.clone(), temp.clone()];
    let mut model = PowerModel::new(rng(seed, stream));
    Box::new(FnSource::new(node, interval_ns, topics, move |now| {
        let s = model.step();
        vec![
            (power.clone(), SensorReading::new(s.power.round() as i64, now)),
            (load.clone(), SensorReading::new((s.load * 1000.0).round() as i64, now)),
            (temp.clone(), SensorReading::new((s.temp * 10.0).round() as i64, now)),
        ]
    }))
}

pub fn run(opts: &Options) -> Result<PowerRun, ScenarioError> {
    let duration_s = opts.duration_s.unwrap_or(DEFAULT_DURATION_S);
    let interval_ns = INTERVAL_MS * NS_PER_MS;
    let ticks = duration_s * NS_PER_SEC / interval_ns;
    if ticks as usize <= TRAINING_SET_SIZE + 1 {
        return Err(ScenarioError::Invalid(format!(
            "{duration_s} s at {INTERVAL_MS} ms leaves no ticks after training on {TRAINING_SET_SIZE} samples"
        )));
    }
    let nodes = TOPOLOGY.node_paths();
    let dir = scratch()?;
    let spec = SimSpec {
        interval_ns,
        pusher_cache_ns: 180 * NS_PER_SEC,
        collector_cache_ns: 180 * NS_PER_SEC,
    };
    let sources = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| vec![node_source(n, opts.seed, i as u64, interval_ns)])
        .collect();
    let sim = SimCluster::start(&spec, dir.path(), sources)?;
    for i in 0..nodes.len() {
        sim.load_on_pusher(i, "regressor", &regressor_config(&format!("pw{i}"), opts.seed, TRAINING_SET_SIZE))?;
    }
    for k in 0..ticks {
        sim.step(sim.at(k))?;
    }

    let mut report = Report::default();
    let mut series = Vec::new();
    let mut ranges = Vec::new();
    let mut predictions = Vec::new();
    let mut errors: Vec<(f64, f64)> = Vec::new();
    let mut avg_errors = Vec::new();
    let mut out_of_range = 0usize;
    for (i, node) in nodes.iter().enumerate() {
        let actual = sim.stored(&topic(&format!("{node}power")))?;
        let predicted: BTreeMap<u64, i64> = sim
            .stored(&topic(&format!("{node}power-pred")))?
            .into_iter()
            .map(|r| (r.timestamp + interval_ns, r.value))
            .collect();
        let last = |name: &str| -> Result<Option<f64>, ScenarioError> {
            Ok(sim
                .stored(&topic(&format!("/regressor/pw{i}/{name}")))?
                .last()
                .map(|r| from_fixed(r.value)))
        };
        let (lo, hi) = match (last("response-min")?, last("response-max")?) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Err(ScenarioError::Daemon(format!("regressor pw{i} never trained"))),
        };
        if let Some(e) = last("avg-error")? {
            avg_errors.push(e);
        }
        ranges.push((lo, hi));
        let mut preds = Vec::new();
        for r in &actual {
            let p = predicted.get(&r.timestamp).map(|v| from_fixed(*v));
            if let Some(p) = p {
                preds.push(p);
                if p < lo || p > hi {
                    out_of_range += 1;
                }
                if r.value != 0 {
                    errors.push((r.value as f64, ((p - r.value as f64) / r.value as f64).abs()));
                }
            }
            series.push(SeriesRow {
                node: node.clone(),
                timestamp_ns: r.timestamp,
                actual_w: r.value,
                predicted_w: p,
            });
        }
        predictions.push(preds);
    }
    sim.shutdown()?;

    if errors.is_empty() {
        return Err(ScenarioError::Daemon("no predictions were made".into()));
    }
    let mut bands: BTreeMap<i64, (usize, f64)> = BTreeMap::new();
    for (actual, err) in &errors {
        let b = bands.entry((actual / BAND_W).floor() as i64).or_default();
        b.0 += 1;
        b.1 += err;
    }
    let band_rows: Vec<BandRow> = bands
        .into_iter()
        .map(|(b, (n, sum))| BandRow {
            band_lo_w: b as f64 * BAND_W,
            band_hi_w: (b + 1) as f64 * BAND_W,
            samples: n,
            mean_relative_error: round3(sum / n as f64 * 1000.0) / 1000.0,
        })
        .collect();
    let mre = errors.iter().map(|(_, e)| e).sum::<f64>() / errors.len() as f64;
    let all: Vec<f64> = predictions.iter().flatten().copied().collect();

    report.add("nodes", nodes.len());
    report.add("interval_ms", INTERVAL_MS);
    report.add("ticks", ticks);
    report.add("training_set_size", TRAINING_SET_SIZE);
    report.add("predictions", errors.len());
    report.add("mean_relative_error", format!("{mre:.6}"));
    if !avg_errors.is_empty() {
        report.add(
            "regressor_avg_error",
            format!("{:.6}", avg_errors.iter().sum::<f64>() / avg_errors.len() as f64),
        );
    }
    report.add("prediction_min_w", round3(all.iter().copied().fold(f64::INFINITY, f64::min)));
    report.add("prediction_max_w", round3(all.iter().copied().fold(f64::NEG_INFINITY, f64::max)));
    report.add("response_min_w", round3(ranges.iter().map(|r| r.0).fold(f64::INFINITY, f64::min)));
    report.add("response_max_w", round3(ranges.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max)));
    report.add("predictions_out_of_range", out_of_range);
    report.write_rows(&opts.out, "power_series.csv", &series)?;
    report.write_rows(&opts.out, "power_error_by_band.csv", &band_rows)?;
    report.write_summary(&opts.out, Case::Power)?;
    Ok(PowerRun {
        report,
        series,
        ranges,
        predictions,
    })
}
