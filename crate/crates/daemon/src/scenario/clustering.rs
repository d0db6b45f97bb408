//! Node behaviour clustering: three groups of similar nodes plus a few
//! anomalous ones, clustered once per window by the collector.

use std::collections::BTreeSet;

use odaframe_core::{SensorReading, NS_PER_MS, NS_PER_SEC};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::signals::{rng, topic, FnSource, Topology};
use super::sim::{SimCluster, SimSpec};
use super::{round3, scratch, Case, Options, Report, ScenarioError};
use crate::sources::Source;

pub const TOPOLOGY: Topology = Topology {
    racks: 2,
    chassis: 1,
    nodes: 31,
    cpus: 1,
};
pub const INTERVAL_MS: u64 = 10_000;
pub const DEFAULT_DURATION_S: u64 = 3600;
pub const GROUP_SIZE: usize = 20;
pub const ANOMALIES: usize = 2;
pub const FEATURES: [&str; 3] = ["power", "temp", "idle"];
pub const CENTERS: [[f64; 3]; 3] = [[100.0, 40.0, 900.0], [300.0, 60.0, 700.0], [200.0, 90.0, 1100.0]];
/// Spread of node means around their group center.
pub const SIGMA: f64 = 5.0;
/// Distance of the anomalous nodes from their reference center, in SIGMA.
pub const ANOMALY_SIGMAS: f64 = 10.0;
const SAMPLE_NOISE: f64 = 2.0;

#[derive(Debug, Clone, Serialize)]
pub struct LabelRow {
    pub node: String,
    /// 0..3 for the regular groups, -1 for an injected anomaly.
    pub group: i64,
    pub power_avg: f64,
    pub temp_avg: f64,
    pub idle_avg: f64,
    pub label: i64,
}

pub struct ClusteringRun {
    pub report: Report,
    pub labels: Vec<LabelRow>,
    pub agreement: f64,
    pub clusters: i64,
    pub outliers: i64,
}

/// True group of every node (rack-major order), -1 for anomalies, and the
/// mean of each node's features.
fn assign(seed: u64) -> Vec<(i64, [f64; 3])> {
    let n = TOPOLOGY.node_count();
    let mut order: Vec<usize> = (0..n).collect();
    let mut r = rng(seed, 3000);
    order.shuffle(&mut r);
    let jitter = Normal::new(0.0, SIGMA).expect("valid sigma");
    let mut out = vec![(0, [0.0; 3]); n];
    for (rank, &node) in order.iter().enumerate() {
        out[node] = if rank < 3 * GROUP_SIZE {
            let g = rank / GROUP_SIZE;
            let c = CENTERS[g];
            (g as i64, [0, 1, 2].map(|j| c[j] + jitter.sample(&mut r)))
        } else {
            // Anomaly a sits ANOMALY_SIGMAS away from center a along feature a.
            let a = rank - 3 * GROUP_SIZE;
            let mut m = CENTERS[a % 2];
            m[a % 3] += ANOMALY_SIGMAS * SIGMA;
            (-1, m)
        };
    }
    out
}

fn rack_source(rack: usize, nodes: Vec<(String, [f64; 3])>, seed: u64, interval_ns: u64) -> Box<dyn Source> {
    let topics: Vec<_> = nodes
        .iter()
        .flat_map(|(n, _)| FEATURES.map(|f| topic(&format!("{n}{f}"))))
        .collect();
    let noise = Normal::new(0.0, SAMPLE_NOISE).expect("valid sigma");
    let mut r = rng(seed, 3100 + rack as u64);
    let all = topics.clone();
    Box::new(FnSource::new(format!("rack{rack:02}"), interval_ns, all, move |now| {
        let mut out = Vec::with_capacity(topics.len());
        for (i, (_, mean)) in nodes.iter().enumerate() {
            for (j, m) in mean.iter().enumerate() {
                let v = (m + noise.sample(&mut r)).round() as i64;
                out.push((topics[i * 3 + j].clone(), SensorReading::new(v, now)));
            }
        }
        out
    }))
}

fn clustering_config(seed: u64, window_ms: u64) -> String {
    format!(
        "[operator nodes]
interval_ms = {window_ms}
window_ms = {window_ms}
k_max = 8
threshold = 0.001
seed = {seed}
input:
    <bottomup>power
    <bottomup>temp
    <bottomup>idle
output:
    <bottomup>cluster
operator_output:
    clusters
    outliers
"
    )
}

/// Fraction of regular nodes whose label matches their group under the
/// best one-to-one mapping of groups to labels.
pub fn agreement(rows: &[LabelRow]) -> f64 {
    let regular: Vec<&LabelRow> = rows.iter().filter(|r| r.group >= 0).collect();
    if regular.is_empty() {
        return 0.0;
    }
    let labels: Vec<Option<i64>> = rows
        .iter()
        .filter(|r| r.label >= 0)
        .map(|r| r.label)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(Some)
        .chain(Some(None))
        .collect();
    let mut best = 0;
    for &a in &labels {
        for &b in &labels {
            for &c in &labels {
                let map = [a, b, c];
                let used: Vec<i64> = map.iter().flatten().copied().collect();
                if used.iter().collect::<BTreeSet<_>>().len() != used.len() {
                    continue;
                }
                let hits = regular
                    .iter()
                    .filter(|r| map[r.group as usize] == Some(r.label))
                    .count();
                best = best.max(hits);
            }
        }
    }
    best as f64 / regular.len() as f64
}

pub fn run(opts: &Options) -> Result<ClusteringRun, ScenarioError> {
    let duration_s = opts.duration_s.unwrap_or(DEFAULT_DURATION_S);
    let interval_ns = INTERVAL_MS * NS_PER_MS;
    let duration_ns = duration_s * NS_PER_SEC;
    if duration_ns < 10 * interval_ns || !duration_ns.is_multiple_of(interval_ns) {
        return Err(ScenarioError::Invalid(format!(
            "clustering needs a duration that is a multiple of {INTERVAL_MS} ms and at least ten intervals"
        )));
    }
    let ticks = duration_ns / interval_ns;
    let truth = assign(opts.seed);
    let paths = TOPOLOGY.node_paths();
    let dir = scratch()?;
    let spec = SimSpec {
        interval_ns,
        pusher_cache_ns: 2 * interval_ns,
        collector_cache_ns: duration_ns + 2 * interval_ns,
    };
    let per_rack = TOPOLOGY.chassis * TOPOLOGY.nodes;
    let sources = (0..TOPOLOGY.racks)
        .map(|r| {
            let nodes = (r * per_rack..(r + 1) * per_rack)
                .map(|i| (paths[i].clone(), truth[i].1))
                .collect();
            vec![rack_source(r, nodes, opts.seed, interval_ns)]
        })
        .collect();
    let sim = SimCluster::start(&spec, dir.path(), sources)?;
    // The operator is due every `duration`; its first due tick after loading
    // is the last step, whose window spans the whole run.
    for k in 0..=ticks {
        sim.step(sim.at(k))?;
        if k == 0 {
            sim.load_on_collector("clustering", &clustering_config(opts.seed, duration_s * 1000))?;
        }
    }
    let end = sim.at(ticks);
    let window_start = end - duration_ns;

    let mut labels = Vec::new();
    for (i, path) in paths.iter().enumerate() {
        let label = sim
            .stored(&topic(&format!("{path}cluster")))?
            .into_iter()
            .find(|r| r.timestamp == end)
            .ok_or_else(|| ScenarioError::Daemon(format!("no cluster label for {path}")))?
            .value;
        let mut avg = [0.0; 3];
        for (j, f) in FEATURES.iter().enumerate() {
            let w: Vec<f64> = sim
                .stored(&topic(&format!("{path}{f}")))?
                .into_iter()
                .filter(|r| r.timestamp >= window_start && r.timestamp <= end)
                .map(|r| r.value as f64)
                .collect();
            avg[j] = round3(w.iter().sum::<f64>() / w.len().max(1) as f64);
        }
        labels.push(LabelRow {
            node: path.clone(),
            group: truth[i].0,
            power_avg: avg[0],
            temp_avg: avg[1],
            idle_avg: avg[2],
            label,
        });
    }
    let op_output = |name: &str| -> Result<i64, ScenarioError> {
        sim.stored(&topic(&format!("/clustering/nodes/{name}")))?
            .last()
            .map(|r| r.value)
            .ok_or_else(|| ScenarioError::Daemon(format!("clustering operator wrote no {name}")))
    };
    let clusters = op_output("clusters")?;
    let outliers = op_output("outliers")?;
    sim.shutdown()?;

    let agreement = agreement(&labels);
    let flagged = labels.iter().filter(|r| r.group < 0 && r.label < 0).count();
    let false_outliers = labels.iter().filter(|r| r.group >= 0 && r.label < 0).count();
    let mut report = Report::default();
    report.add("nodes", labels.len());
    report.add("groups", CENTERS.len());
    report.add("anomalous_nodes", ANOMALIES);
    report.add("window_s", duration_s);
    report.add("clusters", clusters);
    report.add("outliers", outliers);
    report.add("agreement", format!("{agreement:.4}"));
    report.add("outliers_flagged", flagged);
    report.add("false_outliers", false_outliers);
    report.write_rows(&opts.out, "cluster_labels.csv", &labels)?;
    report.write_summary(&opts.out, Case::Clustering)?;
    Ok(ClusteringRun {
        report,
        labels,
        agreement,
        clusters,
        outliers,
    })
}
