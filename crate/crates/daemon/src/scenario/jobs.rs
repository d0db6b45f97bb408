//! Job-level performance summaries: pushers derive per-core CPI and FLOPS
//! from hardware counters, and the collector reduces them to per-job
//! deciles for every job running at each tick.

use std::sync::Arc;

use odaframe_core::{JobInfo, SensorReading, Topic, NS_PER_MS, NS_PER_SEC};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::signals::{node_path, rng, topic, CoreCounters, FnSource, Topology};
use super::sim::{SimCluster, SimSpec, T0};
use super::{scratch, Case, Options, Report, ScenarioError};
use crate::sources::Source;
use odaframe_transport::Store;

pub const TOPOLOGY: Topology = Topology {
    racks: 1,
    chassis: 4,
    nodes: 5,
    cpus: 16,
};
pub const INTERVAL_MS: u64 = 5000;
pub const DEFAULT_DURATION_S: u64 = 600;
pub const NODES_PER_JOB: usize = 4;
pub const METRICS: [&str; 2] = ["cpi", "flops"];

/// Job id, start and end as fractions of the run, and the workload profile
/// (mean CPI, flops per instruction).
const JOBS: [(&str, f64, Option<f64>, f64, f64); 4] = [
    ("A", 0.0, Some(2.0 / 3.0), 0.8, 0.5),
    ("B", 0.1, Some(1.0), 1.3, 0.2),
    ("C", 0.2, Some(0.8), 2.2, 0.05),
    ("D", 1.0 / 3.0, None, 0.6, 1.2),
];
const IDLE_CPI: f64 = 3.0;
const IDLE_INSTRUCTIONS: f64 = 2e6;
const BUSY_IPS: f64 = 2e9;

#[derive(Debug, Clone, Serialize)]
pub struct DecileRow {
    pub timestamp_ns: u64,
    pub job_id: String,
    pub metric: String,
    pub d0: i64,
    pub d1: i64,
    pub d2: i64,
    pub d3: i64,
    pub d4: i64,
    pub d5: i64,
    pub d6: i64,
    pub d7: i64,
    pub d8: i64,
    pub d9: i64,
    pub d10: i64,
}

#[derive(Debug, Clone, Serialize)]
struct ScheduleRow {
    job_id: String,
    user_id: String,
    start_ns: u64,
    end_ns: Option<u64>,
    nodes: String,
}

pub struct JobsRun {
    pub report: Report,
    /// The collector's store; stays readable while the run is alive.
    pub store: Arc<Store>,
    pub jobs: Vec<JobInfo>,
    pub topology: Topology,
    pub interval_ns: u64,
    pub rows: Vec<DecileRow>,
    _dir: tempfile::TempDir,
}

/// Decile topic written by the collector for `job` and `metric`.
pub fn decile_topic(job: &str, metric: &str, k: usize) -> Topic {
    topic(&format!("/job/{job}/{metric}-decile{k}"))
}

/// Counter topic of core `cpu` on `node`.
pub fn cpu_topic(node: &str, cpu: usize, counter: &str) -> Topic {
    topic(&format!("{node}cpu{cpu:02}/{counter}"))
}

fn pusher_config() -> String {
    format!(
        "[global]
interval_ms = {INTERVAL_MS}

[operator cpi]
kind = ratio
numerator = cycles
denominator = instructions
input:
    <bottomup>cycles
    <bottomup>instructions
output:
    <bottomup>cpi

[operator flops-rate]
kind = rate
counter = flops
input:
    <bottomup>flops
output:
    <bottomup>flops-rate
"
    )
}

fn collector_config() -> String {
    format!(
        "[global]
interval_ms = {INTERVAL_MS}
job = true

[operator cpi-dist]
input:
    <bottomup>cpi
output:
    <bottomup>cpi

[operator flops-dist]
input:
    <bottomup>flops-rate
output:
    <bottomup>flops
"
    )
}

fn schedule(seed: u64, duration_ns: u64, interval_ns: u64) -> Vec<JobInfo> {
    let mut nodes = TOPOLOGY.node_paths();
    nodes.shuffle(&mut rng(seed, 1000));
    let at = |frac: f64| T0 + ((frac * duration_ns as f64 / interval_ns as f64).round() as u64) * interval_ns;
    JOBS.iter()
        .enumerate()
        .map(|(i, (id, start, end, _, _))| JobInfo {
            job_id: id.to_string(),
            user_id: format!("user{}", i % 2),
            node_list: nodes[i * NODES_PER_JOB..(i + 1) * NODES_PER_JOB].to_vec(),
            start: at(*start),
            end: end.map(at),
        })
        .collect()
}

/// Counters of one chassis. Cores of a node running a job follow the job's
/// profile; idle cores barely advance.
fn chassis_source(
    rack: usize,
    chassis: usize,
    jobs: Vec<JobInfo>,
    seed: u64,
    interval_ns: u64,
) -> Box<dyn Source> {
    let nodes: Vec<String> = (0..TOPOLOGY.nodes).map(|n| node_path(rack, chassis, n)).collect();
    let mut topics = Vec::new();
    for n in &nodes {
        for c in 0..TOPOLOGY.cpus {
            for counter in ["cycles", "instructions", "flops"] {
                topics.push(cpu_topic(n, c, counter));
            }
        }
    }
    let mut counters = vec![CoreCounters::default(); nodes.len() * TOPOLOGY.cpus];
    let mut r = rng(seed, 2000 + (rack * 100 + chassis) as u64);
    let seconds = interval_ns as f64 / NS_PER_SEC as f64;
    let name = format!("counters-r{rack:02}c{chassis:02}");
    let all = topics.clone();
    Box::new(FnSource::new(name, interval_ns, all, move |now| {
        let mut out = Vec::with_capacity(topics.len());
        for (ni, node) in nodes.iter().enumerate() {
            let profile = jobs
                .iter()
                .position(|j| j.is_active(now) && j.node_list.contains(node))
                .map(|i| (JOBS[i].3, JOBS[i].4));
            for c in 0..TOPOLOGY.cpus {
                let core = &mut counters[ni * TOPOLOGY.cpus + c];
                let (ins, cpi, fpi) = match profile {
                    Some((cpi, fpi)) => (
                        BUSY_IPS * seconds * r.random_range(0.8..1.2),
                        cpi * r.random_range(0.85..1.15),
                        fpi * r.random_range(0.9..1.1),
                    ),
                    None => (IDLE_INSTRUCTIONS * seconds * r.random_range(0.5..1.5), IDLE_CPI, 0.0),
                };
                core.advance(ins.round() as i64, cpi, fpi);
                let base = (ni * TOPOLOGY.cpus + c) * 3;
                out.push((topics[base].clone(), SensorReading::new(core.cycles, now)));
                out.push((topics[base + 1].clone(), SensorReading::new(core.instructions, now)));
                out.push((topics[base + 2].clone(), SensorReading::new(core.flops, now)));
            }
        }
        out
    }))
}

pub fn run(opts: &Options) -> Result<JobsRun, ScenarioError> {
    let duration_s = opts.duration_s.unwrap_or(DEFAULT_DURATION_S);
    let interval_ns = INTERVAL_MS * NS_PER_MS;
    let ticks = duration_s * NS_PER_SEC / interval_ns;
    if ticks < 4 {
        return Err(ScenarioError::Invalid(format!("{duration_s} s is too short for the jobs case")));
    }
    let jobs = schedule(opts.seed, duration_s * NS_PER_SEC, interval_ns);
    let dir = scratch()?;
    let spec = SimSpec {
        interval_ns,
        pusher_cache_ns: 4 * interval_ns,
        collector_cache_ns: 4 * interval_ns,
    };
    let mut sources = Vec::new();
    for r in 0..TOPOLOGY.racks {
        for c in 0..TOPOLOGY.chassis {
            sources.push(vec![chassis_source(r, c, jobs.clone(), opts.seed, interval_ns)]);
        }
    }
    let sim = SimCluster::start(&spec, dir.path(), sources)?;
    for job in &jobs {
        sim.collector.rt.jobs.submit(job.clone()).map_err(ScenarioError::Invalid)?;
    }
    for i in 0..sim.pushers.len() {
        sim.load_on_pusher(i, "perfmetrics", &pusher_config())?;
    }
    for k in 0..ticks {
        sim.step(sim.at(k))?;
        if k == 0 {
            sim.load_on_collector("persyst", &collector_config())?;
        }
    }

    let mut rows = Vec::new();
    for job in &jobs {
        for metric in METRICS {
            let series: Vec<Vec<SensorReading>> = (0..11)
                .map(|k| sim.stored(&decile_topic(&job.job_id, metric, k)))
                .collect::<Result<_, _>>()?;
            for (i, r0) in series[0].iter().enumerate() {
                let d: Vec<i64> = series.iter().map(|s| s.get(i).map_or(i64::MIN, |r| r.value)).collect();
                if series.iter().any(|s| s.get(i).map(|r| r.timestamp) != Some(r0.timestamp)) {
                    return Err(ScenarioError::Daemon(format!(
                        "deciles of job {} {metric} are misaligned",
                        job.job_id
                    )));
                }
                rows.push(DecileRow {
                    timestamp_ns: r0.timestamp,
                    job_id: job.job_id.clone(),
                    metric: metric.to_string(),
                    d0: d[0],
                    d1: d[1],
                    d2: d[2],
                    d3: d[3],
                    d4: d[4],
                    d5: d[5],
                    d6: d[6],
                    d7: d[7],
                    d8: d[8],
                    d9: d[9],
                    d10: d[10],
                });
            }
        }
    }
    rows.sort_by(|a, b| (a.timestamp_ns, &a.job_id, &a.metric).cmp(&(b.timestamp_ns, &b.job_id, &b.metric)));
    let store = sim.store.clone();
    sim.shutdown()?;

    let mut report = Report::default();
    report.add("nodes", TOPOLOGY.node_count());
    report.add("cpus_per_node", TOPOLOGY.cpus);
    report.add("jobs", jobs.len());
    report.add("idle_nodes", TOPOLOGY.node_count() - jobs.len() * NODES_PER_JOB);
    report.add("interval_ms", INTERVAL_MS);
    report.add("ticks", ticks);
    for metric in METRICS {
        report.add(&format!("{metric}_decile_rows"), rows.iter().filter(|r| r.metric == metric).count());
    }
    for job in &jobs {
        let med: Vec<i64> = rows
            .iter()
            .filter(|r| r.job_id == job.job_id && r.metric == "cpi")
            .map(|r| r.d5)
            .collect();
        if !med.is_empty() {
            let mean = med.iter().sum::<i64>() as f64 / med.len() as f64 / 1000.0;
            report.add(&format!("job_{}_mean_median_cpi", job.job_id), format!("{mean:.3}"));
        }
    }
    let sched: Vec<ScheduleRow> = jobs
        .iter()
        .map(|j| ScheduleRow {
            job_id: j.job_id.clone(),
            user_id: j.user_id.clone(),
            start_ns: j.start,
            end_ns: j.end,
            nodes: j.node_list.join(" "),
        })
        .collect();
    report.write_rows(&opts.out, "job_schedule.csv", &sched)?;
    report.write_rows(&opts.out, "job_deciles.csv", &rows)?;
    report.write_summary(&opts.out, Case::Jobs)?;
    Ok(JobsRun {
        report,
        store,
        jobs,
        topology: TOPOLOGY,
        interval_ns,
        rows,
        _dir: dir,
    })
}
