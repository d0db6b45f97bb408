//! Monitoring overhead under query load.
//!
//! Two phases. The steady phase runs a real-time pusher with 1000 tester
//! sensors sampled every second, 180 s caches and a query-load operator,
//! and measures the process's CPU share and resident memory. The grid phase
//! then sweeps query count, query range and query mode in simulated time
//! and records query latency per cell.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use odaframe_core::sensor::now_ns;
use odaframe_core::{SensorReading, Topic, NS_PER_MS, NS_PER_SEC};
use odaframe_transport::PublisherOptions;
use serde::Serialize;

use super::signals::topic;
use super::sim::T0;
use super::{round3, Case, Options, Report, ScenarioError};
use crate::node::{Collector, Pusher, Runtime, RuntimeOptions};
use crate::sources::{Source, Tester};
use crate::sysinfo;

pub const SENSORS: usize = 1000;
pub const INTERVAL_MS: u64 = 1000;
pub const CACHE_S: u64 = 180;
pub const QUERIES: [usize; 3] = [1, 10, 100];
pub const RANGES_S: [u64; 4] = [0, 30, 90, 180];
pub const MODES: [&str; 2] = ["relative", "absolute"];
/// Operator ticks measured per grid cell.
pub const TICKS_PER_CELL: usize = 5;
const STEADY_QUERIES: usize = 100;
/// Excluded from the steady measurement: the collector learns the topics
/// and rebuilds its tree during the first seconds.
const WARMUP: Duration = Duration::from_secs(3);
const PREFIX: &str = "/r00/c00/s00";

#[derive(Debug, Clone, Serialize)]
pub struct GridRow {
    pub queries: usize,
    pub range_s: u64,
    pub mode: String,
    pub ticks: usize,
    pub readings_per_query: f64,
    pub failures: i64,
    pub latency_median_ns: i64,
    pub latency_max_ns: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyRow {
    pub elapsed_s: f64,
    pub cpu_percent: f64,
    pub rss_bytes: u64,
}

fn querytest_config(name: &str, interval_ms: u64, queries: usize, range_ms: u64, mode: &str) -> String {
    let mut s = format!(
        "[operator {name}]\ninterval_ms = {interval_ms}\nqueries = {queries}\nrange_ms = {range_ms}\nquery_mode = {mode}\ninput:\n"
    );
    for i in 0..SENSORS {
        let _ = writeln!(s, "    <bottomup>tester{i:04}");
    }
    s.push_str(
        "output:\n    <bottomup>querytest\noperator_output:\n    queries\n    readings\n    mismatches\n    failures\n    latency-median\n    latency-max\n",
    );
    s
}

fn tester() -> Result<Tester, ScenarioError> {
    Tester::new("tester", PREFIX, SENSORS, INTERVAL_MS * NS_PER_MS).map_err(ScenarioError::Invalid)
}

/// Fills the caches with `CACHE_S` seconds of history ending before `end`.
fn prefill(rt: &Runtime, src: &mut dyn Source, end: u64) {
    let step = INTERVAL_MS * NS_PER_MS;
    rt.declare(&src.topics(), step);
    for k in (1..=CACHE_S).rev() {
        let mut grouped: BTreeMap<Topic, Vec<SensorReading>> = BTreeMap::new();
        for (t, r) in src.sample(end - k * step) {
            grouped.entry(t).or_default().push(r);
        }
        for (t, rs) in grouped {
            rt.ingest(&t, &rs);
        }
    }
}

fn plugin_err(e: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Plugin {
        plugin: "querytest".into(),
        message: e.to_string(),
    }
}

struct Steady {
    rows: Vec<SteadyRow>,
    cpu_percent: f64,
    rss_max: u64,
    ticks: usize,
    latency_median_ns: Option<i64>,
    mismatches: i64,
    failures: i64,
}

fn steady(seconds: u64) -> Result<Steady, ScenarioError> {
    let interval_ns = INTERVAL_MS * NS_PER_MS;
    let cache_ns = CACHE_S * NS_PER_SEC;
    let collector = Collector::start(Runtime::new(RuntimeOptions::new(cache_ns, interval_ns)), "127.0.0.1:0")
        .map_err(|e| ScenarioError::Daemon(format!("collector bind: {e}")))?;
    let rt = Runtime::new(RuntimeOptions::new(cache_ns, interval_ns));
    let mut src = tester()?;
    let start = now_ns() / interval_ns * interval_ns;
    prefill(&rt, &mut src, start);
    let pusher = Arc::new(Pusher::new(
        rt.clone(),
        vec![Box::new(src)],
        &collector.data_addr().to_string(),
        PublisherOptions::default(),
    ));
    rt.manager
        .load_plugin(
            "querytest",
            &querytest_config("steady", INTERVAL_MS, STEADY_QUERIES, CACHE_S * 1000, "both"),
        )
        .map_err(plugin_err)?;
    rt.manager.start_all("querytest").map_err(plugin_err)?;

    let stop = Arc::new(AtomicBool::new(false));
    let sampler = {
        let (pusher, stop) = (pusher.clone(), stop.clone());
        std::thread::spawn(move || {
            while !stop.load(Ordering::Acquire) {
                let (_, wake) = pusher.sample_due(now_ns());
                let wait = wake.saturating_sub(now_ns()).min(50 * NS_PER_MS);
                std::thread::sleep(Duration::from_nanos(wait));
            }
        })
    };
    let scheduler = rt.manager.spawn_scheduler(4);
    std::thread::sleep(WARMUP);

    let t0 = Instant::now();
    let cpu0 = sysinfo::cpu_seconds();
    let mut rows = Vec::new();
    let mut last = (0.0, cpu0);
    let mut rss_max = 0;
    while t0.elapsed() < Duration::from_secs(seconds) {
        std::thread::sleep(Duration::from_secs(1));
        let elapsed = t0.elapsed().as_secs_f64();
        let cpu = sysinfo::cpu_seconds();
        let rss = sysinfo::rss_bytes().unwrap_or(0);
        rss_max = rss_max.max(rss);
        let share = match (cpu, last.1) {
            (Some(c), Some(p)) => 100.0 * (c - p) / (elapsed - last.0),
            _ => f64::NAN,
        };
        rows.push(SteadyRow {
            elapsed_s: round3(elapsed),
            cpu_percent: round3(share),
            rss_bytes: rss,
        });
        last = (elapsed, cpu);
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let cpu_percent = match (cpu0, sysinfo::cpu_seconds()) {
        (Some(a), Some(b)) => 100.0 * (b - a) / elapsed,
        _ => f64::NAN,
    };
    stop.store(true, Ordering::Release);
    drop(scheduler);
    let _ = sampler.join();

    let series = |name: &str| -> Vec<SensorReading> {
        rt.registry
            .get(&topic(&format!("/querytest/steady/{name}")))
            .and_then(|c| c.view_absolute(0, u64::MAX).ok())
            .unwrap_or_default()
    };
    let mut medians: Vec<i64> = series("latency-median").iter().map(|r| r.value).collect();
    medians.sort_unstable();
    let newest = |name: &str| series(name).last().map_or(0, |r| r.value);
    let out = Steady {
        rows,
        cpu_percent,
        rss_max,
        ticks: medians.len(),
        latency_median_ns: medians.get(medians.len() / 2).copied(),
        mismatches: newest("mismatches"),
        failures: newest("failures"),
    };
    pusher.flush(Duration::from_secs(5));
    drop(pusher);
    collector
        .shutdown()
        .map_err(|e| ScenarioError::Daemon(e.to_string()))?;
    Ok(out)
}

fn grid() -> Result<Vec<GridRow>, ScenarioError> {
    let interval_ns = INTERVAL_MS * NS_PER_MS;
    let mut opts = RuntimeOptions::new(CACHE_S * NS_PER_SEC, interval_ns);
    opts.epoch = Some(T0);
    let rt = Runtime::new(opts);
    let mut src = tester()?;
    let mut now = T0 + (CACHE_S + 1) * interval_ns;
    prefill(&rt, &mut src, now);
    let mut advance = |now: u64| {
        for (t, r) in src.sample(now) {
            rt.ingest(&t, &[r]);
        }
    };
    let read = |name: &str, now: u64| -> Option<i64> {
        rt.registry
            .get(&topic(&format!("/querytest/cell/{name}")))?
            .newest()
            .filter(|r| r.timestamp == now)
            .map(|r| r.value)
    };
    let mut rows = Vec::new();
    for &q in &QUERIES {
        for &range_s in &RANGES_S {
            for mode in MODES {
                rt.manager
                    .load_plugin("querytest", &querytest_config("cell", INTERVAL_MS, q, range_s * 1000, mode))
                    .map_err(plugin_err)?;
                rt.manager.start_all("querytest").map_err(plugin_err)?;
                let mut medians = Vec::new();
                let mut max = 0;
                let mut readings = 0;
                let mut queries = 0;
                let mut failures = 0;
                for _ in 0..TICKS_PER_CELL {
                    advance(now);
                    rt.manager.tick_all(now);
                    medians.push(read("latency-median", now).ok_or_else(|| {
                        ScenarioError::Daemon(format!("cell q={q} r={range_s} {mode} produced no latency"))
                    })?);
                    max = max.max(read("latency-max", now).unwrap_or(0));
                    readings += read("readings", now).unwrap_or(0);
                    queries += read("queries", now).unwrap_or(0);
                    failures = read("failures", now).unwrap_or(0);
                    now += interval_ns;
                }
                rt.manager.unload_plugin("querytest").map_err(plugin_err)?;
                medians.sort_unstable();
                rows.push(GridRow {
                    queries: q,
                    range_s,
                    mode: mode.to_string(),
                    ticks: TICKS_PER_CELL,
                    readings_per_query: round3(readings as f64 / queries.max(1) as f64),
                    failures,
                    latency_median_ns: medians[medians.len() / 2],
                    latency_max_ns: max,
                });
            }
        }
    }
    Ok(rows)
}

/// Whether absolute-mode median latency never decreases with the range, per
/// query count.
pub fn absolute_monotone(rows: &[GridRow]) -> bool {
    QUERIES.iter().all(|&q| {
        let lat: Vec<i64> = rows
            .iter()
            .filter(|r| r.queries == q && r.mode == "absolute")
            .map(|r| r.latency_median_ns)
            .collect();
        lat.windows(2).all(|w| w[0] <= w[1])
    })
}

pub fn run(opts: &Options) -> Result<Report, ScenarioError> {
    let mut report = Report::default();
    let s = if opts.steady_s > 0 { Some(steady(opts.steady_s)?) } else { None };
    let rows = grid()?;

    report.add("sensors", SENSORS);
    report.add("interval_ms", INTERVAL_MS);
    report.add("cache_s", CACHE_S);
    if let Some(s) = &s {
        report.add("steady_s", opts.steady_s);
        report.add("steady_ticks", s.ticks);
        report.add("steady_cpu_percent", format!("{:.3}", s.cpu_percent));
        report.add("steady_rss_max_bytes", s.rss_max);
        report.add("steady_rss_max_mb", format!("{:.3}", s.rss_max as f64 / (1024.0 * 1024.0)));
        if let Some(l) = s.latency_median_ns {
            report.add("steady_latency_median_ns", l);
        }
        report.add("steady_mode_mismatches", s.mismatches);
        report.add("steady_query_failures", s.failures);
        report.write_rows(&opts.out, "overhead_steady.csv", &s.rows)?;
    }
    report.add("grid_cells", rows.len());
    report.add(
        "grid_max_median_latency_ns",
        rows.iter().map(|r| r.latency_median_ns).max().unwrap_or(0),
    );
    report.add("grid_failures", rows.iter().map(|r| r.failures).sum::<i64>());
    report.add("absolute_monotone", absolute_monotone(&rows));
    report.write_rows(&opts.out, "overhead_grid.csv", &rows)?;
    report.write_summary(&opts.out, Case::Overhead)?;
    Ok(report)
}
