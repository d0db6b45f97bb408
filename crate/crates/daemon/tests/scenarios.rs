use std::path::Path;

use odaframe::scenario::{self, Case, Options};

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Drops the named columns from a CSV text.
fn without(text: &str, drop: &[&str]) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().unwrap().clone();
    let keep: Vec<usize> = (0..headers.len()).filter(|&i| !drop.contains(&&headers[i])).collect();
    let mut rows = vec![keep.iter().map(|&i| headers[i].to_string()).collect()];
    for rec in r.records() {
        let rec = rec.unwrap();
        rows.push(keep.iter().map(|&i| rec[i].to_string()).collect());
    }
    rows
}

fn run(case: Case, seed: u64, duration_s: Option<u64>) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let mut opts = Options::new(seed, dir.path());
    opts.duration_s = duration_s;
    opts.steady_s = 0;
    scenario::run(case, &opts).unwrap();
    dir
}

fn assert_same(case: Case, duration_s: Option<u64>, files: &[&str]) {
    let a = run(case, 11, duration_s);
    let b = run(case, 11, duration_s);
    for f in files {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{case}: {f} differs between identical runs");
    }
    let c = run(case, 12, duration_s);
    assert!(
        files.iter().any(|f| read(a.path(), f) != read(c.path(), f)),
        "{case}: seed has no effect"
    );
}

#[test]
fn power_is_reproducible() {
    assert_same(
        Case::Power,
        None,
        &["power_series.csv", "power_error_by_band.csv", "power_summary.csv"],
    );
}

#[test]
fn jobs_is_reproducible() {
    assert_same(
        Case::Jobs,
        Some(120),
        &["job_schedule.csv", "job_deciles.csv", "jobs_summary.csv"],
    );
}

#[test]
fn clustering_is_reproducible() {
    assert_same(Case::Clustering, Some(600), &["cluster_labels.csv", "clustering_summary.csv"]);
}

#[test]
fn overhead_grid_is_reproducible_apart_from_latency() {
    let a = run(Case::Overhead, 11, None);
    let b = run(Case::Overhead, 11, None);
    let latency = ["latency_median_ns", "latency_max_ns"];
    let grid_a = without(&read(a.path(), "overhead_grid.csv"), &latency);
    assert_eq!(grid_a, without(&read(b.path(), "overhead_grid.csv"), &latency));
    assert_eq!(grid_a.len(), 1 + 3 * 4 * 2);
    assert!(!a.path().join("overhead_steady.csv").exists());
}

#[test]
fn csv_headers_are_stable() {
    let d = run(Case::Clustering, 1, Some(600));
    assert!(read(d.path(), "cluster_labels.csv").starts_with("node,group,power_avg,temp_avg,idle_avg,label\n"));
    assert!(read(d.path(), "clustering_summary.csv").starts_with("metric,value\n"));
    let d = run(Case::Jobs, 1, Some(60));
    assert!(read(d.path(), "job_deciles.csv")
        .starts_with("timestamp_ns,job_id,metric,d0,d1,d2,d3,d4,d5,d6,d7,d8,d9,d10\n"));
    assert!(read(d.path(), "job_schedule.csv").starts_with("job_id,user_id,start_ns,end_ns,nodes\n"));
}

#[test]
fn bad_durations_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut opts = Options::new(1, dir.path());
    opts.duration_s = Some(60);
    assert!(scenario::run(Case::Power, &opts).is_err());
    opts.duration_s = Some(15);
    assert!(scenario::run(Case::Clustering, &opts).is_err());
    assert!("lunch".parse::<Case>().is_err());
}
