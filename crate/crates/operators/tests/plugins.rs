mod support;

use std::collections::BTreeMap;

use odaframe_core::sensor::{from_fixed, to_fixed};
use odaframe_core::conf::ConfDoc;
use odaframe_core::{JobInfo, SensorTree};
use odaframe_operators::plugins::persyst::decile_topic;
use odaframe_operators::{job_blocks, parse_plugin_config, ManagerError, PluginRegistry};
use rand::{Rng, SeedableRng};
use rand_distr::Distribution;
use rand_chacha::ChaCha8Rng;
use support::*;

fn job(id: &str, nodes: &[String], start: u64) -> JobInfo {
    JobInfo {
        job_id: id.into(),
        user_id: "u".into(),
        node_list: nodes.to_vec(),
        start,
        end: None,
    }
}

#[test]
fn job_blocks_resolve_inputs_over_job_nodes() {
    let mut topics = Vec::new();
    for n in 0..32 {
        for c in 0..64 {
            topics.push(topic(&format!("/r00/n{n:02}/cpu{c:02}/cpi")));
        }
        topics.push(topic(&format!("/r00/n{n:02}/power")));
    }
    let tree = SensorTree::build(&topics, None).unwrap();
    let config = &parse_plugin_config("[operator p]\njob = true\ninput:\n    <bottomup>cpi\noutput:\n    <bottomup>cpi\n")
        .unwrap()[0];

    let (blocks, skipped) = job_blocks(&tree, config, &[]);
    assert!(blocks.is_empty() && skipped.is_empty());

    let two: Vec<String> = vec!["/r00/n01/".into(), "/r00/n02/".into()];
    let (blocks, _) = job_blocks(&tree, config, &[job("42", &two, 0)]);
    assert_eq!(blocks.len(), 1);
    assert_eq!(blocks[0].inputs.len(), 128);
    assert!(blocks[0].inputs.iter().all(|t| t.has_prefix("/r00/n01/") || t.has_prefix("/r00/n02/")));
    assert_eq!(blocks[0].outputs, vec![topic("/job/42/cpi")]);

    let all: Vec<String> = (0..32).map(|n| format!("/r00/n{n:02}/")).collect();
    let (blocks, _) = job_blocks(&tree, config, &[job("big", &all, 0)]);
    assert_eq!(blocks[0].inputs.len(), 2048);

    let (blocks, skipped) = job_blocks(&tree, config, &[job("ghost", &["/nowhere/".into()], 0)]);
    assert!(blocks.is_empty());
    assert_eq!(skipped[0].name, "ghost");
}

/// Counter pair per cpu; CPI per cpu, then deciles per job.
#[test]
fn cpi_pipeline_matches_oracle() {
    let mut names = Vec::new();
    for n in 0..2 {
        for c in 0..8 {
            names.push(format!("/n{n}/cpu{c}/cycles"));
            names.push(format!("/n{n}/cpu{c}/instructions"));
        }
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let r = rig(&refs, PluginRegistry::builtin());
    r.mgr
        .load_plugin(
            "perfmetrics",
            "[operator cpi]\nnumerator = cycles\ndenominator = instructions\ninput:\n    <bottomup>cycles\n    <bottomup>instructions\noutput:\n    <bottomup>cpi\n",
        )
        .unwrap();
    r.mgr
        .load_plugin("persyst", "[operator dist]\njob = true\ninput:\n    <bottomup>cpi\noutput:\n    <bottomup>cpi\n")
        .unwrap();
    r.mgr.start_all("perfmetrics").unwrap();
    r.mgr.start_all("persyst").unwrap();
    r.jobs.lock().push(job("7", &["/n0/".into(), "/n1/".into()], 0));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut counters = vec![(0i64, 0i64); 16];
    for k in 1..=4u64 {
        let t = k * S;
        let mut expected = Vec::new();
        for (i, (cy, ins)) in counters.iter_mut().enumerate() {
            let dc = rng.random_range(1_000..5_000_000);
            let di = rng.random_range(1_000..5_000_000);
            *cy += dc;
            *ins += di;
            let (n, c) = (i / 8, i % 8);
            r.put(&format!("/n{n}/cpu{c}/cycles"), *cy, t);
            r.put(&format!("/n{n}/cpu{c}/instructions"), *ins, t);
            expected.push(to_fixed(dc as f64 / di as f64) as f64);
        }
        r.mgr.tick_all(t);
        if k == 1 {
            assert!(r.values("/job/7/cpi-decile0").is_empty());
            continue;
        }
        let got = r.values("/n1/cpu3/cpi");
        assert_eq!(got.last().unwrap(), &(t, expected[11] as i64));
        let want = sorted_deciles(expected);
        for (d, w) in want.iter().enumerate() {
            let out = r.values(decile_topic(&topic("/job/7/cpi"), d).as_str());
            assert_eq!(out.last().unwrap(), &(t, w.round() as i64), "decile {d}");
        }
    }
    assert_eq!(r.reg.meta(&topic("/n0/cpu0/cpi")).unwrap().scale, 1000);
}

/// Type-7 quantiles by explicit sorting, independent of the library.
fn sorted_deciles(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    (0..=10)
        .map(|k| {
            let h = (v.len() - 1) as f64 * k as f64 / 10.0;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        })
        .collect()
}

#[test]
fn perfmetrics_suppresses_resets() {
    let r = rig(&["/n0/cycles", "/n0/instructions"], PluginRegistry::builtin());
    r.mgr
        .load_plugin(
            "perfmetrics",
            "[operator cpi]\nnumerator = cycles\ndenominator = instructions\ninput:\n    <bottomup>cycles\n    <bottomup>instructions\noutput:\n    <bottomup>cpi\noperator_output:\n    counter-resets\n",
        )
        .unwrap();
    r.mgr.start_all("perfmetrics").unwrap();
    for (k, (c, i)) in [(100, 100), (300, 200), (50, 400)].into_iter().enumerate() {
        let t = (k as u64 + 1) * S;
        r.put("/n0/cycles", c, t);
        r.put("/n0/instructions", i, t);
        r.mgr.tick_all(t);
    }
    assert_eq!(r.values("/n0/cpi"), vec![(2 * S, to_fixed(2.0))]);
    let resets = r.values("/perfmetrics/cpi/counter-resets");
    assert_eq!(from_fixed(resets.last().unwrap().1), 1.0);
}

#[test]
fn regressor_train_action_and_prediction() {
    let r = rig(&["/n0/power", "/n0/temp"], PluginRegistry::builtin());
    r.mgr
        .load_plugin(
            "regressor",
            "[operator pred]\ntarget = power\ntrees = 8\ninput:\n    <bottomup>power\n    <bottomup>temp\noutput:\n    <bottomup>power-pred\noperator_output:\n    training-size\n",
        )
        .unwrap();
    r.mgr.start_all("regressor").unwrap();
    let params = BTreeMap::new();
    let power = |k: u64| 200 + ((k % 10) * 10) as i64;
    for k in 1..=20 {
        r.put("/n0/power", power(k), k * S);
        r.put("/n0/temp", 40 + (k % 10) as i64, k * S);
        r.mgr.tick_all(k * S);
    }
    let err = r.mgr.custom_action_at("regressor", "pred", "train", &params, 20 * S).unwrap_err();
    assert!(err.to_string().contains("not enough"), "{err}");
    assert!(r.values("/n0/power-pred").is_empty());

    for k in 21..=101 {
        r.put("/n0/power", power(k), k * S);
        r.put("/n0/temp", 40 + (k % 10) as i64, k * S);
        r.mgr.tick_all(k * S);
    }
    let size = r.values("/regressor/pred/training-size");
    assert_eq!(from_fixed(size.last().unwrap().1), 100.0);
    let outcome = r.mgr.custom_action_at("regressor", "pred", "train", &params, 101 * S).unwrap();
    assert_eq!(outcome, "trained");

    r.put("/n0/power", power(102), 102 * S);
    r.put("/n0/temp", 40 + 2, 102 * S);
    r.mgr.tick_all(102 * S);
    let pred = from_fixed(r.values("/n0/power-pred")[0].1);
    assert!((190.0..=300.0).contains(&pred), "{pred}");

    let err = r.mgr.custom_action("regressor", "pred", "nope", &params).unwrap_err();
    assert!(matches!(err, ManagerError::UnknownAction { .. }));
}

#[test]
fn regressor_rejects_target_outside_inputs() {
    let r = rig(&["/n0/power"], PluginRegistry::builtin());
    let err = r
        .mgr
        .load_plugin("regressor", "[operator p]\ntarget = temp\ninput:\n    <bottomup>power\noutput:\n    <bottomup>pred\n")
        .unwrap_err();
    assert!(err.to_string().contains("temp"), "{err}");
}

#[test]
fn clustering_separates_groups_and_flags_outliers() {
    let mut nodes = Vec::new();
    let centers = [(100.0, 100.0), (500.0, 100.0), (300.0, 500.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise = rand_distr::Normal::new(0.0, 5.0).unwrap();
    for (x, y) in centers {
        for _ in 0..20 {
            nodes.push((x + noise.sample(&mut rng), y + noise.sample(&mut rng)));
        }
    }
    // Ten sigma away from the first two group centers.
    nodes.push((100.0 + 30.0, 100.0 + 40.0));
    nodes.push((500.0 - 50.0, 100.0));
    let names: Vec<String> = (0..nodes.len())
        .flat_map(|i| [format!("/n{i:02}/power"), format!("/n{i:02}/temp")])
        .collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let r = rig(&refs, PluginRegistry::builtin());
    for (i, (p, t)) in nodes.iter().enumerate() {
        for k in 1..=3 {
            r.put(&format!("/n{i:02}/power"), *p as i64, k * S);
            r.put(&format!("/n{i:02}/temp"), *t as i64, k * S);
        }
    }
    r.mgr
        .load_plugin(
            "clustering",
            "[operator c]\nk_max = 4\nseed = 2\ninput:\n    <bottomup>power\n    <bottomup>temp\noutput:\n    <bottomup>cluster\noperator_output:\n    clusters\n    outliers\n",
        )
        .unwrap();
    r.mgr.start_all("clustering").unwrap();
    let outcome = r
        .mgr
        .custom_action_at("clustering", "c", "reassign", &BTreeMap::new(), 3 * S)
        .unwrap();
    assert!(outcome.contains("3 clusters"), "{}", outcome);

    let labels: Vec<i64> = (0..nodes.len())
        .map(|i| r.values(&format!("/n{i:02}/cluster")).last().unwrap().1)
        .collect();
    assert_eq!(&labels[60..], &[-1, -1]);
    // Labels are a permutation of the ground truth groups.
    for g in 0..3 {
        let first = labels[g * 20];
        assert!(first >= 0);
        assert!(labels[g * 20..(g + 1) * 20].iter().all(|l| *l == first));
    }
    assert_ne!(labels[0], labels[20]);
    assert_ne!(labels[20], labels[40]);
    assert_ne!(labels[0], labels[40]);
    // Operator-level outputs come with scheduled ticks.
    assert!(r.values("/clustering/c/outliers").is_empty());
    r.mgr.tick_all(4 * S);
    assert_eq!(r.values("/clustering/c/outliers"), vec![(4 * S, 2)]);
    assert_eq!(r.values("/clustering/c/clusters"), vec![(4 * S, 3)]);
    assert_eq!(r.values("/n61/cluster").last().unwrap().1, -1);
}

#[test]
fn querytest_both_modes_agree() {
    let names: Vec<String> = (0..4).map(|i| format!("/n{i}/power")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let r = rig(&refs, PluginRegistry::builtin());
    for k in 1..=30u64 {
        for n in &names {
            r.put(n, k as i64, k * S);
        }
    }
    r.mgr
        .load_plugin(
            "querytest",
            "[operator q]\nqueries = 50\nrange_ms = 10000\nquery_mode = both\ninput:\n    <bottomup>power\noutput:\n    <bottomup>power\noperator_output:\n    queries\n    mismatches\n    readings\n",
        )
        .unwrap();
    r.mgr.start_all("querytest").unwrap();
    r.mgr.tick_all(30 * S);
    assert_eq!(r.values("/querytest/q/queries")[0].1, 100);
    assert_eq!(r.values("/querytest/q/mismatches")[0].1, 0);
    assert_eq!(r.values("/querytest/q/readings")[0].1, 100 * 11);
}

#[test]
fn plugin_config_round_trips_through_conf_doc() {
    let text = "[global]\ninterval_ms = 500\n\n[operator a]\nwindow_ms = 30\ninput:\n    <bottomup>x\noutput:\n    <bottomup>y\n";
    let configs = parse_plugin_config(text).unwrap();
    assert_eq!(configs[0].interval_ns, 500_000_000);
    let again = odaframe_operators::config::format_plugin_config(&configs);
    assert!(ConfDoc::parse(&again).is_ok());
    assert_eq!(parse_plugin_config(&again).unwrap(), configs);
}
