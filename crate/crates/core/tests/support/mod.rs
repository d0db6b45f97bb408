//! Shared fixtures and brute-force oracles for block-system tests.
//!
//! The oracles work on topic strings directly and never touch `SensorTree`.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use odaframe_core::{LevelSpec, SensorExpression, Topic};
use odaframe_core::tree::LevelAnchor;
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn topics(list: &[&str]) -> Vec<Topic> {
    list.iter().map(|t| Topic::new(t).unwrap()).collect()
}

/// A system shaped like the worked example: rack r03 with chassis c01 and
/// c02, compute nodes s01-s04 under c02, two CPUs per node.
pub fn worked_example_topics() -> Vec<Topic> {
    let mut t = vec![
        "/r03/c01/power".to_string(),
        "/r03/c02/power".to_string(),
        "/r03/c02/inlet-temp".to_string(),
    ];
    for s in 1..=4 {
        t.push(format!("/r03/c02/s0{s}/healthy"));
        t.push(format!("/r03/c02/s0{s}/mem-used"));
        for cpu in 0..2 {
            t.push(format!("/r03/c02/s0{s}/cpu{cpu}/cpu-cycles"));
            t.push(format!("/r03/c02/s0{s}/cpu{cpu}/cache-misses"));
        }
    }
    t.iter().map(|s| Topic::new(s).unwrap()).collect()
}

pub const NAMES: &[&str] = &["power", "temp", "cpu-cycles", "instr", "healthy"];
pub const FILTERS: &[&str] = &["cpu", "s0[12]", "^/r0/", "1/", "c1", "r1/c0/s", "zzz"];

/// Random slash-topic set over a rack/chassis/server/cpu hierarchy with
/// uneven depth, at most `max_leaves` topics.
pub fn random_topics(rng: &mut impl Rng, max_leaves: usize) -> Vec<Topic> {
    let prefixes = ["r", "c", "s", "cpu"];
    let mut set = BTreeSet::new();
    let target = rng.random_range(1..=max_leaves);
    while set.len() < target {
        let depth = rng.random_range(1..=4);
        let mut path = String::new();
        for p in prefixes.iter().take(depth) {
            path.push_str(&format!("/{p}{}", rng.random_range(0..3)));
        }
        path.push('/');
        path.push_str(NAMES.choose(rng).unwrap());
        set.insert(path);
    }
    set.into_iter().map(|s| Topic::new(s).unwrap()).collect()
}

pub fn random_expression(rng: &mut impl Rng) -> SensorExpression {
    let level = if rng.random_bool(0.5) {
        LevelSpec::topdown(rng.random_range(-1..=4))
    } else {
        LevelSpec::bottomup(rng.random_range(0..=4))
    };
    let filter = rng.random_bool(0.4).then(|| *FILTERS.choose(rng).unwrap());
    SensorExpression::new(level, filter, NAMES.choose(rng).unwrap()).unwrap()
}

fn depth_of(node_path: &str) -> usize {
    node_path.matches('/').count() - 1
}

/// Every node path implied by the topic set, excluding the root.
fn node_paths(topics: &[Topic]) -> BTreeSet<String> {
    let mut nodes = BTreeSet::new();
    for t in topics {
        let parent = t.parent_path();
        for (i, _) in parent.match_indices('/').skip(1) {
            nodes.insert(parent[..=i].to_string());
        }
    }
    nodes
}

fn level_depth(level: LevelSpec, max_depth: usize) -> Option<usize> {
    let d = match level.anchor {
        LevelAnchor::TopDown => 1 + level.offset,
        LevelAnchor::BottomUp => max_depth as i64 + level.offset,
    };
    (1..=max_depth as i64).contains(&d).then_some(d as usize)
}

fn expr_nodes(nodes: &BTreeSet<String>, max_depth: usize, e: &SensorExpression) -> Vec<String> {
    let Some(d) = level_depth(e.level, max_depth) else {
        return Vec::new();
    };
    let re = e.filter_text().map(|f| regex::Regex::new(f).unwrap());
    nodes
        .iter()
        .filter(|n| depth_of(n) == d)
        .filter(|n| re.as_ref().is_none_or(|r| r.is_match(n)))
        .cloned()
        .collect()
}

/// Brute-force expression domain: scan every leaf.
pub fn oracle_domain(topics: &[Topic], e: &SensorExpression) -> Vec<String> {
    let nodes = node_paths(topics);
    let max_depth = nodes.iter().map(|n| depth_of(n)).max().unwrap_or(0);
    let allowed: BTreeSet<String> = expr_nodes(&nodes, max_depth, e).into_iter().collect();
    let mut out: Vec<String> = topics
        .iter()
        .filter(|t| t.name() == e.sensor_name && allowed.contains(t.parent_path()))
        .map(|t| t.to_string())
        .collect();
    out.sort();
    out.dedup();
    out
}

fn related(a: &str, b: &str) -> bool {
    a.starts_with(b) || b.starts_with(a)
}

/// (block name, inputs, outputs) for every buildable block, and the names
/// of skipped nodes.
pub type OracleBlocks = (Vec<(String, Vec<String>, Vec<String>)>, Vec<String>);

/// Exhaustive block enumeration: every node in any output domain, every
/// input expression checked against every leaf.
pub fn oracle_blocks(
    topics: &[Topic],
    inputs: &[SensorExpression],
    outputs: &[SensorExpression],
) -> OracleBlocks {
    let nodes = node_paths(topics);
    let max_depth = nodes.iter().map(|n| depth_of(n)).max().unwrap_or(0);
    let mut block_nodes = BTreeSet::new();
    for e in outputs {
        block_nodes.extend(expr_nodes(&nodes, max_depth, e));
    }
    let mut blocks = Vec::new();
    let mut skipped = Vec::new();
    'node: for b in &block_nodes {
        let mut ins = Vec::new();
        for e in inputs {
            let mut resolved: Vec<String> = oracle_domain(topics, e)
                .into_iter()
                .filter(|t| related(Topic::new(t).unwrap().parent_path(), b))
                .collect();
            if resolved.is_empty() {
                skipped.push(b.clone());
                continue 'node;
            }
            resolved.sort();
            for r in resolved {
                if !ins.contains(&r) {
                    ins.push(r);
                }
            }
        }
        if ins.is_empty() {
            skipped.push(b.clone());
            continue;
        }
        let mut outs = Vec::new();
        for e in outputs {
            if expr_nodes(&nodes, max_depth, e).contains(b) {
                let t = format!("{b}{}", e.sensor_name);
                if !outs.contains(&t) {
                    outs.push(t);
                }
            }
        }
        blocks.push((b.clone(), ins, outs));
    }
    (blocks, skipped)
}

/// Internal nodes of a topic set, grouped by depth.
pub fn oracle_levels(topics: &[Topic]) -> BTreeMap<usize, Vec<String>> {
    let mut levels: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for n in node_paths(topics) {
        levels.entry(depth_of(&n)).or_default().push(n);
    }
    levels
}
