//! Dry-run block resolution: instantiates the operators of a plugin
//! configuration against a list of topics without running anything.

use std::fmt::Write as _;

use odaframe_core::{instantiate_blocks, SensorTree, Topic};
use odaframe_operators::parse_plugin_config;

/// Parses a topic list: one topic per line, blank lines and `#` comments
/// ignored.
pub fn parse_topics(text: &str) -> Result<Vec<Topic>, String> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(n, l)| Topic::new(l).map_err(|e| format!("line {n}: {e}")))
        .collect()
}

/// Renders the blocks every operator of `template` would get.
pub fn render(topics: &[Topic], template: &str) -> Result<String, String> {
    let tree = SensorTree::build(topics, None).map_err(|e| e.to_string())?;
    let configs = parse_plugin_config(template).map_err(|e| format!("template: {e}"))?;
    let mut out = String::new();
    for cfg in &configs {
        if cfg.job {
            let _ = writeln!(out, "operator {}: job operator, blocks are built per running job", cfg.name);
            continue;
        }
        match instantiate_blocks(&tree, &cfg.template) {
            Ok(inst) => {
                let _ = writeln!(out, "operator {}: {} block(s)", cfg.name, inst.blocks.len());
                for b in &inst.blocks {
                    let _ = writeln!(out, "  block {}", b.name);
                    for t in &b.inputs {
                        let _ = writeln!(out, "    in  {t}");
                    }
                    for t in &b.outputs {
                        let _ = writeln!(out, "    out {t}");
                    }
                }
                for s in &inst.skipped {
                    let _ = writeln!(out, "  skipped {}: {}", s.name, s.reason);
                }
            }
            Err(e) => {
                let _ = writeln!(out, "operator {}: no blocks ({e})", cfg.name);
            }
        }
    }
    Ok(out)
}
