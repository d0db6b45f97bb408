//! Blocks, block templates and template instantiation.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{BlockError, SkippedBlock};
use crate::expr::SensorExpression;
use crate::sensor::Topic;
use crate::tree::{NodeId, SensorTree};

/// Generic block description: input and output sensor expressions plus
/// operator-level output names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BlockTemplate {
    pub inputs: Vec<SensorExpression>,
    pub outputs: Vec<SensorExpression>,
    pub operator_outputs: Vec<String>,
}

impl BlockTemplate {
    pub fn new(
        inputs: Vec<SensorExpression>,
        outputs: Vec<SensorExpression>,
        operator_outputs: Vec<String>,
    ) -> Result<Self, BlockError> {
        if outputs.is_empty() {
            return Err(BlockError::NoOutputs);
        }
        Ok(BlockTemplate {
            inputs,
            outputs,
            operator_outputs,
        })
    }

    /// Parses expressions from text lists, as written in configuration files.
    pub fn parse<S: AsRef<str>>(inputs: &[S], outputs: &[S]) -> Result<Self, String> {
        let parse_all = |list: &[S]| {
            list.iter()
                .map(|s| {
                    SensorExpression::parse(s.as_ref())
                        .map_err(|e| format!("{:?}: {e}", s.as_ref()))
                })
                .collect::<Result<Vec<_>, _>>()
        };
        Self::new(parse_all(inputs)?, parse_all(outputs)?, Vec::new()).map_err(|e| e.to_string())
    }
}

/// A resolved analysis unit bound to a tree node (or, for job operators, to
/// a job).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    pub name: String,
    pub inputs: Vec<Topic>,
    pub outputs: Vec<Topic>,
}

impl Block {
    /// Checks the structural invariants of a node block against its tree.
    pub fn check(&self, tree: &SensorTree) -> Result<(), String> {
        let node = tree
            .find(&self.name)
            .ok_or_else(|| format!("block node {} is not in the tree", self.name))?;
        if self.inputs.is_empty() {
            return Err(format!("block {} has no inputs", self.name));
        }
        for out in &self.outputs {
            if out.parent_path() != tree.node(node).path {
                return Err(format!("output {out} is not a leaf of {}", self.name));
            }
        }
        for input in &self.inputs {
            let owner = tree
                .owner_of(input)
                .ok_or_else(|| format!("input {input} is not in the tree"))?;
            if !tree.hierarchically_related(owner, node) {
                return Err(format!("input {input} is unrelated to {}", self.name));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.name)?;
        for t in &self.inputs {
            writeln!(f, "  in  {t}")?;
        }
        for t in &self.outputs {
            writeln!(f, "  out {t}")?;
        }
        Ok(())
    }
}

/// Blocks built from a template, plus the nodes that had to be skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instantiation {
    pub blocks: Vec<Block>,
    pub skipped: Vec<SkippedBlock>,
}

/// Output topic of `expr` for the block at `node`: the existing leaf, or a
/// topic synthesized under the node when the analysis has not produced it yet.
fn output_topic(tree: &SensorTree, expr: &SensorExpression, node: NodeId) -> Option<Topic> {
    let n = tree.node(node);
    if expr.level.depth_in(tree.max_depth()) != Some(n.depth) || !expr.filter_matches(&n.path) {
        return None;
    }
    match n.sensor(&expr.sensor_name) {
        Some(t) => Some(t.clone()),
        None => Topic::new(format!("{}{}", n.path, expr.sensor_name)).ok(),
    }
}

fn push_unique(out: &mut Vec<Topic>, seen: &mut BTreeSet<Topic>, topics: Vec<Topic>) {
    for t in topics {
        if seen.insert(t.clone()) {
            out.push(t);
        }
    }
}

/// Resolves a template against one node, the block's binding.
pub fn resolve_block(tree: &SensorTree, template: &BlockTemplate, node: NodeId) -> Result<Block, String> {
    let mut inputs = Vec::new();
    let mut seen = BTreeSet::new();
    for expr in &template.inputs {
        let resolved = expr.resolve_for(tree, node);
        if resolved.is_empty() {
            return Err(format!("input {expr} resolves to no sensor"));
        }
        push_unique(&mut inputs, &mut seen, resolved);
    }
    if inputs.is_empty() {
        return Err("template has no inputs".to_string());
    }
    let mut outputs = Vec::new();
    let mut seen = BTreeSet::new();
    for expr in &template.outputs {
        push_unique(&mut outputs, &mut seen, output_topic(tree, expr, node).into_iter().collect());
    }
    Ok(Block {
        name: tree.node(node).path.clone(),
        inputs,
        outputs,
    })
}

/// Instantiates one block per node in the output expressions' domains.
///
/// Blocks for which some input expression resolves to nothing are skipped and
/// reported; the call fails only when no block at all can be built.
pub fn instantiate_blocks(tree: &SensorTree, template: &BlockTemplate) -> Result<Instantiation, BlockError> {
    if template.outputs.is_empty() {
        return Err(BlockError::NoOutputs);
    }
    let mut nodes: Vec<NodeId> = template
        .outputs
        .iter()
        .flat_map(|e| e.node_domain(tree))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if nodes.is_empty() {
        return Err(BlockError::EmptyOutputDomain);
    }
    nodes.sort_by(|a, b| tree.node(*a).path.cmp(&tree.node(*b).path));

    let mut blocks = Vec::new();
    let mut skipped = Vec::new();
    for node in nodes {
        match resolve_block(tree, template, node) {
            Ok(block) => blocks.push(block),
            Err(reason) => skipped.push(SkippedBlock {
                name: tree.node(node).path.clone(),
                reason,
            }),
        }
    }
    if blocks.is_empty() {
        return Err(BlockError::NoBlocks { skipped });
    }
    Ok(Instantiation { blocks, skipped })
}

/// Resolves the template's input expressions against each of `nodes` and
/// returns the union, in expression order. Used for blocks that represent a
/// set of nodes, such as a job.
pub fn resolve_inputs_for_nodes(
    tree: &SensorTree,
    template: &BlockTemplate,
    nodes: &[NodeId],
) -> Vec<Topic> {
    let mut inputs = Vec::new();
    let mut seen = BTreeSet::new();
    for expr in &template.inputs {
        for &node in nodes {
            push_unique(&mut inputs, &mut seen, expr.resolve_for(tree, node));
        }
    }
    inputs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::SensorTree;

    fn tree(list: &[&str]) -> SensorTree {
        let topics: Vec<Topic> = list.iter().map(|t| Topic::new(t).unwrap()).collect();
        SensorTree::build(&topics, None).unwrap()
    }

    fn template(inputs: &[&str], outputs: &[&str]) -> BlockTemplate {
        BlockTemplate::parse(inputs, outputs).unwrap()
    }

    #[test]
    fn output_leaves_are_synthesized() {
        let t = tree(&["/n1/in", "/n2/in"]);
        let inst = instantiate_blocks(&t, &template(&["<bottomup>in"], &["<bottomup>out"])).unwrap();
        assert_eq!(inst.blocks.len(), 2);
        assert_eq!(inst.blocks[0].name, "/n1/");
        assert_eq!(inst.blocks[0].outputs[0].as_str(), "/n1/out");
        assert_eq!(inst.blocks[0].inputs[0].as_str(), "/n1/in");
        for b in &inst.blocks {
            b.check(&t).unwrap();
        }
    }

    #[test]
    fn empty_output_domain() {
        let t = tree(&["/n1/in"]);
        assert_eq!(
            instantiate_blocks(&t, &template(&["<bottomup>in"], &["<topdown+5>out"])).unwrap_err(),
            BlockError::EmptyOutputDomain
        );
        assert_eq!(
            instantiate_blocks(&t, &template(&["<bottomup>in"], &["<bottomup, filter zzz>out"]))
                .unwrap_err(),
            BlockError::EmptyOutputDomain
        );
    }

    #[test]
    fn partially_instrumented_nodes_are_skipped() {
        let t = tree(&["/n1/in", "/n2/other"]);
        let inst = instantiate_blocks(&t, &template(&["<bottomup>in"], &["<bottomup>out"])).unwrap();
        assert_eq!(inst.blocks.len(), 1);
        assert_eq!(inst.skipped.len(), 1);
        assert_eq!(inst.skipped[0].name, "/n2/");

        let t = tree(&["/n1/other"]);
        match instantiate_blocks(&t, &template(&["<bottomup>in"], &["<bottomup>out"])) {
            Err(BlockError::NoBlocks { skipped }) => assert_eq!(skipped.len(), 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overlapping_output_domains_merge() {
        let t = tree(&["/n1/in"]);
        let inst = instantiate_blocks(
            &t,
            &template(&["<bottomup>in"], &["<bottomup>a", "<topdown>b"]),
        )
        .unwrap();
        assert_eq!(inst.blocks.len(), 1);
        assert_eq!(inst.blocks[0].outputs.len(), 2);
    }

    #[test]
    fn nodes_union_for_jobs() {
        let t = tree(&["/r/s01/cpi", "/r/s02/cpi", "/r/s03/cpi"]);
        let tpl = template(&["<bottomup>cpi"], &["<bottomup>x"]);
        let nodes = [t.find("/r/s01/").unwrap(), t.find("/r/s02/").unwrap()];
        let inputs = resolve_inputs_for_nodes(&t, &tpl, &nodes);
        assert_eq!(
            inputs.iter().map(Topic::as_str).collect::<Vec<_>>(),
            vec!["/r/s01/cpi", "/r/s02/cpi"]
        );
    }
}
