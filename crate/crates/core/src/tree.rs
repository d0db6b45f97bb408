//! Hierarchical sensor tree.
//!
//! Internal nodes are system components, leaves are sensors. Nodes are stored
//! in an arena and addressed by [`NodeId`]; the root has depth 0 and carries
//! no level, its children are at depth 1.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{ConfError, Rejection, TreeError};
use crate::sensor::Topic;

pub type NodeId = usize;

pub const ROOT: NodeId = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LevelAnchor {
    TopDown,
    BottomUp,
}

/// Vertical position in the tree: `topdown+k` counts down from the level
/// below the root, `bottomup-k` counts up from the deepest level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelSpec {
    pub anchor: LevelAnchor,
    pub offset: i64,
}

impl LevelSpec {
    pub const fn topdown(k: i64) -> Self {
        LevelSpec {
            anchor: LevelAnchor::TopDown,
            offset: k,
        }
    }

    pub const fn bottomup(k: i64) -> Self {
        LevelSpec {
            anchor: LevelAnchor::BottomUp,
            offset: -k,
        }
    }

    /// Absolute depth this level denotes in a tree of the given maximum
    /// depth, or `None` when it falls outside `[1, max_depth]`.
    pub fn depth_in(&self, max_depth: usize) -> Option<usize> {
        let depth = match self.anchor {
            LevelAnchor::TopDown => 1 + self.offset,
            LevelAnchor::BottomUp => max_depth as i64 + self.offset,
        };
        (depth >= 1 && depth <= max_depth as i64).then_some(depth as usize)
    }
}

impl fmt::Display for LevelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kw = match self.anchor {
            LevelAnchor::TopDown => "topdown",
            LevelAnchor::BottomUp => "bottomup",
        };
        match self.offset {
            0 => f.write_str(kw),
            o if o > 0 => write!(f, "{kw}+{o}"),
            o => write!(f, "{kw}{o}"),
        }
    }
}

/// Ordered per-level regular expressions that segment topics into tree
/// levels when plain slash segmentation is not wanted.
#[derive(Debug, Clone)]
pub struct HierarchySpec {
    patterns: Vec<String>,
    compiled: Vec<Regex>,
}

impl HierarchySpec {
    pub fn new<S: AsRef<str>>(patterns: &[S]) -> Result<Self, TreeError> {
        if patterns.is_empty() {
            return Err(TreeError::NoLevels);
        }
        let compiled = patterns
            .iter()
            .map(|p| {
                Regex::new(&format!("^(?:{})$", p.as_ref())).map_err(|e| TreeError::BadPattern {
                    pattern: p.as_ref().to_string(),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(HierarchySpec {
            patterns: patterns.iter().map(|p| p.as_ref().to_string()).collect(),
            compiled,
        })
    }

    pub fn patterns(&self) -> &[String] {
        &self.patterns
    }

    /// Splits a topic into `(node name, node path)` pairs and the sensor
    /// name. Each level takes the longest anchored match that still leaves a
    /// sensor name behind; a level that does not match ends segmentation.
    fn segment(&self, topic: &str) -> Result<(Vec<(String, String)>, String), String> {
        let mut pos = 0;
        let mut nodes = Vec::new();
        for re in &self.compiled {
            let seg_start = if topic[pos..].starts_with('/') { pos + 1 } else { pos };
            let rest = &topic[seg_start..];
            let ends: Vec<usize> = rest.char_indices().map(|(i, _)| i).skip(1).collect();
            let best = ends.into_iter().rev().find(|&end| re.is_match(&rest[..end]));
            match best {
                Some(end) => {
                    nodes.push((rest[..end].to_string(), format!("{}/", &topic[..seg_start + end])));
                    pos = seg_start + end;
                }
                None => break,
            }
        }
        let residue = &topic[pos..];
        match residue.strip_prefix('/') {
            Some(name) if !name.is_empty() && !name.contains('/') => Ok((nodes, name.to_string())),
            _ => Err(format!(
                "unmatched residue {residue:?} after {} level(s)",
                nodes.len()
            )),
        }
    }
}

impl PartialEq for HierarchySpec {
    fn eq(&self, other: &Self) -> bool {
        self.patterns == other.patterns
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub path: String,
    pub name: String,
    pub depth: usize,
    pub parent: Option<NodeId>,
    children: BTreeMap<String, NodeId>,
    sensors: BTreeMap<String, Topic>,
}

impl Node {
    pub fn children(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.children.values().copied()
    }

    pub fn sensors(&self) -> impl Iterator<Item = &Topic> {
        self.sensors.values()
    }

    pub fn sensor(&self, name: &str) -> Option<&Topic> {
        self.sensors.get(name)
    }
}

#[derive(Debug, Clone)]
pub struct SensorTree {
    nodes: Vec<Node>,
    by_path: HashMap<String, NodeId>,
    leaves: BTreeMap<Topic, NodeId>,
    max_depth: usize,
    hierarchy: Option<HierarchySpec>,
    rejected: Vec<Rejection>,
}

impl Default for SensorTree {
    fn default() -> Self {
        Self::empty()
    }
}

impl SensorTree {
    pub fn empty() -> Self {
        let root = Node {
            path: "/".to_string(),
            name: String::new(),
            depth: 0,
            parent: None,
            children: BTreeMap::new(),
            sensors: BTreeMap::new(),
        };
        SensorTree {
            nodes: vec![root],
            by_path: HashMap::from([("/".to_string(), ROOT)]),
            leaves: BTreeMap::new(),
            max_depth: 0,
            hierarchy: None,
            rejected: Vec::new(),
        }
    }

    /// Builds a tree with one leaf per distinct topic. Topics the hierarchy
    /// spec cannot segment are rejected individually; the build only fails
    /// when nothing could be placed.
    pub fn build<'a, I>(topics: I, hierarchy: Option<&HierarchySpec>) -> Result<Self, TreeError>
    where
        I: IntoIterator<Item = &'a Topic>,
    {
        let mut tree = Self::empty();
        tree.hierarchy = hierarchy.cloned();
        for topic in topics {
            if tree.leaves.contains_key(topic) {
                continue;
            }
            if let Err(reason) = tree.insert(topic) {
                tree.rejected.push(Rejection {
                    topic: topic.to_string(),
                    reason,
                });
            }
        }
        if tree.leaves.is_empty() {
            return Err(TreeError::Empty {
                rejected: tree.rejected,
            });
        }
        Ok(tree)
    }

    /// Same as [`SensorTree::build`] but yields an empty tree instead of an
    /// error when no topic could be placed.
    pub fn build_lenient<'a, I>(topics: I, hierarchy: Option<&HierarchySpec>) -> Self
    where
        I: IntoIterator<Item = &'a Topic>,
    {
        match Self::build(topics, hierarchy) {
            Ok(tree) => tree,
            Err(TreeError::Empty { rejected }) => SensorTree {
                hierarchy: hierarchy.cloned(),
                rejected,
                ..Self::empty()
            },
            Err(_) => Self::empty(),
        }
    }

    /// Rebuilds the tree with `extra` topics added, keeping the hierarchy
    /// spec. The receiver is left untouched.
    pub fn with_topics<'a, I>(&self, extra: I) -> Self
    where
        I: IntoIterator<Item = &'a Topic>,
    {
        let mut all: BTreeSet<Topic> = self.leaves.keys().cloned().collect();
        all.extend(extra.into_iter().cloned());
        Self::build_lenient(&all, self.hierarchy.as_ref())
    }

    fn insert(&mut self, topic: &Topic) -> Result<(), String> {
        let (segments, sensor) = match &self.hierarchy {
            Some(spec) => spec.segment(topic.as_str())?,
            None => {
                let mut path = String::from("/");
                let segs = topic.segments().collect::<Vec<_>>();
                let (name, parents) = segs.split_last().expect("topics have a segment");
                let nodes = parents
                    .iter()
                    .map(|s| {
                        path.push_str(s);
                        path.push('/');
                        (s.to_string(), path.clone())
                    })
                    .collect();
                (nodes, name.to_string())
            }
        };
        let mut current = ROOT;
        for (name, path) in segments {
            current = match self.nodes[current].children.get(&name) {
                Some(&id) => id,
                None => {
                    let id = self.nodes.len();
                    let depth = self.nodes[current].depth + 1;
                    self.nodes.push(Node {
                        path: path.clone(),
                        name: name.clone(),
                        depth,
                        parent: Some(current),
                        children: BTreeMap::new(),
                        sensors: BTreeMap::new(),
                    });
                    self.nodes[current].children.insert(name, id);
                    self.by_path.insert(path, id);
                    self.max_depth = self.max_depth.max(depth);
                    id
                }
            };
        }
        self.nodes[current].sensors.insert(sensor, topic.clone());
        self.leaves.insert(topic.clone(), current);
        Ok(())
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    /// Looks up an internal node by path; the trailing slash is optional.
    pub fn find(&self, path: &str) -> Option<NodeId> {
        if path.ends_with('/') {
            self.by_path.get(path).copied()
        } else {
            self.by_path.get(&format!("{path}/")).copied()
        }
    }

    /// Number of internal nodes, excluding the root.
    pub fn internal_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn hierarchy(&self) -> Option<&HierarchySpec> {
        self.hierarchy.as_ref()
    }

    /// Topics rejected during the build, with reasons.
    pub fn rejected(&self) -> &[Rejection] {
        &self.rejected
    }

    /// Internal node ids, excluding the root.
    pub fn internal_nodes(&self) -> impl Iterator<Item = NodeId> {
        1..self.nodes.len()
    }

    /// All leaf topics in lexicographic order.
    pub fn topics(&self) -> impl Iterator<Item = &Topic> {
        self.leaves.keys()
    }

    pub fn contains(&self, topic: &Topic) -> bool {
        self.leaves.contains_key(topic)
    }

    /// The internal node a sensor is attached to.
    pub fn owner_of(&self, topic: &Topic) -> Option<NodeId> {
        self.leaves.get(topic).copied()
    }

    pub fn nodes_at_depth(&self, depth: usize) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self
            .internal_nodes()
            .filter(|&id| self.nodes[id].depth == depth)
            .collect();
        ids.sort_by(|a, b| self.nodes[*a].path.cmp(&self.nodes[*b].path));
        ids
    }

    /// Internal nodes at the given level, ordered by path.
    pub fn nodes_at_level(&self, level: LevelSpec) -> Vec<NodeId> {
        match level.depth_in(self.max_depth) {
            Some(depth) => self.nodes_at_depth(depth),
            None => Vec::new(),
        }
    }

    /// `true` if `a` lies on the path from the root to `b` (inclusive).
    pub fn is_ancestor(&self, a: NodeId, b: NodeId) -> bool {
        let mut cur = Some(b);
        while let Some(id) = cur {
            if id == a {
                return true;
            }
            if self.nodes[id].depth <= self.nodes[a].depth {
                return false;
            }
            cur = self.nodes[id].parent;
        }
        false
    }

    /// Ancestor, descendant or identical.
    pub fn hierarchically_related(&self, a: NodeId, b: NodeId) -> bool {
        self.is_ancestor(a, b) || self.is_ancestor(b, a)
    }
}

/// Parses a topic dump: one topic per line, `#` starts a comment, blank lines
/// are ignored.
pub fn parse_topic_dump(text: &str) -> Result<Vec<Topic>, ConfError> {
    let mut topics = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let topic = Topic::from_str(line).map_err(|e| ConfError::new(idx + 1, e.to_string()))?;
        topics.push(topic);
    }
    Ok(topics)
}

pub fn format_topic_dump<'a>(topics: impl IntoIterator<Item = &'a Topic>) -> String {
    let mut out = String::new();
    for t in topics {
        out.push_str(t.as_str());
        out.push('\n');
    }
    out
}
