//! Canonical in-memory patch graph shared by every representation.
//!
//! A [`PatchGraph`] is a plain container: it can hold anything a parser or
//! builder produces. [`validate`] decides whether it is well-formed.

mod build;
mod kind;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use build::{build, BuildError, GraphBuilder, NodeSpec};
pub use kind::{
    max_object_for_kind, max_object_lookup, pitch_to_hz, resolve_kind, FilterMode, MaxObject,
    NodeKind, ParamDef, ParamRule, PortSignature, UnknownKind, Waveform, ALL_KINDS, MAX_OBJECTS,
};
pub use validate::{has_cycle, topological_order, validate, Locus, ValidationReport, Violation, ViolationCode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// One end of an edge: a node id and a 0-based port index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortRef {
    pub node: String,
    pub port: usize,
}

impl PortRef {
    pub fn new(node: impl Into<String>, port: usize) -> Self {
        PortRef {
            node: node.into(),
            port,
        }
    }
}

/// A connection from an outlet to an inlet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub src: PortRef,
    pub dst: PortRef,
}

impl Edge {
    pub fn new(src: PortRef, dst: PortRef) -> Self {
        Edge { src, dst }
    }
}

/// Editor placement in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn is_valid(&self) -> bool {
        [self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite()) && self.w >= 0.0 && self.h >= 0.0
    }
}

/// A dataflow patch: nodes in insertion order, edges, optional layout.
///
/// Immutable once constructed; every operation on it is pure.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PatchGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layout: Option<BTreeMap<String, Rect>>,
}

impl PatchGraph {
    /// Assembles a graph without checking it. Use [`validate`] afterwards.
    pub fn from_parts(nodes: Vec<Node>, edges: Vec<Edge>, layout: Option<BTreeMap<String, Rect>>) -> Self {
        PatchGraph { nodes, edges, layout }
    }

    pub fn empty() -> Self {
        PatchGraph::default()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn layout(&self) -> Option<&BTreeMap<String, Rect>> {
        self.layout.as_ref()
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn with_layout(mut self, layout: BTreeMap<String, Rect>) -> Self {
        self.layout = Some(layout);
        self
    }

    pub fn without_layout(mut self) -> Self {
        self.layout = None;
        self
    }

    /// Number of nodes of any kind, rendering or not.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn count_kind(&self, pred: impl Fn(NodeKind) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(n.kind)).count()
    }

    /// Compares two graphs up to id renaming, pairing nodes by position.
    /// Layout is ignored.
    pub fn same_structure(&self, other: &PatchGraph) -> bool {
        if self.nodes.len() != other.nodes.len() || self.edges.len() != other.edges.len() {
            return false;
        }
        let same_nodes = self
            .nodes
            .iter()
            .zip(&other.nodes)
            .all(|(a, b)| a.kind == b.kind && a.params == b.params && a.label == b.label);
        if !same_nodes {
            return false;
        }
        self.edge_multiset() == other.edge_multiset()
    }

    /// Edges rewritten as (src index, outlet, dst index, inlet), sorted.
    /// Endpoints that do not resolve map to `usize::MAX`.
    pub fn edge_multiset(&self) -> Vec<(usize, usize, usize, usize)> {
        let mut out: Vec<_> = self
            .edges
            .iter()
            .map(|e| {
                (
                    self.node_index(&e.src.node).unwrap_or(usize::MAX),
                    e.src.port,
                    self.node_index(&e.dst.node).unwrap_or(usize::MAX),
                    e.dst.port,
                )
            })
            .collect();
        out.sort_unstable();
        out
    }
}

/// Number of nodes in the patch, the complexity metric.
pub fn node_count(graph: &PatchGraph) -> usize {
    graph.node_count()
}
