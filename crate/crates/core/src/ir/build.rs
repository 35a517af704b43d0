use std::collections::HashSet;

use super::{Edge, Node, NodeKind, PatchGraph, PortRef};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("unknown node kind `{0}`")]
    UnknownKind(String),
}

/// Input row for [`build`]: a kind tag, params and an optional explicit id.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: Option<String>,
    pub kind: String,
    pub params: Vec<f64>,
    pub label: Option<String>,
}

impl NodeSpec {
    pub fn new(kind: impl Into<String>, params: Vec<f64>) -> Self {
        NodeSpec {
            id: None,
            kind: kind.into(),
            params,
            label: None,
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }
}

/// Incremental graph construction with `obj-<ordinal>` ids.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    ids: HashSet<String>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, index: usize) -> Option<&Node> {
        self.nodes.get(index)
    }

    /// Adds a node and returns its id. The fresh id is `obj-<n>` where `n`
    /// is the 1-based position of the node.
    pub fn add(&mut self, kind: NodeKind, params: Vec<f64>) -> Result<String, BuildError> {
        let id = format!("obj-{}", self.nodes.len() + 1);
        self.add_with_id(id, kind, params, None)
    }

    pub fn add_with_id(
        &mut self,
        id: String,
        kind: NodeKind,
        params: Vec<f64>,
        label: Option<String>,
    ) -> Result<String, BuildError> {
        if !self.ids.insert(id.clone()) {
            return Err(BuildError::DuplicateId(id));
        }
        self.nodes.push(Node {
            id: id.clone(),
            kind,
            params,
            label,
        });
        Ok(id)
    }

    pub fn connect(&mut self, src: PortRef, dst: PortRef) {
        self.edges.push(Edge { src, dst });
    }

    pub fn finish(self) -> PatchGraph {
        PatchGraph::from_parts(self.nodes, self.edges, None)
    }
}

/// Builds a graph from node specs and edges. Ids are assigned in input
/// order, so identical inputs always give identical graphs.
pub fn build(nodes: &[NodeSpec], edges: &[Edge]) -> Result<PatchGraph, BuildError> {
    let mut builder = GraphBuilder::new();
    for (i, spec) in nodes.iter().enumerate() {
        let kind: NodeKind = spec
            .kind
            .parse()
            .map_err(|_| BuildError::UnknownKind(spec.kind.clone()))?;
        let id = spec.id.clone().unwrap_or_else(|| format!("obj-{}", i + 1));
        builder.add_with_id(id, kind, spec.params.clone(), spec.label.clone())?;
    }
    for e in edges {
        builder.connect(e.src.clone(), e.dst.clone());
    }
    Ok(builder.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::validate;

    fn e(a: &str, o: usize, b: &str, i: usize) -> Edge {
        Edge::new(PortRef::new(a, o), PortRef::new(b, i))
    }

    #[test]
    fn minimal_beeper() {
        let g = build(
            &[NodeSpec::new("osc", vec![440.0]), NodeSpec::new("dac", vec![])],
            &[e("obj-1", 0, "obj-2", 0)],
        )
        .unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.nodes()[0].id, "obj-1");
        assert!(validate(&g).well_formed);
    }

    #[test]
    fn empty_input() {
        let g = build(&[], &[]).unwrap();
        assert!(g.is_empty());
        assert!(g.edges().is_empty());
    }

    #[test]
    fn duplicate_explicit_id() {
        let err = build(
            &[
                NodeSpec::new("osc", vec![440.0]).with_id("n1"),
                NodeSpec::new("dac", vec![]).with_id("n1"),
            ],
            &[],
        )
        .unwrap_err();
        assert_eq!(err, BuildError::DuplicateId("n1".into()));
    }

    #[test]
    fn unknown_kind_tag() {
        let err = build(&[NodeSpec::new("reverb", vec![])], &[]).unwrap_err();
        assert_eq!(err, BuildError::UnknownKind("reverb".into()));
    }

    #[test]
    fn deterministic_ids() {
        let specs = [NodeSpec::new("noise", vec![]), NodeSpec::new("dac", vec![])];
        assert_eq!(build(&specs, &[]).unwrap(), build(&specs, &[]).unwrap());
    }
}
