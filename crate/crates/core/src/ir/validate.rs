use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{NodeKind, PatchGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationCode {
    EmptyPatch,
    DuplicateId,
    BadParams,
    DanglingEdge,
    PortOutOfRange,
    DuplicateEdge,
    Cycle,
    NoAudiblePath,
    BadLayout,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::EmptyPatch => "empty-patch",
            ViolationCode::DuplicateId => "duplicate-id",
            ViolationCode::BadParams => "bad-params",
            ViolationCode::DanglingEdge => "dangling-edge",
            ViolationCode::PortOutOfRange => "port-out-of-range",
            ViolationCode::DuplicateEdge => "duplicate-edge",
            ViolationCode::Cycle => "cycle",
            ViolationCode::NoAudiblePath => "no-audible-path",
            ViolationCode::BadLayout => "bad-layout",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type", content = "at")]
pub enum Locus {
    Node(String),
    /// Index into the graph's edge list.
    Edge(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locus: Option<Locus>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub well_formed: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.well_formed {
            return f.write_str("well-formed");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {}", v.code, v.message)?;
        }
        Ok(())
    }
}

/// Checks every well-formedness rule and reports all violations found.
pub fn validate(graph: &PatchGraph) -> ValidationReport {
    let mut out = Vec::new();
    let mut push = |code, message: String, locus| {
        out.push(Violation { code, message, locus })
    };

    if graph.is_empty() {
        push(ViolationCode::EmptyPatch, "patch has no nodes".into(), None);
    }

    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, node) in graph.nodes().iter().enumerate() {
        if index.insert(node.id.as_str(), i).is_some() {
            push(
                ViolationCode::DuplicateId,
                format!("node id `{}` used more than once", node.id),
                Some(Locus::Node(node.id.clone())),
            );
        }
        if let Err(msg) = node.kind.check_params(&node.params) {
            push(ViolationCode::BadParams, msg, Some(Locus::Node(node.id.clone())));
        }
    }

    let mut seen = HashSet::new();
    for (i, edge) in graph.edges().iter().enumerate() {
        let src = index.get(edge.src.node.as_str()).map(|&j| &graph.nodes()[j]);
        let dst = index.get(edge.dst.node.as_str()).map(|&j| &graph.nodes()[j]);
        match (src, dst) {
            (Some(s), Some(d)) => {
                if edge.src.port >= s.kind.outlet_count() {
                    push(
                        ViolationCode::PortOutOfRange,
                        format!("{} has no outlet {}", s.id, edge.src.port),
                        Some(Locus::Edge(i)),
                    );
                }
                if edge.dst.port >= d.kind.inlet_count() {
                    push(
                        ViolationCode::PortOutOfRange,
                        format!("{} has no inlet {}", d.id, edge.dst.port),
                        Some(Locus::Edge(i)),
                    );
                }
            }
            _ => {
                let missing = if src.is_none() { &edge.src.node } else { &edge.dst.node };
                push(
                    ViolationCode::DanglingEdge,
                    format!("edge references missing node `{missing}`"),
                    Some(Locus::Edge(i)),
                );
            }
        }
        if !seen.insert(edge) {
            push(
                ViolationCode::DuplicateEdge,
                format!(
                    "edge {}:{} -> {}:{} repeated",
                    edge.src.node, edge.src.port, edge.dst.node, edge.dst.port
                ),
                Some(Locus::Edge(i)),
            );
        }
    }

    if has_cycle(graph) {
        let locus = graph
            .edges()
            .iter()
            .position(|e| e.src.node == e.dst.node)
            .map(Locus::Edge);
        push(ViolationCode::Cycle, "signal graph contains a cycle".into(), locus);
    }

    let has_source = graph.nodes().iter().any(|n| n.kind.is_sound_source());
    if has_source && !source_reaches_dac(graph, &index) {
        push(
            ViolationCode::NoAudiblePath,
            "no sound source is connected to a dac".into(),
            None,
        );
    }

    if let Some(layout) = graph.layout() {
        let ids: BTreeSet<&str> = graph.nodes().iter().map(|n| n.id.as_str()).collect();
        let keys: BTreeSet<&str> = layout.keys().map(String::as_str).collect();
        if ids != keys {
            push(
                ViolationCode::BadLayout,
                "layout does not cover exactly the node ids".into(),
                None,
            );
        }
        for (id, rect) in layout {
            if !rect.is_valid() {
                push(
                    ViolationCode::BadLayout,
                    format!("invalid rectangle for `{id}`"),
                    Some(Locus::Node(id.clone())),
                );
            }
        }
    }

    ValidationReport {
        well_formed: out.is_empty(),
        violations: out,
    }
}

fn source_reaches_dac(graph: &PatchGraph, index: &HashMap<&str, usize>) -> bool {
    let n = graph.nodes().len();
    let mut adj = vec![Vec::new(); n];
    for e in graph.edges() {
        if let (Some(&a), Some(&b)) = (index.get(e.src.node.as_str()), index.get(e.dst.node.as_str())) {
            adj[a].push(b);
        }
    }
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = graph
        .nodes()
        .iter()
        .enumerate()
        .filter(|(_, node)| node.kind.is_sound_source())
        .map(|(i, _)| i)
        .collect();
    for &i in &queue {
        seen[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        if graph.nodes()[i].kind == NodeKind::Dac {
            return true;
        }
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    false
}

/// Node indices in dependency order, ties broken by insertion order.
/// `None` when the graph has a cycle. Edges with unknown endpoints are
/// ignored.
pub fn topological_order(graph: &PatchGraph) -> Option<Vec<usize>> {
    let n = graph.nodes().len();
    let index: HashMap<&str, usize> = graph
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, node)| (node.id.as_str(), i))
        .collect();
    let mut indegree = vec![0usize; n];
    let mut adj = vec![Vec::new(); n];
    for e in graph.edges() {
        if let (Some(&a), Some(&b)) = (index.get(e.src.node.as_str()), index.get(e.dst.node.as_str())) {
            adj[a].push(b);
            indegree[b] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &j in &adj[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.insert(j);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// True iff the directed graph contains a cycle (self-loops included).
pub fn has_cycle(graph: &PatchGraph) -> bool {
    topological_order(graph).is_none()
}
