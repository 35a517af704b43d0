use std::collections::HashMap;

use serde::Serialize;
use serde_json::Value;

use super::{note_pitch_label, parse_json, port_index, resolve_params, to_pretty_bytes, Arg, CodecError};
use crate::ir::{validate, Edge, Node, NodeKind, PatchGraph, PortRef};

/// Value of the top-level `format` key.
pub const WAVIR_FORMAT: &str = "wavir/1";

pub fn parse_wavir(text: &[u8]) -> Result<PatchGraph, CodecError> {
    let root = parse_json(text)?;
    if !root.is_object() {
        return Err(CodecError::Schema("document must be an object".into()));
    }
    match root.get("format") {
        None => {}
        Some(Value::String(f)) if f == WAVIR_FORMAT => {}
        Some(other) => {
            return Err(CodecError::Schema(format!("unsupported format {other}")));
        }
    }
    let raw_nodes = root
        .get("nodes")
        .and_then(Value::as_array)
        .ok_or_else(|| CodecError::Schema("`nodes` must be an array".into()))?;

    let mut nodes = Vec::with_capacity(raw_nodes.len());
    let mut kinds: HashMap<String, NodeKind> = HashMap::new();
    for (i, n) in raw_nodes.iter().enumerate() {
        let id = n
            .get("id")
            .and_then(Value::as_str)
            .ok_or_else(|| CodecError::Schema(format!("node {i}: `id` must be a string")))?
            .to_string();
        let ty = n
            .get("type")
            .and_then(Value::as_str)
            .ok_or_else(|| CodecError::Schema(format!("node {i}: `type` must be a string")))?;
        let kind: NodeKind = ty
            .parse()
            .map_err(|_| CodecError::UnknownObject(ty.to_string()))?;
        let args = match n.get("params") {
            None => Vec::new(),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Number(x) => x
                        .as_f64()
                        .map(Arg::Number)
                        .ok_or_else(|| CodecError::Schema(format!("node `{id}`: bad number"))),
                    Value::String(s) => Ok(Arg::Word(s.clone())),
                    _ => Err(CodecError::Schema(format!("node `{id}`: params must be numbers or pitch names"))),
                })
                .collect::<Result<_, _>>()?,
            Some(_) => return Err(CodecError::Schema(format!("node `{id}`: `params` must be an array"))),
        };
        let (params, pitch) = resolve_params(kind, &args).map_err(|e| match e {
            CodecError::Schema(m) => CodecError::Schema(format!("node `{id}`: {m}")),
            other => other,
        })?;
        let label = match n.get("label") {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(CodecError::Schema(format!("node `{id}`: `label` must be a string"))),
        };
        if kinds.insert(id.clone(), kind).is_some() {
            return Err(CodecError::Schema(format!("duplicate node id `{id}`")));
        }
        nodes.push(Node {
            id,
            kind,
            params,
            label: pitch.or(label),
        });
    }

    let raw_edges = match root.get("edges") {
        None => &[][..],
        Some(v) => v
            .as_array()
            .ok_or_else(|| CodecError::Schema("`edges` must be an array".into()))?
            .as_slice(),
    };
    let mut edges = Vec::with_capacity(raw_edges.len());
    for (i, e) in raw_edges.iter().enumerate() {
        let end = |name: &str| -> Result<(String, usize), CodecError> {
            let arr = e
                .get(name)
                .and_then(Value::as_array)
                .filter(|a| a.len() == 2)
                .ok_or_else(|| CodecError::Schema(format!("edge {i}: `{name}` must be [id, port]")))?;
            let id = arr[0]
                .as_str()
                .ok_or_else(|| CodecError::Schema(format!("edge {i}: `{name}` id must be a string")))?;
            Ok((id.to_string(), port_index(arr.get(1), &format!("edge {i}: `{name}` port"))?))
        };
        let (src, outlet) = end("from")?;
        let (dst, inlet) = end("to")?;
        let src_kind = kinds
            .get(&src)
            .ok_or_else(|| CodecError::BadConnection(format!("edge {i}: no node `{src}`")))?;
        let dst_kind = kinds
            .get(&dst)
            .ok_or_else(|| CodecError::BadConnection(format!("edge {i}: no node `{dst}`")))?;
        if outlet >= src_kind.outlet_count() {
            return Err(CodecError::BadConnection(format!("edge {i}: `{src}` has no outlet {outlet}")));
        }
        if inlet >= dst_kind.inlet_count() {
            return Err(CodecError::BadConnection(format!("edge {i}: `{dst}` has no inlet {inlet}")));
        }
        edges.push(Edge::new(PortRef::new(src, outlet), PortRef::new(dst, inlet)));
    }
    Ok(PatchGraph::from_parts(nodes, edges, None))
}

#[derive(Serialize)]
struct Doc<'a> {
    format: &'static str,
    nodes: Vec<WNode<'a>>,
    edges: Vec<WEdge<'a>>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum WParam {
    Number(f64),
    Pitch(String),
}

#[derive(Serialize)]
struct WNode<'a> {
    id: &'a str,
    #[serde(rename = "type")]
    ty: &'static str,
    params: Vec<WParam>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
}

#[derive(Serialize)]
struct WEdge<'a> {
    from: (&'a str, usize),
    to: (&'a str, usize),
}

/// Serializes a well-formed graph as a layout-free `wavir/1` document.
pub fn emit_wavir(graph: &PatchGraph) -> Result<Vec<u8>, CodecError> {
    let report = validate(graph);
    if !report.well_formed {
        return Err(CodecError::NotWellFormed(report));
    }
    let nodes = graph
        .nodes()
        .iter()
        .map(|n| match note_pitch_label(n.kind, &n.params, n.label.as_deref()) {
            Some(pitch) => WNode {
                id: &n.id,
                ty: n.kind.tag(),
                params: vec![WParam::Pitch(pitch)],
                label: None,
            },
            None => WNode {
                id: &n.id,
                ty: n.kind.tag(),
                params: n.params.iter().copied().map(WParam::Number).collect(),
                label: n.label.as_deref(),
            },
        })
        .collect();
    let edges = graph
        .edges()
        .iter()
        .map(|e| WEdge {
            from: (&e.src.node, e.src.port),
            to: (&e.dst.node, e.dst.port),
        })
        .collect();
    Ok(to_pretty_bytes(&Doc {
        format: WAVIR_FORMAT,
        nodes,
        edges,
    }))
}
