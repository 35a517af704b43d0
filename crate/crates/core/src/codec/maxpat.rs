use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use serde_json::Value;

use super::{note_pitch_label, parse_json, port_index, resolve_params, to_pretty_bytes, Arg, CodecError};
use crate::ir::{
    max_object_for_kind, max_object_lookup, validate, Edge, Node, PatchGraph, PortRef, Rect,
};

/// Auto-layout for graphs without one: five columns on a 160×120 grid.
pub fn grid_rect(i: usize) -> Rect {
    Rect::new(
        40.0 + 160.0 * (i % 5) as f64,
        40.0 + 120.0 * (i / 5) as f64,
        120.0,
        22.0,
    )
}

/// Parses the supported `.maxpat` subset. Accepts either the usual
/// `{"patcher": {...}}` wrapper or a bare patcher object.
pub fn parse_maxpat(text: &[u8]) -> Result<PatchGraph, CodecError> {
    let root = parse_json(text)?;
    let patcher = match root.get("patcher") {
        Some(p) => p,
        None if root.get("boxes").is_some() => &root,
        None => return Err(CodecError::Schema("missing `patcher` object".into())),
    };
    if !patcher.is_object() {
        return Err(CodecError::Schema("`patcher` must be an object".into()));
    }
    let boxes = patcher
        .get("boxes")
        .and_then(Value::as_array)
        .ok_or_else(|| CodecError::Schema("`boxes` must be an array".into()))?;

    let mut nodes = Vec::with_capacity(boxes.len());
    let mut layout = BTreeMap::new();
    let mut kinds = HashMap::new();
    for (i, entry) in boxes.iter().enumerate() {
        let b = entry.get("box").unwrap_or(entry);
        let field = |name: &str| {
            b.get(name)
                .ok_or_else(|| CodecError::Schema(format!("box {i}: missing `{name}`")))
        };
        let id = field("id")?
            .as_str()
            .ok_or_else(|| CodecError::Schema(format!("box {i}: `id` must be a string")))?
            .to_string();
        let maxclass = field("maxclass")?
            .as_str()
            .ok_or_else(|| CodecError::Schema(format!("box {i}: `maxclass` must be a string")))?;
        let text = match b.get("text") {
            Some(Value::String(s)) => s.as_str(),
            Some(_) => return Err(CodecError::Schema(format!("box {i}: `text` must be a string"))),
            None if maxclass == "newobj" => {
                return Err(CodecError::Schema(format!("box {i}: missing `text`")))
            }
            None => "",
        };
        let mut tokens = text.split_whitespace();
        let token = if maxclass == "newobj" { tokens.next().unwrap_or("") } else { "" };
        let object = max_object_lookup(maxclass, token).ok_or_else(|| {
            let what = if maxclass == "newobj" { text.to_string() } else { maxclass.to_string() };
            CodecError::UnknownObject(what)
        })?;
        let args: Vec<Arg> = if maxclass == "newobj" { tokens.map(Arg::from_token).collect() } else { Vec::new() };
        let (params, pitch) = resolve_params(object.kind, &args)
            .map_err(|e| match e {
                CodecError::Schema(m) => CodecError::Schema(format!("box `{id}`: {m}")),
                other => other,
            })?;
        let varname = match b.get("varname") {
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(CodecError::Schema(format!("box {i}: `varname` must be a string"))),
            None => None,
        };
        let rect = parse_rect(field("patching_rect")?)
            .ok_or_else(|| CodecError::Schema(format!("box `{id}`: `patching_rect` must be [x, y, w, h] with w, h >= 0")))?;
        if kinds.insert(id.clone(), object.kind).is_some() {
            return Err(CodecError::Schema(format!("duplicate box id `{id}`")));
        }
        layout.insert(id.clone(), rect);
        nodes.push(Node {
            id,
            kind: object.kind,
            params,
            label: pitch.or(varname),
        });
    }

    let lines = match patcher.get("lines") {
        None => &[][..],
        Some(v) => v
            .as_array()
            .ok_or_else(|| CodecError::Schema("`lines` must be an array".into()))?
            .as_slice(),
    };
    let mut edges = Vec::with_capacity(lines.len());
    for (i, entry) in lines.iter().enumerate() {
        let line = entry.get("patchline").unwrap_or(entry);
        let end = |name: &str| -> Result<(String, usize), CodecError> {
            let arr = line
                .get(name)
                .and_then(Value::as_array)
                .filter(|a| a.len() == 2)
                .ok_or_else(|| CodecError::Schema(format!("line {i}: `{name}` must be [id, port]")))?;
            let id = arr[0]
                .as_str()
                .ok_or_else(|| CodecError::Schema(format!("line {i}: `{name}` id must be a string")))?;
            Ok((id.to_string(), port_index(arr.get(1), &format!("line {i}: `{name}` port"))?))
        };
        let (src, outlet) = end("source")?;
        let (dst, inlet) = end("destination")?;
        let src_kind = kinds
            .get(&src)
            .ok_or_else(|| CodecError::BadConnection(format!("line {i}: no box `{src}`")))?;
        let dst_kind = kinds
            .get(&dst)
            .ok_or_else(|| CodecError::BadConnection(format!("line {i}: no box `{dst}`")))?;
        if outlet >= src_kind.outlet_count() {
            return Err(CodecError::BadConnection(format!("line {i}: `{src}` has no outlet {outlet}")));
        }
        if inlet >= dst_kind.inlet_count() {
            return Err(CodecError::BadConnection(format!("line {i}: `{dst}` has no inlet {inlet}")));
        }
        edges.push(Edge::new(PortRef::new(src, outlet), PortRef::new(dst, inlet)));
    }

    Ok(PatchGraph::from_parts(nodes, edges, Some(layout)))
}

fn parse_rect(v: &Value) -> Option<Rect> {
    let arr = v.as_array().filter(|a| a.len() == 4)?;
    let mut nums = [0.0; 4];
    for (slot, x) in nums.iter_mut().zip(arr) {
        *slot = x.as_f64()?;
    }
    let rect = Rect::new(nums[0], nums[1], nums[2], nums[3]);
    rect.is_valid().then_some(rect)
}

#[derive(Serialize)]
struct Doc<'a> {
    patcher: Patcher<'a>,
}

#[derive(Serialize)]
struct Patcher<'a> {
    fileversion: u32,
    appversion: AppVersion,
    classnamespace: &'static str,
    rect: [f64; 4],
    boxes: Vec<BoxWrap<'a>>,
    lines: Vec<LineWrap<'a>>,
}

#[derive(Serialize)]
struct AppVersion {
    major: u32,
    minor: u32,
    revision: u32,
    architecture: &'static str,
    modernui: u32,
}

#[derive(Serialize)]
struct BoxWrap<'a> {
    #[serde(rename = "box")]
    inner: MaxBox<'a>,
}

#[derive(Serialize)]
struct MaxBox<'a> {
    id: &'a str,
    maxclass: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    numinlets: usize,
    numoutlets: usize,
    patching_rect: [f64; 4],
    #[serde(skip_serializing_if = "Option::is_none")]
    varname: Option<&'a str>,
}

#[derive(Serialize)]
struct LineWrap<'a> {
    patchline: Line<'a>,
}

#[derive(Serialize)]
struct Line<'a> {
    source: (&'a str, usize),
    destination: (&'a str, usize),
}

fn box_text(node: &Node, token: &str) -> String {
    let mut text = token.to_string();
    if let Some(pitch) = note_pitch_label(node.kind, &node.params, node.label.as_deref()) {
        text.push(' ');
        text.push_str(&pitch);
        return text;
    }
    for p in &node.params {
        text.push(' ');
        text.push_str(&p.to_string());
    }
    text
}

/// Serializes a well-formed graph as a `.maxpat` document.
pub fn emit_maxpat(graph: &PatchGraph) -> Result<Vec<u8>, CodecError> {
    let report = validate(graph);
    if !report.well_formed {
        return Err(CodecError::NotWellFormed(report));
    }
    let boxes = graph
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, node)| {
            let object = max_object_for_kind(node.kind);
            let rect = graph
                .layout()
                .and_then(|l| l.get(&node.id).copied())
                .unwrap_or_else(|| grid_rect(i));
            let pitch = note_pitch_label(node.kind, &node.params, node.label.as_deref());
            let varname = if pitch.is_some() { None } else { node.label.as_deref() };
            BoxWrap {
                inner: MaxBox {
                    id: &node.id,
                    maxclass: object.maxclass,
                    text: (object.maxclass == "newobj").then(|| box_text(node, object.token)),
                    numinlets: node.kind.inlet_count(),
                    numoutlets: node.kind.outlet_count(),
                    patching_rect: [rect.x, rect.y, rect.w, rect.h],
                    varname,
                },
            }
        })
        .collect();
    let lines = graph
        .edges()
        .iter()
        .map(|e| LineWrap {
            patchline: Line {
                source: (&e.src.node, e.src.port),
                destination: (&e.dst.node, e.dst.port),
            },
        })
        .collect();
    let doc = Doc {
        patcher: Patcher {
            fileversion: 1,
            appversion: AppVersion {
                major: 8,
                minor: 6,
                revision: 0,
                architecture: "x64",
                modernui: 1,
            },
            classnamespace: "box",
            rect: [100.0, 100.0, 900.0, 600.0],
            boxes,
            lines,
        },
    };
    Ok(to_pretty_bytes(&doc))
}
