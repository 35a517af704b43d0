//! JSON patch dialects: a `.maxpat` subset that carries layout and the
//! layout-free `wavir/1` encoding.
//!
//! Emission is byte-deterministic: fixed key order, two-space indentation,
//! LF line endings and a trailing newline.

mod maxpat;
mod wavir;

use serde::Serialize;

use crate::ir::{pitch_to_hz, NodeKind, ValidationReport};

pub use maxpat::{emit_maxpat, grid_rect, parse_maxpat};
pub use wavir::{emit_wavir, parse_wavir, WAVIR_FORMAT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodecError {
    #[error("malformed json: {0}")]
    MalformedJson(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unknown object: {0}")]
    UnknownObject(String),
    #[error("bad connection: {0}")]
    BadConnection(String),
    #[error("graph is not well-formed: {0}")]
    NotWellFormed(ValidationReport),
}

impl CodecError {
    pub fn code(&self) -> &'static str {
        match self {
            CodecError::MalformedJson(_) => "malformed-json",
            CodecError::Schema(_) => "schema-error",
            CodecError::UnknownObject(_) => "unknown-object",
            CodecError::BadConnection(_) => "bad-connection",
            CodecError::NotWellFormed(_) => "not-well-formed",
        }
    }
}

/// A raw argument as it appears in a document: a number or a word.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Arg {
    Number(f64),
    Word(String),
}

impl Arg {
    pub(crate) fn from_token(token: &str) -> Arg {
        match token.parse::<f64>() {
            Ok(v) => Arg::Number(v),
            Err(_) => Arg::Word(token.to_string()),
        }
    }
}

/// Turns document arguments into a checked parameter list. Missing trailing
/// arguments take the kind's defaults; pitch names are accepted where a
/// frequency is expected. For `note` nodes the pitch name is returned so it
/// can become the node label.
pub(crate) fn resolve_params(kind: NodeKind, args: &[Arg]) -> Result<(Vec<f64>, Option<String>), CodecError> {
    let defs = kind.params();
    if args.len() > defs.len() {
        return Err(CodecError::Schema(format!(
            "{} takes at most {} argument(s), got {}",
            kind.tag(),
            defs.len(),
            args.len()
        )));
    }
    let mut params = Vec::with_capacity(defs.len());
    let mut pitch = None;
    for (i, def) in defs.iter().enumerate() {
        let value = match args.get(i) {
            Some(Arg::Number(v)) => *v,
            Some(Arg::Word(w)) if def.accepts_pitch => {
                let hz = pitch_to_hz(w).ok_or_else(|| {
                    CodecError::Schema(format!("`{w}` is neither a number nor a pitch name"))
                })?;
                if kind == NodeKind::Note {
                    pitch = Some(w.clone());
                }
                hz
            }
            Some(Arg::Word(w)) => {
                return Err(CodecError::Schema(format!("`{w}` is not a number")));
            }
            None => def.default.ok_or_else(|| {
                CodecError::Schema(format!("{} requires a {} argument", kind.tag(), def.name))
            })?,
        };
        params.push(value);
    }
    kind.check_params(&params).map_err(CodecError::Schema)?;
    Ok((params, pitch))
}

/// The label to print as a pitch argument for a note node, if its label is
/// a pitch name that resolves exactly to its frequency.
pub(crate) fn note_pitch_label(kind: NodeKind, params: &[f64], label: Option<&str>) -> Option<String> {
    let label = label?;
    (kind == NodeKind::Note && pitch_to_hz(label) == params.first().copied()).then(|| label.to_string())
}

pub(crate) fn to_pretty_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("patch documents always serialize");
    out.push(b'\n');
    out
}

pub(crate) fn parse_json(text: &[u8]) -> Result<serde_json::Value, CodecError> {
    serde_json::from_slice(text).map_err(|e| CodecError::MalformedJson(e.to_string()))
}

pub(crate) fn port_index(v: Option<&serde_json::Value>, what: &str) -> Result<usize, CodecError> {
    v.and_then(serde_json::Value::as_u64)
        .and_then(|p| usize::try_from(p).ok())
        .ok_or_else(|| CodecError::Schema(format!("{what} must be a non-negative integer")))
}
