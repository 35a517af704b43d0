//! Node kinds, their port signatures and parameter rules, plus the table
//! that maps Max object names onto kinds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Waveform {
    Sine,
    Square,
    Saw,
    Triangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterMode {
    Lowpass,
    Highpass,
    Bandpass,
}

/// The closed set of node kinds a patch may contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Osc(Waveform),
    Noise,
    Gain,
    Filter(FilterMode),
    Const,
    Note,
    AdcKey,
    Dac,
    Scope,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortSignature {
    pub inlets: &'static [&'static str],
    pub outlets: &'static [&'static str],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamRule {
    /// Strictly positive and finite.
    Positive,
    Finite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDef {
    pub name: &'static str,
    pub rule: ParamRule,
    /// Value used by the codecs when a document omits a trailing argument.
    pub default: Option<f64>,
    /// Whether a pitch name such as `A4` is accepted in place of a number.
    pub accepts_pitch: bool,
}

const FREQ: ParamDef = ParamDef {
    name: "frequency",
    rule: ParamRule::Positive,
    default: None,
    accepts_pitch: true,
};

const FACTOR: ParamDef = ParamDef {
    name: "factor",
    rule: ParamRule::Finite,
    default: Some(0.0),
    accepts_pitch: false,
};

const CUTOFF: ParamDef = ParamDef {
    name: "cutoff",
    rule: ParamRule::Positive,
    default: None,
    accepts_pitch: true,
};

const Q: ParamDef = ParamDef {
    name: "q",
    rule: ParamRule::Positive,
    default: Some(std::f64::consts::FRAC_1_SQRT_2),
    accepts_pitch: false,
};

const VALUE: ParamDef = ParamDef {
    name: "value",
    rule: ParamRule::Finite,
    default: Some(0.0),
    accepts_pitch: false,
};

pub const ALL_KINDS: [NodeKind; 14] = [
    NodeKind::Osc(Waveform::Sine),
    NodeKind::Osc(Waveform::Square),
    NodeKind::Osc(Waveform::Saw),
    NodeKind::Osc(Waveform::Triangle),
    NodeKind::Noise,
    NodeKind::Gain,
    NodeKind::Filter(FilterMode::Lowpass),
    NodeKind::Filter(FilterMode::Highpass),
    NodeKind::Filter(FilterMode::Bandpass),
    NodeKind::Const,
    NodeKind::Note,
    NodeKind::AdcKey,
    NodeKind::Dac,
    NodeKind::Scope,
];

impl NodeKind {
    pub fn signature(self) -> PortSignature {
        match self {
            NodeKind::Osc(_) => PortSignature {
                inlets: &["freq"],
                outlets: &["signal"],
            },
            NodeKind::Noise => PortSignature {
                inlets: &[],
                outlets: &["signal"],
            },
            NodeKind::Gain => PortSignature {
                inlets: &["signal", "factor"],
                outlets: &["signal"],
            },
            NodeKind::Filter(_) => PortSignature {
                inlets: &["signal", "cutoff", "q"],
                outlets: &["signal"],
            },
            NodeKind::Const | NodeKind::Note | NodeKind::AdcKey => PortSignature {
                inlets: &[],
                outlets: &["value"],
            },
            NodeKind::Dac => PortSignature {
                inlets: &["signal-l", "signal-r"],
                outlets: &[],
            },
            NodeKind::Scope => PortSignature {
                inlets: &["signal"],
                outlets: &[],
            },
        }
    }

    pub fn inlet_count(self) -> usize {
        self.signature().inlets.len()
    }

    pub fn outlet_count(self) -> usize {
        self.signature().outlets.len()
    }

    pub fn params(self) -> &'static [ParamDef] {
        match self {
            NodeKind::Osc(_) | NodeKind::Note => &[FREQ],
            NodeKind::Gain => &[FACTOR],
            NodeKind::Filter(_) => &[CUTOFF, Q],
            NodeKind::Const => &[VALUE],
            NodeKind::Noise | NodeKind::AdcKey | NodeKind::Dac | NodeKind::Scope => &[],
        }
    }

    /// Oscillators and noise: the nodes that make sound on their own.
    pub fn is_sound_source(self) -> bool {
        matches!(self, NodeKind::Osc(_) | NodeKind::Noise)
    }

    /// Visualizers and keyboard inputs are valid but contribute no audio.
    pub fn is_rendering(self) -> bool {
        !matches!(self, NodeKind::Scope | NodeKind::AdcKey)
    }

    /// Canonical tag, e.g. `osc.sine`, `gain`, `filter.lowpass`.
    pub fn tag(self) -> &'static str {
        match self {
            NodeKind::Osc(Waveform::Sine) => "osc.sine",
            NodeKind::Osc(Waveform::Square) => "osc.square",
            NodeKind::Osc(Waveform::Saw) => "osc.saw",
            NodeKind::Osc(Waveform::Triangle) => "osc.triangle",
            NodeKind::Noise => "noise",
            NodeKind::Gain => "gain",
            NodeKind::Filter(FilterMode::Lowpass) => "filter.lowpass",
            NodeKind::Filter(FilterMode::Highpass) => "filter.highpass",
            NodeKind::Filter(FilterMode::Bandpass) => "filter.bandpass",
            NodeKind::Const => "const",
            NodeKind::Note => "note",
            NodeKind::AdcKey => "adc-key",
            NodeKind::Dac => "dac",
            NodeKind::Scope => "scope",
        }
    }

    /// Checks a parameter list against this kind's arity and ranges.
    pub fn check_params(self, params: &[f64]) -> Result<(), String> {
        let defs = self.params();
        if params.len() != defs.len() {
            return Err(format!(
                "{} takes {} parameter(s), got {}",
                self.tag(),
                defs.len(),
                params.len()
            ));
        }
        for (def, &value) in defs.iter().zip(params) {
            let ok = match def.rule {
                ParamRule::Positive => value.is_finite() && value > 0.0,
                ParamRule::Finite => value.is_finite(),
            };
            if !ok {
                let want = match def.rule {
                    ParamRule::Positive => "> 0",
                    ParamRule::Finite => "finite",
                };
                return Err(format!(
                    "{} {} must be {}, got {}",
                    self.tag(),
                    def.name,
                    want,
                    value
                ));
            }
        }
        Ok(())
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown node kind `{0}`")]
pub struct UnknownKind(pub String);

impl FromStr for NodeKind {
    type Err = UnknownKind;

    /// Accepts canonical tags plus the short aliases `osc` (sine) and
    /// `filter` (lowpass).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let kind = match s {
            "osc" => NodeKind::Osc(Waveform::Sine),
            "filter" => NodeKind::Filter(FilterMode::Lowpass),
            other => ALL_KINDS
                .iter()
                .copied()
                .find(|k| k.tag() == other)
                .ok_or_else(|| UnknownKind(s.to_string()))?,
        };
        Ok(kind)
    }
}

impl Serialize for NodeKind {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.tag())
    }
}

impl<'de> Deserialize<'de> for NodeKind {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One row of the Max object mapping table.
#[derive(Debug, Clone, Copy)]
pub struct MaxObject {
    /// `newobj` for text objects, otherwise the UI class name.
    pub maxclass: &'static str,
    /// First token of the box text; empty for UI objects.
    pub token: &'static str,
    pub kind: NodeKind,
}

/// Max objects understood by the codecs and by `place`. The first row for a
/// kind is the one used on emission.
pub static MAX_OBJECTS: &[MaxObject] = &[
    MaxObject { maxclass: "newobj", token: "cycle~", kind: NodeKind::Osc(Waveform::Sine) },
    MaxObject { maxclass: "newobj", token: "rect~", kind: NodeKind::Osc(Waveform::Square) },
    MaxObject { maxclass: "newobj", token: "saw~", kind: NodeKind::Osc(Waveform::Saw) },
    MaxObject { maxclass: "newobj", token: "tri~", kind: NodeKind::Osc(Waveform::Triangle) },
    MaxObject { maxclass: "newobj", token: "noise~", kind: NodeKind::Noise },
    MaxObject { maxclass: "newobj", token: "*~", kind: NodeKind::Gain },
    MaxObject { maxclass: "newobj", token: "lores~", kind: NodeKind::Filter(FilterMode::Lowpass) },
    MaxObject { maxclass: "newobj", token: "hipass~", kind: NodeKind::Filter(FilterMode::Highpass) },
    MaxObject { maxclass: "newobj", token: "bandpass~", kind: NodeKind::Filter(FilterMode::Bandpass) },
    MaxObject { maxclass: "newobj", token: "sig~", kind: NodeKind::Const },
    MaxObject { maxclass: "newobj", token: "note~", kind: NodeKind::Note },
    MaxObject { maxclass: "kslider", token: "", kind: NodeKind::AdcKey },
    MaxObject { maxclass: "ezdac~", token: "", kind: NodeKind::Dac },
    MaxObject { maxclass: "newobj", token: "ezdac~", kind: NodeKind::Dac },
    MaxObject { maxclass: "newobj", token: "dac~", kind: NodeKind::Dac },
    MaxObject { maxclass: "scope~", token: "", kind: NodeKind::Scope },
    MaxObject { maxclass: "spectroscope~", token: "", kind: NodeKind::Scope },
];

pub fn max_object_for_kind(kind: NodeKind) -> &'static MaxObject {
    MAX_OBJECTS
        .iter()
        .find(|o| o.kind == kind)
        .expect("every kind has a Max object")
}

/// Looks up a box by its maxclass and, for `newobj`, its first text token.
pub fn max_object_lookup(maxclass: &str, token: &str) -> Option<&'static MaxObject> {
    if maxclass == "newobj" {
        MAX_OBJECTS
            .iter()
            .find(|o| o.maxclass == "newobj" && o.token == token)
    } else {
        MAX_OBJECTS.iter().find(|o| o.maxclass == maxclass)
    }
}

/// Resolves a kind string as used by `place`: canonical tags, their aliases,
/// or a Max object token like `cycle~`.
pub fn resolve_kind(name: &str) -> Option<NodeKind> {
    name.parse::<NodeKind>()
        .ok()
        .or_else(|| MAX_OBJECTS.iter().find(|o| o.token == name).map(|o| o.kind))
        .or_else(|| MAX_OBJECTS.iter().find(|o| o.maxclass == name).map(|o| o.kind))
}

/// Parses a pitch name such as `A4`, `C#3` or `Bb-1` into Hz
/// (twelve-tone equal temperament, A4 = 440 Hz).
pub fn pitch_to_hz(name: &str) -> Option<f64> {
    let mut chars = name.chars();
    let semitone: i32 = match chars.next()?.to_ascii_uppercase() {
        'C' => 0,
        'D' => 2,
        'E' => 4,
        'F' => 5,
        'G' => 7,
        'A' => 9,
        'B' => 11,
        _ => return None,
    };
    let rest = chars.as_str();
    let (accidental, octave) = if let Some(r) = rest.strip_prefix('#') {
        (1, r)
    } else if let Some(r) = rest.strip_prefix('b') {
        (-1, r)
    } else {
        (0, rest)
    };
    if octave.is_empty() || octave.starts_with('+') {
        return None;
    }
    let octave: i32 = octave.parse().ok()?;
    if !(-1..=9).contains(&octave) {
        return None;
    }
    let midi = 12 * (octave + 1) + semitone + accidental;
    Some(440.0 * 2f64.powf((midi - 69) as f64 / 12.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signatures_are_total() {
        for kind in ALL_KINDS {
            let sig = kind.signature();
            assert!(sig.inlets.len() <= 3 && sig.outlets.len() <= 1, "{kind}");
            assert_eq!(kind.tag().parse::<NodeKind>().unwrap(), kind);
            let _ = max_object_for_kind(kind);
        }
    }

    #[test]
    fn max_tokens_resolve() {
        assert_eq!(resolve_kind("cycle~"), Some(NodeKind::Osc(Waveform::Sine)));
        assert_eq!(resolve_kind("*~"), Some(NodeKind::Gain));
        assert_eq!(resolve_kind("ezdac~"), Some(NodeKind::Dac));
        assert_eq!(resolve_kind("noise~"), Some(NodeKind::Noise));
        assert_eq!(resolve_kind("lores~"), Some(NodeKind::Filter(FilterMode::Lowpass)));
        assert_eq!(resolve_kind("osc"), Some(NodeKind::Osc(Waveform::Sine)));
        assert_eq!(resolve_kind("reverb~"), None);
    }

    #[test]
    fn pitch_names() {
        assert_eq!(pitch_to_hz("A4"), Some(440.0));
        assert!((pitch_to_hz("A5").unwrap() - 880.0).abs() < 1e-9);
        assert!((pitch_to_hz("C4").unwrap() - 261.625_565_300_6).abs() < 1e-6);
        assert!((pitch_to_hz("C#4").unwrap() - pitch_to_hz("Db4").unwrap()).abs() < 1e-9);
        assert_eq!(pitch_to_hz("H4"), None);
        assert_eq!(pitch_to_hz("A"), None);
        assert_eq!(pitch_to_hz("A44"), None);
    }

    #[test]
    fn param_rules() {
        let osc = NodeKind::Osc(Waveform::Sine);
        assert!(osc.check_params(&[440.0]).is_ok());
        assert!(osc.check_params(&[-10.0]).is_err());
        assert!(osc.check_params(&[]).is_err());
        assert!(NodeKind::Gain.check_params(&[-0.5]).is_ok());
        assert!(NodeKind::Gain.check_params(&[f64::NAN]).is_err());
        assert!(NodeKind::Dac.check_params(&[1.0]).is_err());
    }
}
