//! Reference patches used by tests, the acceptance suite and the CLI demos.
//!
//! The additive patch mirrors the classic four-partial MaxPy example: a 440 Hz
//! fundamental, partials at 880/1320/1760 Hz, a `*~ 0.2` mix and an `ezdac~`
//! fed on both channels.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ir::{
    build, pitch_to_hz, Edge, GraphBuilder, NodeKind, NodeSpec, ParamRule, PatchGraph, PortRef, Rect,
    Waveform, ALL_KINDS,
};

fn e(a: usize, o: usize, b: usize, i: usize) -> Edge {
    Edge::new(
        PortRef::new(format!("obj-{a}"), o),
        PortRef::new(format!("obj-{b}"), i),
    )
}

fn n(kind: &str, params: &[f64]) -> NodeSpec {
    NodeSpec::new(kind, params.to_vec())
}

fn make(nodes: &[NodeSpec], edges: &[Edge]) -> PatchGraph {
    build(nodes, edges).expect("fixture builds")
}

/// `osc 440 -> dac`.
pub fn beeper() -> PatchGraph {
    make(&[n("osc", &[440.0]), n("dac", &[])], &[e(1, 0, 2, 0)])
}

/// Four summed sines through `*~ 0.2` into both dac channels.
pub fn additive() -> PatchGraph {
    make(
        &[
            n("osc", &[440.0]),
            n("osc", &[880.0]),
            n("osc", &[1320.0]),
            n("osc", &[1760.0]),
            n("gain", &[0.2]),
            n("dac", &[]),
        ],
        &[
            e(1, 0, 5, 0),
            e(2, 0, 5, 0),
            e(3, 0, 5, 0),
            e(4, 0, 5, 0),
            e(5, 0, 6, 1),
            e(5, 0, 6, 0),
        ],
    )
}

/// Ring modulation: 110 Hz straight into the factor inlet of a gain carrying
/// 440 Hz.
pub fn ring_mod() -> PatchGraph {
    make(
        &[
            n("osc", &[110.0]),
            n("osc", &[440.0]),
            n("gain", &[0.0]),
            n("dac", &[]),
        ],
        &[e(1, 0, 3, 1), e(2, 0, 3, 0), e(3, 0, 4, 0)],
    )
}

/// Amplitude modulation with a DC offset so the carrier survives:
/// factor = 1 + 0.5 sin(2π·110 t), carrier 440 Hz.
pub fn am() -> PatchGraph {
    make(
        &[
            n("osc", &[440.0]),
            n("osc", &[110.0]),
            n("gain", &[0.5]),
            n("const", &[1.0]),
            n("gain", &[0.0]),
            n("gain", &[0.4]),
            n("dac", &[]),
        ],
        &[
            e(2, 0, 3, 0),
            e(3, 0, 5, 1),
            e(4, 0, 5, 1),
            e(1, 0, 5, 0),
            e(5, 0, 6, 0),
            e(6, 0, 7, 0),
        ],
    )
}

/// Frequency modulation: 110 Hz modulator scaled to ±220 Hz deviation into
/// the frequency inlet of a 440 Hz carrier (index 2).
pub fn fm() -> PatchGraph {
    make(
        &[
            n("osc", &[110.0]),
            n("gain", &[220.0]),
            n("osc", &[440.0]),
            n("gain", &[0.5]),
            n("dac", &[]),
        ],
        &[e(1, 0, 2, 0), e(2, 0, 3, 0), e(3, 0, 4, 0), e(4, 0, 5, 0)],
    )
}

/// 2 Hz tremolo on a 440 Hz tone: gain factor = 0.5 + 0.4 sin(2π·2 t).
pub fn lfo() -> PatchGraph {
    make(
        &[
            n("osc", &[440.0]),
            n("osc", &[2.0]),
            n("gain", &[0.4]),
            n("const", &[0.5]),
            n("gain", &[0.0]),
            n("dac", &[]),
        ],
        &[
            e(2, 0, 3, 0),
            e(3, 0, 5, 1),
            e(4, 0, 5, 1),
            e(1, 0, 5, 0),
            e(5, 0, 6, 0),
        ],
    )
}

/// White noise through a 1 kHz lowpass biquad.
pub fn filtered_noise() -> PatchGraph {
    make(
        &[
            n("noise", &[]),
            n("filter.lowpass", &[1000.0, std::f64::consts::FRAC_1_SQRT_2]),
            n("gain", &[0.5]),
            n("dac", &[]),
        ],
        &[e(1, 0, 2, 0), e(2, 0, 3, 0), e(3, 0, 4, 0)],
    )
}

/// A single 440 Hz sine.
pub fn bare_sine() -> PatchGraph {
    beeper()
}

/// The AM patch with its modulator removed.
pub fn unmodulated_carrier() -> PatchGraph {
    make(
        &[
            n("osc", &[440.0]),
            n("const", &[1.0]),
            n("gain", &[0.0]),
            n("gain", &[0.4]),
            n("dac", &[]),
        ],
        &[e(2, 0, 3, 1), e(1, 0, 3, 0), e(3, 0, 4, 0), e(4, 0, 5, 0)],
    )
}

/// A tone through a fixed gain: no amplitude movement.
pub fn static_gain() -> PatchGraph {
    make(
        &[n("osc", &[440.0]), n("gain", &[0.5]), n("dac", &[])],
        &[e(1, 0, 2, 0), e(2, 0, 3, 0)],
    )
}

pub fn unfiltered_noise() -> PatchGraph {
    make(
        &[n("noise", &[]), n("gain", &[0.5]), n("dac", &[])],
        &[e(1, 0, 2, 0), e(2, 0, 3, 0)],
    )
}

/// Well-formed but silent: the only source is gained to zero.
pub fn silence() -> PatchGraph {
    make(
        &[n("osc", &[440.0]), n("gain", &[0.0]), n("dac", &[])],
        &[e(1, 0, 2, 0), e(2, 0, 3, 0)],
    )
}

/// PatchScript transliteration of the plain MaxPy additive program.
pub const ADDITIVE_SCRIPT: &str = r#"# additive synthesis, four partials
let fundamental = place("cycle~ 440")
let partial1 = place("cycle~ 880")
let partial2 = place("cycle~ 1320")
let partial3 = place("cycle~ 1760")
let mix = place("*~ 0.2")
let ez = place("ezdac~")
connect(fundamental.out[0], mix.in[0])
connect(partial1.out[0], mix.in[0])
connect(partial2.out[0], mix.in[0])
connect(partial3.out[0], mix.in[0])
connect(mix.out[0], ez.in[1])
connect(mix.out[0], ez.in[0])
emit()
"#;

/// PatchScript transliteration of the rich MaxPy additive program: partials
/// placed in a loop with a random detune of up to 15 Hz.
pub const RICH_ADDITIVE_SCRIPT: &str = r#"# rich additive synthesis
let fundamental = 440
let f = place("cycle~", fundamental)
let mix = place("*~ 0.2")
connect(f.out[0], mix.in[0])
for i in 1..4 {
    let partial = place("cycle~", fundamental * (i + 1) + random(-15, 15))
    connect(partial.out[0], mix.in[0])
}
let ez = place("ezdac~")
connect(mix.out[0], ez.in[0])
connect(mix.out[0], ez.in[1])
emit()
"#;

/// Node order: mix is placed before the partials so each can be connected
/// inside the loop, which leaves the partial oscillators at indices 2..5.
pub const RICH_PARTIAL_INDICES: [usize; 3] = [2, 3, 4];

/// Every fixture paired with a short name.
pub fn all() -> Vec<(&'static str, PatchGraph)> {
    vec![
        ("beeper", beeper()),
        ("additive", additive()),
        ("ring-mod", ring_mod()),
        ("am", am()),
        ("fm", fm()),
        ("lfo", lfo()),
        ("filtered-noise", filtered_noise()),
        ("unmodulated-carrier", unmodulated_carrier()),
        ("static-gain", static_gain()),
        ("unfiltered-noise", unfiltered_noise()),
        ("silence", silence()),
    ]
}

/// A seeded random well-formed graph: a mix of every kind, forward-only
/// edges (so no cycles), at least one source wired to a dac, and sometimes
/// labels, pitch-named notes and an explicit layout.
pub fn random_well_formed(seed: u64) -> PatchGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(2..=14usize);
    let mut b = GraphBuilder::new();
    let mut kinds = Vec::with_capacity(count);
    // node 0 is always a source and the last node always a dac
    for i in 0..count {
        let kind = if i == 0 {
            if rng.random_bool(0.8) { NodeKind::Osc(Waveform::Sine) } else { NodeKind::Noise }
        } else if i == count - 1 {
            NodeKind::Dac
        } else {
            ALL_KINDS[rng.random_range(0..ALL_KINDS.len())]
        };
        let params: Vec<f64> = kind
            .params()
            .iter()
            .map(|def| match def.rule {
                ParamRule::Positive => (rng.random_range(20.0..8000.0f64) * 100.0).round() / 100.0,
                ParamRule::Finite => rng.random_range(-2.0..2.0f64),
            })
            .collect();
        let id = format!("n{i}");
        let mut label = None;
        let mut params = params;
        if kind == NodeKind::Note && rng.random_bool(0.5) {
            let name = ["A4", "C3", "F#5", "Bb2"][rng.random_range(0..4)];
            params = vec![pitch_to_hz(name).unwrap()];
            label = Some(name.to_string());
        } else if rng.random_bool(0.2) {
            label = Some(format!("label {i}"));
        }
        b.add_with_id(id, kind, params, label).expect("ids are unique");
        kinds.push(kind);
    }
    let mut seen = std::collections::HashSet::new();
    let mut connect = |b: &mut GraphBuilder, a: usize, o: usize, d: usize, i: usize| {
        if seen.insert((a, o, d, i)) {
            b.connect(PortRef::new(format!("n{a}"), o), PortRef::new(format!("n{d}"), i));
        }
    };
    connect(&mut b, 0, 0, count - 1, 0);
    let extra = rng.random_range(0..count * 2);
    for _ in 0..extra {
        let a = rng.random_range(0..count);
        let d = rng.random_range(0..count);
        if a >= d || kinds[a].outlet_count() == 0 || kinds[d].inlet_count() == 0 {
            continue;
        }
        let inlet = rng.random_range(0..kinds[d].inlet_count());
        connect(&mut b, a, 0, d, inlet);
    }
    let graph = b.finish();
    if rng.random_bool(0.5) {
        let layout: BTreeMap<String, Rect> = graph
            .nodes()
            .iter()
            .map(|n| {
                let rect = Rect::new(
                    rng.random_range(0..800) as f64,
                    rng.random_range(0..600) as f64,
                    rng.random_range(40..200) as f64,
                    22.0,
                );
                (n.id.clone(), rect)
            })
            .collect();
        graph.with_layout(layout)
    } else {
        graph
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::validate;

    #[test]
    fn fixtures_are_well_formed() {
        for (name, g) in all() {
            let r = validate(&g);
            assert!(r.well_formed, "{name}: {r}");
        }
    }

    #[test]
    fn random_graphs_are_well_formed() {
        for seed in 0..300 {
            let g = random_well_formed(seed);
            let r = validate(&g);
            assert!(r.well_formed, "seed {seed}: {r}");
        }
    }

    #[test]
    fn additive_counts() {
        let g = additive();
        assert_eq!(g.node_count(), 6);
        assert_eq!(g.edges().len(), 6);
    }
}
