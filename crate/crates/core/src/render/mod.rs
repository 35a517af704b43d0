//! Offline rendering of patch graphs and the spectral judges built on top.

mod judge;
mod spectrum;
mod wav;

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ir::{topological_order, validate, FilterMode, NodeKind, PatchGraph, ValidationReport, Waveform};

pub use judge::{judge, judge_specific, Evidence, JudgeError, JudgeOptions, Rater, Verdict, VerdictStatus};
pub use spectrum::{spectrum, Peak, Spectrum, SpectrumError, FFT_SIZE};
pub use wav::{read_wav, wav_bytes, write_wav};

pub const DEFAULT_SAMPLE_RATE: u32 = 44_100;
pub const DEFAULT_DURATION: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error("graph is not well-formed: {0}")]
    NotWellFormed(ValidationReport),
    #[error("duration and sample rate must be positive")]
    BadArguments,
}

impl RenderError {
    pub fn code(&self) -> &'static str {
        match self {
            RenderError::NotWellFormed(_) => "not-well-formed",
            RenderError::BadArguments => "bad-arguments",
        }
    }
}

/// Mono PCM in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcmBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl PcmBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        PcmBuffer { samples, sample_rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

#[derive(Debug, Clone)]
struct Step {
    node: usize,
    kind: NodeKind,
    params: Vec<f64>,
    /// Source node indices per inlet.
    inputs: Vec<Vec<usize>>,
}

/// A compiled schedule: nodes in topological order with their inputs
/// resolved to indices. Dac inlets only listen to nodes that some oscillator
/// or noise source reaches, so a constant wired straight to a dac stays
/// silent.
#[derive(Debug, Clone)]
pub struct SignalProgram {
    steps: Vec<Step>,
    node_count: usize,
    noise_seed: u64,
}

impl SignalProgram {
    /// Node indices in evaluation order.
    pub fn order(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.node).collect()
    }

    pub fn noise_seed(&self) -> u64 {
        self.noise_seed
    }

    pub fn with_noise_seed(mut self, seed: u64) -> Self {
        self.noise_seed = seed;
        self
    }
}

pub fn compile(graph: &PatchGraph) -> Result<SignalProgram, RenderError> {
    let report = validate(graph);
    if !report.well_formed {
        return Err(RenderError::NotWellFormed(report));
    }
    let order = topological_order(graph).expect("validated graphs are acyclic");
    let nodes = graph.nodes();
    let mut inputs: Vec<Vec<Vec<usize>>> = nodes.iter().map(|n| vec![Vec::new(); n.kind.inlet_count()]).collect();
    for e in graph.edges() {
        let s = graph.node_index(&e.src.node).expect("validated");
        let d = graph.node_index(&e.dst.node).expect("validated");
        inputs[d][e.dst.port].push(s);
    }
    let mut audible = vec![false; nodes.len()];
    for &i in &order {
        audible[i] = nodes[i].kind.is_sound_source() || inputs[i].iter().flatten().any(|&s| audible[s]);
    }
    let steps = order
        .iter()
        .map(|&i| {
            let mut ins = std::mem::take(&mut inputs[i]);
            if nodes[i].kind == NodeKind::Dac {
                for inlet in &mut ins {
                    inlet.retain(|&s| audible[s]);
                }
            }
            Step {
                node: i,
                kind: nodes[i].kind,
                params: nodes[i].params.clone(),
                inputs: ins,
            }
        })
        .collect();
    Ok(SignalProgram {
        steps,
        node_count: nodes.len(),
        noise_seed: 0,
    })
}

/// RBJ cookbook biquad, direct form I.
#[derive(Debug, Clone, Default)]
pub(crate) struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
    key: (f64, f64),
}

impl Biquad {
    pub(crate) fn set(&mut self, mode: FilterMode, cutoff: f64, q: f64, sample_rate: f64) {
        let cutoff = if cutoff.is_finite() { cutoff.clamp(1.0, 0.499 * sample_rate) } else { 1.0 };
        let q = if q.is_finite() { q.max(1e-3) } else { 1e-3 };
        if self.key == (cutoff, q) {
            return;
        }
        self.key = (cutoff, q);
        let w0 = TAU * cutoff / sample_rate;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let (b0, b1, b2) = match mode {
            FilterMode::Lowpass => ((1.0 - cos) / 2.0, 1.0 - cos, (1.0 - cos) / 2.0),
            FilterMode::Highpass => ((1.0 + cos) / 2.0, -(1.0 + cos), (1.0 + cos) / 2.0),
            FilterMode::Bandpass => (alpha, 0.0, -alpha),
        };
        let a0 = 1.0 + alpha;
        self.b0 = b0 / a0;
        self.b1 = b1 / a0;
        self.b2 = b2 / a0;
        self.a1 = -2.0 * cos / a0;
        self.a2 = (1.0 - alpha) / a0;
    }

    pub(crate) fn process(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.b1 * self.x1 + self.b2 * self.x2 - self.a1 * self.y1 - self.a2 * self.y2;
        if !y.is_finite() {
            self.x1 = 0.0;
            self.x2 = 0.0;
            self.y1 = 0.0;
            self.y2 = 0.0;
            return 0.0;
        }
        self.x2 = self.x1;
        self.x1 = x;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }

    /// Magnitude response at `freq`.
    #[cfg(test)]
    pub(crate) fn magnitude(&self, freq: f64, sample_rate: f64) -> f64 {
        let w = TAU * freq / sample_rate;
        let z1 = (w.cos(), -w.sin());
        let z2 = ((2.0 * w).cos(), -(2.0 * w).sin());
        let num = (self.b0 + self.b1 * z1.0 + self.b2 * z2.0, self.b1 * z1.1 + self.b2 * z2.1);
        let den = (1.0 + self.a1 * z1.0 + self.a2 * z2.0, self.a1 * z1.1 + self.a2 * z2.1);
        (num.0.hypot(num.1)) / (den.0.hypot(den.1))
    }
}

enum State {
    None,
    Phase(f64),
    Noise(Box<ChaCha8Rng>),
    Filter(Biquad),
}

fn waveform(w: Waveform, phase: f64) -> f64 {
    match w {
        Waveform::Sine => (TAU * phase).sin(),
        Waveform::Square => {
            if phase < 0.5 {
                1.0
            } else {
                -1.0
            }
        }
        Waveform::Saw => 2.0 * phase - 1.0,
        Waveform::Triangle => 1.0 - 4.0 * (phase - 0.5).abs(),
    }
}

fn sum(values: &[f64], from: &[usize]) -> f64 {
    from.iter().map(|&s| values[s]).sum()
}

/// Renders `duration` seconds. The result has `round(rate × duration)`
/// samples, every one finite and clipped to `[-1, 1]`.
pub fn render(program: &SignalProgram, duration: f64, sample_rate: u32) -> Result<PcmBuffer, RenderError> {
    if !duration.is_finite() || duration <= 0.0 || sample_rate == 0 {
        return Err(RenderError::BadArguments);
    }
    let sr = sample_rate as f64;
    let len = (sr * duration).round() as usize;
    let mut states: Vec<State> = program
        .steps
        .iter()
        .map(|s| match s.kind {
            NodeKind::Osc(_) => State::Phase(0.0),
            NodeKind::Noise => State::Noise(Box::new(ChaCha8Rng::seed_from_u64(
                program.noise_seed ^ (s.node as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            ))),
            NodeKind::Filter(mode) => {
                let mut f = Biquad::default();
                f.set(mode, s.params[0], s.params[1], sr);
                State::Filter(f)
            }
            _ => State::None,
        })
        .collect();
    let mut values = vec![0.0f64; program.node_count];
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let mut master = 0.0;
        for (step, state) in program.steps.iter().zip(states.iter_mut()) {
            let v = match (step.kind, state) {
                (NodeKind::Osc(w), State::Phase(phase)) => {
                    let v = waveform(w, *phase);
                    let freq = step.params[0] + sum(&values, &step.inputs[0]);
                    let next = *phase + freq / sr;
                    *phase = if next.is_finite() { next.rem_euclid(1.0) } else { 0.0 };
                    v
                }
                (NodeKind::Noise, State::Noise(rng)) => rng.random_range(-1.0..1.0),
                (NodeKind::Gain, _) => {
                    let x = sum(&values, &step.inputs[0]);
                    let factor = if step.inputs[1].is_empty() {
                        step.params[0]
                    } else {
                        sum(&values, &step.inputs[1])
                    };
                    x * factor
                }
                (NodeKind::Filter(mode), State::Filter(f)) => {
                    if !step.inputs[1].is_empty() || !step.inputs[2].is_empty() {
                        let cutoff = step.params[0] + sum(&values, &step.inputs[1]);
                        let q = step.params[1] + sum(&values, &step.inputs[2]);
                        f.set(mode, cutoff, q, sr);
                    }
                    f.process(sum(&values, &step.inputs[0]))
                }
                (NodeKind::Const | NodeKind::Note, _) => step.params[0],
                (NodeKind::Dac, _) => {
                    let (l, r) = (&step.inputs[0], &step.inputs[1]);
                    master += match (l.is_empty(), r.is_empty()) {
                        (false, false) => 0.5 * (sum(&values, l) + sum(&values, r)),
                        (false, true) => sum(&values, l),
                        (true, false) => sum(&values, r),
                        (true, true) => 0.0,
                    };
                    0.0
                }
                _ => 0.0,
            };
            values[step.node] = if v.is_finite() { v } else { 0.0 };
        }
        out.push(if master.is_finite() { master.clamp(-1.0, 1.0) } else { 0.0 });
    }
    Ok(PcmBuffer::new(out, sample_rate))
}

/// Compiles and renders at the default rate and length.
pub fn render_graph(graph: &PatchGraph) -> Result<PcmBuffer, RenderError> {
    render(&compile(graph)?, DEFAULT_DURATION, DEFAULT_SAMPLE_RATE)
}

/// `amplitude · sin(2π f t)` sampled at `sample_rate`, for tests and probes.
pub fn sine(freq: f64, amplitude: f64, samples: usize, sample_rate: u32) -> PcmBuffer {
    let sr = sample_rate as f64;
    PcmBuffer::new(
        (0..samples)
            .map(|n| amplitude * (2.0 * PI * freq * n as f64 / sr).sin())
            .collect(),
        sample_rate,
    )
}
