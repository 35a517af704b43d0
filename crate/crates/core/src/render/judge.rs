use std::fmt;

use serde::{Deserialize, Serialize};

use super::spectrum::{spectrum, Peak, Spectrum, FFT_SIZE};
use super::PcmBuffer;
use crate::benchmark::{Benchmark, UnknownBenchmark};
use crate::ir::{FilterMode, NodeKind, PatchGraph};

/// Harmonic matching tolerance for additive patches, wide enough for
/// detuned partials.
const HARMONIC_TOLERANCE_HZ: f64 = 20.0;
const MIN_HARMONIC_PEAKS: usize = 3;
const MIN_ADDITIVE_OSCILLATORS: usize = 3;
const AM_MOD_RANGE_HZ: (f64, f64) = (20.0, 1000.0);
const FM_MIN_MOD_HZ: f64 = 20.0;
const ENVELOPE_HOP_S: f64 = 0.01;
const LFO_PERIOD_RANGE_S: (f64, f64) = (0.05, 10.0);
const MIN_ENVELOPE_ACF: f64 = 0.5;
const MIN_LFO_DEPTH: f64 = 0.1;
const MIN_BROADBAND_FRACTION: f64 = 0.3;
/// −60 dB relative to the strongest bin.
const BROADBAND_FLOOR: f64 = 1e-3;
const MIN_BAND_RATIO: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    Pass,
    Fail,
    NeedsHuman,
}

impl VerdictStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictStatus::Pass => "pass",
            VerdictStatus::Fail => "fail",
            VerdictStatus::NeedsHuman => "needs-human",
        }
    }
}

/// Who produced a verdict. Serialized as `oracle` or `human:<id>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Rater {
    Oracle,
    Human(String),
}

impl fmt::Display for Rater {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rater::Oracle => f.write_str("oracle"),
            Rater::Human(id) => write!(f, "human:{id}"),
        }
    }
}

impl From<Rater> for String {
    fn from(r: Rater) -> String {
        r.to_string()
    }
}

impl TryFrom<String> for Rater {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        if s == "oracle" {
            Ok(Rater::Oracle)
        } else if let Some(id) = s.strip_prefix("human:").filter(|id| !id.is_empty()) {
            Ok(Rater::Human(id.to_string()))
        } else {
            Err(format!("bad rater `{s}`"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub check: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Evidence {
    fn at_least(check: impl Into<String>, measured: f64, threshold: f64) -> Evidence {
        Evidence::new(check, measured, threshold, measured >= threshold)
    }

    fn at_most(check: impl Into<String>, measured: f64, threshold: f64) -> Evidence {
        Evidence::new(check, measured, threshold, measured <= threshold)
    }

    fn new(check: impl Into<String>, measured: f64, threshold: f64, passed: bool) -> Evidence {
        let finite = measured.is_finite();
        Evidence {
            check: check.into(),
            measured: if finite { measured } else { 0.0 },
            threshold,
            passed: passed && finite,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub evidence: Vec<Evidence>,
    pub rater: Rater,
}

impl Verdict {
    fn from_evidence(evidence: Vec<Evidence>) -> Verdict {
        let pass = !evidence.is_empty() && evidence.iter().all(|e| e.passed);
        Verdict {
            status: if pass { VerdictStatus::Pass } else { VerdictStatus::Fail },
            evidence,
            rater: Rater::Oracle,
        }
    }

    pub fn needs_human() -> Verdict {
        Verdict {
            status: VerdictStatus::NeedsHuman,
            evidence: Vec::new(),
            rater: Rater::Oracle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JudgeError {
    #[error(transparent)]
    UnknownBenchmark(#[from] UnknownBenchmark),
}

impl JudgeError {
    pub fn code(&self) -> &'static str {
        "unknown-benchmark"
    }
}

/// Only the additive judge inspects the graph by default. With
/// `structural_all` the AM, FM and LFO judges also require the matching
/// modulation wiring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct JudgeOptions {
    #[serde(default)]
    pub structural_all: bool,
}

pub fn judge_specific(benchmark: &str, buffer: &PcmBuffer, graph: &PatchGraph) -> Result<Verdict, JudgeError> {
    let b: Benchmark = benchmark.parse()?;
    Ok(judge(b, buffer, graph, JudgeOptions::default()))
}

/// Judges a rendered sample. Open-ended benchmarks always need a human.
pub fn judge(benchmark: Benchmark, buffer: &PcmBuffer, graph: &PatchGraph, options: JudgeOptions) -> Verdict {
    if !benchmark.is_specific() {
        return Verdict::needs_human();
    }
    let spec = match spectrum(buffer) {
        Ok(s) => s,
        Err(_) => {
            return Verdict::from_evidence(vec![Evidence::at_least(
                "samples",
                buffer.len() as f64,
                FFT_SIZE as f64,
            )])
        }
    };
    let wiring = Wiring::new(graph);
    let mut evidence = match benchmark {
        Benchmark::Additive => additive(&spec, graph),
        Benchmark::Am => am(&spec),
        Benchmark::Fm => fm(&spec),
        Benchmark::Lfo => lfo(buffer),
        Benchmark::FilteredNoise => filtered_noise(&spec, graph, &wiring),
        _ => unreachable!("creative benchmarks return early"),
    };
    if options.structural_all {
        match benchmark {
            Benchmark::Am => evidence.push(Evidence::at_least("gain-factor-modulated", wiring.am_gains() as f64, 1.0)),
            Benchmark::Fm => {
                evidence.push(Evidence::at_least("osc-frequency-modulated", wiring.fm_oscs() as f64, 1.0))
            }
            Benchmark::Lfo => evidence.push(Evidence::at_least("sub-audio-oscillators", wiring.lfos() as f64, 1.0)),
            _ => {}
        }
    }
    Verdict::from_evidence(evidence)
}

fn by_magnitude(peaks: &[Peak]) -> Vec<&Peak> {
    let mut v: Vec<&Peak> = peaks.iter().collect();
    v.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude).then(a.bin.cmp(&b.bin)));
    v
}

fn find_near(peaks: &[Peak], freq: f64, tol: f64) -> Option<&Peak> {
    peaks
        .iter()
        .filter(|p| (p.freq - freq).abs() <= tol)
        .min_by(|a, b| (a.freq - freq).abs().total_cmp(&(b.freq - freq).abs()))
}

fn additive(spec: &Spectrum, graph: &PatchGraph) -> Vec<Evidence> {
    let peaks = spec.peaks();
    let mut best: Vec<(usize, f64)> = Vec::new();
    for f0 in peaks.iter().map(|p| p.freq).filter(|&f| f > 2.0 * HARMONIC_TOLERANCE_HZ) {
        // closest peak to each harmonic number
        let mut matched: Vec<(usize, f64)> = Vec::new();
        for p in &peaks {
            let k = (p.freq / f0).round();
            let dev = (p.freq - k * f0).abs();
            if k < 1.0 || dev > HARMONIC_TOLERANCE_HZ {
                continue;
            }
            let k = k as usize;
            match matched.iter_mut().find(|(h, _)| *h == k) {
                Some(slot) if dev < slot.1 => slot.1 = dev,
                Some(_) => {}
                None => matched.push((k, dev)),
            }
        }
        if matched.len() > best.len() {
            best = matched;
        }
    }
    let mut evidence: Vec<Evidence> = best
        .iter()
        .map(|&(k, dev)| Evidence::at_most(format!("harmonic-{k}-deviation-hz"), dev, HARMONIC_TOLERANCE_HZ))
        .collect();
    evidence.push(Evidence::at_least("harmonic-peaks", best.len() as f64, MIN_HARMONIC_PEAKS as f64));
    let oscs = graph.count_kind(|k| matches!(k, NodeKind::Osc(_)));
    evidence.push(Evidence::at_least("oscillators", oscs as f64, MIN_ADDITIVE_OSCILLATORS as f64));
    evidence
}

fn am(spec: &Spectrum) -> Vec<Evidence> {
    let peaks = spec.peaks();
    let tol = spec.bin_hz();
    let ordered = by_magnitude(&peaks);
    for carrier in &ordered {
        for lower in ordered.iter().filter(|p| p.freq < carrier.freq) {
            let fm = carrier.freq - lower.freq;
            if fm < AM_MOD_RANGE_HZ.0 || fm > AM_MOD_RANGE_HZ.1 {
                continue;
            }
            if let Some(upper) = find_near(&peaks, carrier.freq + fm, tol) {
                return vec![
                    Evidence::at_least("carrier-hz", carrier.freq, 0.0),
                    Evidence::at_least("modulator-hz", fm, AM_MOD_RANGE_HZ.0),
                    Evidence::at_most("modulator-hz-max", fm, AM_MOD_RANGE_HZ.1),
                    Evidence::at_most("upper-sideband-error-hz", (upper.freq - carrier.freq - fm).abs(), tol),
                ];
            }
        }
    }
    vec![Evidence::at_least("sideband-pairs", 0.0, 1.0)]
}

fn fm(spec: &Spectrum) -> Vec<Evidence> {
    let peaks = spec.peaks();
    let tol = spec.bin_hz();
    let ordered = by_magnitude(&peaks);
    let mut best: Option<Vec<Evidence>> = None;
    for carrier in &ordered {
        for lower in ordered.iter().filter(|p| p.freq < carrier.freq) {
            let fm = carrier.freq - lower.freq;
            if fm < FM_MIN_MOD_HZ {
                continue;
            }
            let mut pairs = 0;
            let mut evidence = vec![Evidence::at_least("modulator-hz", fm, FM_MIN_MOD_HZ)];
            for k in 1..=2 {
                let lo = carrier.freq - k as f64 * fm;
                let hi = carrier.freq + k as f64 * fm;
                if lo <= tol {
                    break;
                }
                match (find_near(&peaks, lo, tol), find_near(&peaks, hi, tol)) {
                    (Some(a), Some(b)) => {
                        pairs += 1;
                        let err = (a.freq - lo).abs().max((b.freq - hi).abs());
                        evidence.push(Evidence::at_most(format!("sideband-pair-{k}-error-hz"), err, tol));
                    }
                    _ => break,
                }
            }
            evidence.push(Evidence::at_least("sideband-pairs", pairs as f64, 2.0));
            if pairs >= 2 {
                return evidence;
            }
            if best.is_none() {
                best = Some(evidence);
            }
        }
    }
    best.unwrap_or_else(|| vec![Evidence::at_least("sideband-pairs", 0.0, 2.0)])
}

/// RMS envelope over 10 ms hops.
pub(crate) fn envelope(buffer: &PcmBuffer) -> Vec<f64> {
    let hop = ((buffer.sample_rate as f64 * ENVELOPE_HOP_S).round() as usize).max(1);
    buffer
        .samples
        .chunks_exact(hop)
        .map(|c| (c.iter().map(|x| x * x).sum::<f64>() / hop as f64).sqrt())
        .collect()
}

/// Mean-removed autocorrelation at `lag`, normalized so a periodic signal
/// scores close to 1 at its period.
pub(crate) fn autocorrelation(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    if lag >= n {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    if var <= 0.0 {
        return 0.0;
    }
    let cov = (0..n - lag).map(|i| (x[i] - mean) * (x[i + lag] - mean)).sum::<f64>() / (n - lag) as f64;
    cov / var
}

fn lfo(buffer: &PcmBuffer) -> Vec<Evidence> {
    let env = envelope(buffer);
    let (lo, hi) = env
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let depth = if hi + lo > 0.0 { (hi - lo) / (hi + lo) } else { 0.0 };
    let min_lag = (LFO_PERIOD_RANGE_S.0 / ENVELOPE_HOP_S).ceil() as usize;
    let max_lag = ((LFO_PERIOD_RANGE_S.1 / ENVELOPE_HOP_S) as usize).min(env.len() * 3 / 4);
    let acf: Vec<f64> = (0..=max_lag + 1).map(|k| autocorrelation(&env, k)).collect();
    let mut best: Option<(usize, f64)> = None;
    for k in min_lag.max(1)..=max_lag {
        if k + 1 >= acf.len() {
            break;
        }
        if acf[k] > acf[k - 1] && acf[k] >= acf[k + 1] && best.is_none_or(|(_, r)| acf[k] > r) {
            best = Some((k, acf[k]));
        }
    }
    let (lag, r) = best.unwrap_or((0, 0.0));
    let period = lag as f64 * ENVELOPE_HOP_S;
    vec![
        Evidence::at_least("envelope-acf-peak", r, MIN_ENVELOPE_ACF),
        Evidence::new(
            "envelope-period-s",
            period,
            LFO_PERIOD_RANGE_S.0,
            (LFO_PERIOD_RANGE_S.0..=LFO_PERIOD_RANGE_S.1).contains(&period),
        ),
        Evidence::at_least("modulation-depth", depth, MIN_LFO_DEPTH),
    ]
}

fn filtered_noise(spec: &Spectrum, graph: &PatchGraph, wiring: &Wiring) -> Vec<Evidence> {
    let max = spec.max();
    let bins = spec.magnitudes.len() - 1;
    let above = spec.magnitudes[1..]
        .iter()
        .filter(|&&m| max > 0.0 && m >= max * BROADBAND_FLOOR)
        .count();
    let mut evidence = vec![Evidence::at_least(
        "broadband-fraction",
        above as f64 / bins as f64,
        MIN_BROADBAND_FRACTION,
    )];
    let Some(filter) = wiring.noise_filter() else {
        evidence.push(Evidence::at_least("filters-on-noise-path", 0.0, 1.0));
        return evidence;
    };
    let node = &graph.nodes()[filter];
    let NodeKind::Filter(mode) = node.kind else { unreachable!("noise_filter returns filters") };
    let fc = node.params[0];
    let nyq = spec.nyquist();
    let ratio = match mode {
        FilterMode::Lowpass => power_ratio(spec, &[(0.0, fc / 2.0)], &[(2.0 * fc, nyq)]),
        FilterMode::Highpass => power_ratio(spec, &[(2.0 * fc, nyq)], &[(0.0, fc / 2.0)]),
        FilterMode::Bandpass => power_ratio(
            spec,
            &[(fc / std::f64::consts::SQRT_2, fc * std::f64::consts::SQRT_2)],
            &[(0.0, fc / 4.0), (4.0 * fc, nyq)],
        ),
    };
    evidence.push(Evidence::at_least(format!("{}-band-ratio", mode_name(mode)), ratio, MIN_BAND_RATIO));
    evidence
}

fn mode_name(mode: FilterMode) -> &'static str {
    match mode {
        FilterMode::Lowpass => "lowpass",
        FilterMode::Highpass => "highpass",
        FilterMode::Bandpass => "bandpass",
    }
}

/// Ratio of mean bin power in `pass` to mean bin power in `stop`. Zero when
/// either band holds no bins.
fn power_ratio(spec: &Spectrum, pass: &[(f64, f64)], stop: &[(f64, f64)]) -> f64 {
    let mean = |bands: &[(f64, f64)]| {
        let (mut total, mut count) = (0.0, 0usize);
        for &(lo, hi) in bands {
            let (a, b) = (spec.bin_of(lo).max(1), spec.bin_of(hi));
            for k in a..=b.min(spec.magnitudes.len() - 1) {
                let f = k as f64 * spec.bin_hz();
                if f > lo.max(0.0) - 1e-9 && f <= hi {
                    total += spec.magnitudes[k].powi(2);
                    count += 1;
                }
            }
        }
        (count > 0).then(|| total / count as f64)
    };
    match (mean(pass), mean(stop)) {
        (Some(p), Some(s)) if s > 0.0 => p / s,
        (Some(p), Some(_)) if p > 0.0 => f64::INFINITY,
        _ => 0.0,
    }
}

/// Reachability facts about a graph used by the structural checks.
struct Wiring<'a> {
    graph: &'a PatchGraph,
    inputs: Vec<Vec<Vec<usize>>>,
    from_source: Vec<bool>,
    to_dac: Vec<bool>,
}

impl<'a> Wiring<'a> {
    fn new(graph: &'a PatchGraph) -> Self {
        let nodes = graph.nodes();
        let n = nodes.len();
        let mut inputs: Vec<Vec<Vec<usize>>> = nodes.iter().map(|x| vec![Vec::new(); x.kind.inlet_count()]).collect();
        let mut succ = vec![Vec::new(); n];
        for e in graph.edges() {
            if let (Some(s), Some(d)) = (graph.node_index(&e.src.node), graph.node_index(&e.dst.node)) {
                if let Some(slot) = inputs[d].get_mut(e.dst.port) {
                    slot.push(s);
                }
                succ[s].push(d);
            }
        }
        let reach = |starts: Vec<usize>, next: &dyn Fn(usize) -> Vec<usize>| {
            let mut seen = vec![false; n];
            let mut stack = starts;
            while let Some(i) = stack.pop() {
                if !seen[i] {
                    seen[i] = true;
                    stack.extend(next(i));
                }
            }
            seen
        };
        let sources = (0..n).filter(|&i| nodes[i].kind.is_sound_source()).collect();
        let from_source = reach(sources, &|i| succ[i].clone());
        let dacs = (0..n).filter(|&i| nodes[i].kind == NodeKind::Dac).collect();
        let to_dac = reach(dacs, &|i| inputs[i].iter().flatten().copied().collect());
        Wiring {
            graph,
            inputs,
            from_source,
            to_dac,
        }
    }

    fn fed(&self, node: usize, inlet: usize) -> bool {
        self.inputs[node][inlet].iter().any(|&s| self.from_source[s])
    }

    fn audible(&self, node: usize) -> bool {
        self.from_source[node] && self.to_dac[node]
    }

    fn am_gains(&self) -> usize {
        (0..self.inputs.len())
            .filter(|&i| self.graph.nodes()[i].kind == NodeKind::Gain && self.fed(i, 0) && self.fed(i, 1) && self.audible(i))
            .count()
    }

    fn fm_oscs(&self) -> usize {
        (0..self.inputs.len())
            .filter(|&i| matches!(self.graph.nodes()[i].kind, NodeKind::Osc(_)) && self.fed(i, 0) && self.audible(i))
            .count()
    }

    fn lfos(&self) -> usize {
        self.graph
            .nodes()
            .iter()
            .enumerate()
            .filter(|(i, n)| matches!(n.kind, NodeKind::Osc(_)) && n.params[0] < 20.0 && self.audible(*i))
            .count()
    }

    /// First filter in node order that noise reaches and that reaches a dac.
    fn noise_filter(&self) -> Option<usize> {
        let nodes = self.graph.nodes();
        let noise: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].kind == NodeKind::Noise).collect();
        let mut from_noise = vec![false; nodes.len()];
        let mut stack = noise;
        while let Some(i) = stack.pop() {
            if from_noise[i] {
                continue;
            }
            from_noise[i] = true;
            for e in self.graph.edges() {
                if self.graph.node_index(&e.src.node) == Some(i) {
                    if let Some(d) = self.graph.node_index(&e.dst.node) {
                        stack.push(d);
                    }
                }
            }
        }
        (0..nodes.len()).find(|&i| matches!(nodes[i].kind, NodeKind::Filter(_)) && from_noise[i] && self.to_dac[i])
    }
}
