use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use crate::category::{Category, Family};
use crate::codec::{emit_maxpat, emit_wavir};
use crate::ir::PatchGraph;
use crate::llm::{extract_code, prompt_for, AssistantConfig, Generation, Generator, HttpBackend, Job, LlmError, ResponseCache};
use crate::render::{compile, judge, render, wav_bytes, JudgeOptions, DEFAULT_DURATION, DEFAULT_SAMPLE_RATE};
use crate::script::sample_seed;

use super::config::{Mode, ResolvedConfig, RunConfig};
use super::ratings::{parse_ratings, RatingRecord};
use super::report::{compute_report, EvalReport};
use super::sample::{check_code, sample_id, Checked, GenerationSample, SampleError, WellFormed};
use super::HarnessError;

pub const RATINGS_FILE: &str = "ratings.jsonl";

/// A run directory loaded back into memory.
#[derive(Debug, Clone)]
pub struct Run {
    pub dir: PathBuf,
    pub id: String,
    pub config: ResolvedConfig,
    pub samples: Vec<GenerationSample>,
    pub ratings: Vec<RatingRecord>,
}

impl Run {
    pub fn report(&self) -> EvalReport {
        compute_report(
            &self.id,
            &self.config.categories,
            &self.config.benchmarks,
            &self.config.raw.k,
            &self.samples,
            &self.ratings,
        )
    }

    pub fn sample(&self, id: &str) -> Option<&GenerationSample> {
        self.samples.iter().find(|s| s.id == id)
    }

    pub fn sample_dir(&self, sample: &GenerationSample) -> PathBuf {
        sample_dir(&self.dir, sample)
    }
}

pub fn sample_dir(run_dir: &Path, s: &GenerationSample) -> PathBuf {
    run_dir
        .join("samples")
        .join(s.category.id())
        .join(s.benchmark.id())
        .join(s.index.to_string())
}

fn run_id_of(dir: &Path) -> String {
    dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Builds the generator the config asks for: replay reads the cache only,
/// live talks to the endpoint from the environment.
pub fn generator_for(config: &ResolvedConfig) -> Result<Generator, HarnessError> {
    let cache = ResponseCache::open(&config.cache_dir)?;
    Ok(match config.raw.mode {
        Mode::Replay => Generator::replay(cache),
        Mode::Live => Generator::live(Arc::new(HttpBackend::from_env()?), cache, config.raw.workers),
    })
}

struct Planned {
    category: Category,
    benchmark: crate::benchmark::Benchmark,
    index: usize,
    seed: u64,
}

fn plan(config: &ResolvedConfig) -> Vec<Planned> {
    let mut out = Vec::new();
    for &category in &config.categories {
        for &benchmark in &config.benchmarks {
            for index in 0..config.raw.n {
                let seed = sample_seed(&format!("{}:{}", config.raw.seed, category), benchmark.id(), index);
                out.push(Planned {
                    category,
                    benchmark,
                    index,
                    seed,
                });
            }
        }
    }
    out
}

fn patch_bytes(category: Category, graph: &PatchGraph) -> Option<Vec<u8>> {
    match category.family() {
        Family::Max => emit_maxpat(graph).ok(),
        Family::Web => emit_wavir(graph).ok(),
    }
}

struct Artifacts {
    patch: Option<Vec<u8>>,
    wav: Option<Vec<u8>>,
}

fn evaluate(config: &ResolvedConfig, p: &Planned, generated: Result<Generation, LlmError>) -> (GenerationSample, Artifacts) {
    let mut s = GenerationSample {
        id: sample_id(p.category, p.benchmark, p.index),
        category: p.category,
        benchmark: p.benchmark,
        index: p.index,
        seed: p.seed,
        wellformed: WellFormed::Unchecked,
        node_count: None,
        verdict: None,
        provenance: None,
        extraction: None,
        error: None,
        raw_response: String::new(),
        extracted_code: String::new(),
    };
    let mut art = Artifacts { patch: None, wav: None };
    let g = match generated {
        Ok(g) => g,
        Err(e) => {
            s.error = Some(SampleError::new("generate", e.code(), e.to_string()));
            return (s, art);
        }
    };
    let x = extract_code(&g.text);
    s.raw_response = g.text;
    s.provenance = Some(g.provenance);
    s.extraction = Some(x.method);
    s.extracted_code = x.code;
    let graph = match check_code(p.category, &s.extracted_code, p.seed, config.runner_template(p.category)) {
        Checked::Ok(graph) => graph,
        Checked::Failed(e) => {
            s.wellformed = WellFormed::No;
            s.error = Some(e);
            return (s, art);
        }
        Checked::Skipped(e) => {
            s.error = Some(e);
            return (s, art);
        }
    };
    s.wellformed = WellFormed::Yes;
    s.node_count = Some(graph.node_count());
    art.patch = patch_bytes(p.category, &graph);
    let rendered = compile(&graph).and_then(|prog| render(&prog.with_noise_seed(p.seed), DEFAULT_DURATION, DEFAULT_SAMPLE_RATE));
    match rendered {
        Ok(buf) => {
            s.verdict = Some(judge(p.benchmark, &buf, &graph, JudgeOptions::default()));
            art.wav = Some(wav_bytes(&buf));
        }
        Err(e) => s.error = Some(SampleError::new("render", e.code(), e.to_string())),
    }
    (s, art)
}

fn write_sample(run_dir: &Path, s: &GenerationSample, art: &Artifacts) -> std::io::Result<()> {
    let dir = sample_dir(run_dir, s);
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("raw.txt"), &s.raw_response)?;
    std::fs::write(dir.join("code.txt"), &s.extracted_code)?;
    if let Some(p) = &art.patch {
        std::fs::write(dir.join("patch.json"), p)?;
    }
    if let Some(w) = &art.wav {
        std::fs::write(dir.join("render.wav"), w)?;
    }
    let mut meta = serde_json::to_string_pretty(s).expect("sample serializes");
    meta.push('\n');
    std::fs::write(dir.join("meta.json"), meta)
}

pub fn write_report(run_dir: &Path, report: &EvalReport) -> std::io::Result<()> {
    std::fs::write(run_dir.join("report.json"), report.to_json())?;
    std::fs::write(run_dir.join("report.md"), report.to_markdown())?;
    std::fs::write(run_dir.join("report.csv"), report.to_csv())
}

/// Generates, checks, renders and judges every sample, persisting each
/// under `run_dir`. Per-sample failures are recorded on the sample; only
/// config and I/O problems abort.
pub fn run_experiment(config: &ResolvedConfig, run_dir: &Path, generator: &Generator) -> Result<Run, HarnessError> {
    if run_dir.join("config.json").exists() {
        return Err(HarnessError::RunExists(run_dir.to_path_buf()));
    }
    std::fs::create_dir_all(run_dir)?;
    std::fs::write(run_dir.join("config.json"), config.raw.to_json())?;
    std::fs::write(run_dir.join(RATINGS_FILE), "")?;

    let planned = plan(config);
    let assistants: Vec<(Category, Arc<AssistantConfig>)> = config
        .categories
        .iter()
        .map(|&c| (c, Arc::new(AssistantConfig::for_category(c, config.model.clone()))))
        .collect();
    let jobs: Vec<Job> = planned
        .iter()
        .map(|p| Job {
            config: assistants.iter().find(|(c, _)| *c == p.category).expect("planned category").1.clone(),
            prompt: prompt_for(p.category, p.benchmark, p.category.is_rich()),
            index: p.index,
        })
        .collect();
    let generated = generator.generate_many(&jobs);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.raw.workers)
        .build()
        .map_err(|e| HarnessError::Io(e.to_string()))?;
    let samples = pool.install(|| {
        planned
            .par_iter()
            .zip(generated.into_par_iter())
            .map(|(p, g)| {
                let (s, art) = evaluate(config, p, g);
                write_sample(run_dir, &s, &art)?;
                Ok(s)
            })
            .collect::<Result<Vec<_>, std::io::Error>>()
    })?;

    let run = Run {
        dir: run_dir.to_path_buf(),
        id: run_id_of(run_dir),
        config: config.clone(),
        samples,
        ratings: Vec::new(),
    };
    write_report(run_dir, &run.report())?;
    Ok(run)
}

/// Reads a run directory back, including ratings.
pub fn load_run(run_dir: &Path) -> Result<Run, HarnessError> {
    let text = std::fs::read_to_string(run_dir.join("config.json"))
        .map_err(|e| HarnessError::Corrupt(format!("{}: {e}", run_dir.join("config.json").display())))?;
    let raw = RunConfig::from_json(&text)?;
    let config = raw.resolve(run_dir)?;
    let mut samples = Vec::new();
    for p in plan(&config) {
        let dir = run_dir
            .join("samples")
            .join(p.category.id())
            .join(p.benchmark.id())
            .join(p.index.to_string());
        let meta = std::fs::read_to_string(dir.join("meta.json"))
            .map_err(|e| HarnessError::Corrupt(format!("{}: {e}", dir.display())))?;
        let mut s: GenerationSample =
            serde_json::from_str(&meta).map_err(|e| HarnessError::Corrupt(format!("{}: {e}", dir.display())))?;
        s.raw_response = std::fs::read_to_string(dir.join("raw.txt")).unwrap_or_default();
        s.extracted_code = std::fs::read_to_string(dir.join("code.txt")).unwrap_or_default();
        samples.push(s);
    }
    let ratings = match std::fs::read_to_string(run_dir.join(RATINGS_FILE)) {
        Ok(t) => parse_ratings(&t)?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    Ok(Run {
        dir: run_dir.to_path_buf(),
        id: run_id_of(run_dir),
        config,
        samples,
        ratings,
    })
}

/// Recomputes the report from disk, merging ratings, and rewrites the
/// report files.
pub fn refresh_report(run_dir: &Path) -> Result<EvalReport, HarnessError> {
    let report = load_run(run_dir)?.report();
    write_report(run_dir, &report)?;
    Ok(report)
}
