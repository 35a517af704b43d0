use serde::{Deserialize, Serialize};

use crate::benchmark::Benchmark;
use crate::category::{Category, Dialect, Route};
use crate::codec::{parse_maxpat, parse_wavir};
use crate::ir::{validate, PatchGraph};
use crate::llm::{ExtractionMethod, Provenance};
use crate::render::Verdict;
use crate::script::{run_external, run_source, DEFAULT_TIMEOUT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WellFormed {
    Yes,
    No,
    Unchecked,
}

/// Why a sample did not produce a judged patch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleError {
    pub stage: String,
    pub code: String,
    pub message: String,
}

impl SampleError {
    pub fn new(stage: &str, code: &str, message: impl Into<String>) -> Self {
        SampleError {
            stage: stage.to_string(),
            code: code.to_string(),
            message: message.into(),
        }
    }
}

/// One generated sample and everything learned about it. The raw response
/// and extracted code live in `raw.txt` and `code.txt`, not in `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSample {
    pub id: String,
    pub category: Category,
    pub benchmark: Benchmark,
    pub index: usize,
    pub seed: u64,
    pub wellformed: WellFormed,
    pub node_count: Option<usize>,
    pub verdict: Option<Verdict>,
    pub provenance: Option<Provenance>,
    pub extraction: Option<ExtractionMethod>,
    pub error: Option<SampleError>,
    #[serde(skip)]
    pub raw_response: String,
    #[serde(skip)]
    pub extracted_code: String,
}

impl GenerationSample {
    pub fn is_well_formed(&self) -> bool {
        self.wellformed == WellFormed::Yes
    }
}

pub fn sample_id(category: Category, benchmark: Benchmark, index: usize) -> String {
    format!("{category}:{benchmark}:{index}")
}

pub fn parse_sample_id(id: &str) -> Option<(Category, Benchmark, usize)> {
    let mut parts = id.split(':');
    let c = parts.next()?.parse().ok()?;
    let b = parts.next()?.parse().ok()?;
    let i = parts.next()?.parse().ok()?;
    parts.next().is_none().then_some((c, b, i))
}

/// Outcome of turning extracted code into a patch.
#[derive(Debug)]
pub enum Checked {
    Ok(PatchGraph),
    Failed(SampleError),
    /// No way to check this category here, e.g. a missing runner.
    Skipped(SampleError),
}

fn validated(graph: PatchGraph) -> Checked {
    let report = validate(&graph);
    if report.well_formed {
        Checked::Ok(graph)
    } else {
        let code = report.violations.first().map(|v| v.code.as_str()).unwrap_or("not-well-formed");
        Checked::Failed(SampleError::new("validate", code, report.to_string()))
    }
}

fn parse_dialect(dialect: Dialect, bytes: &[u8]) -> Checked {
    let parsed = match dialect {
        Dialect::Maxpat => parse_maxpat(bytes),
        Dialect::Wavir => parse_wavir(bytes),
    };
    match parsed {
        Ok(g) => validated(g),
        Err(e) => Checked::Failed(SampleError::new("parse", e.code(), e.to_string())),
    }
}

fn extension(category: Category) -> &'static str {
    match category.base() {
        Category::Maxpy => "py",
        Category::Webaudio => "js",
        _ => "txt",
    }
}

/// Runs the category's well-formedness route on `code`.
pub fn check_code(category: Category, code: &str, seed: u64, runner_template: Option<&str>) -> Checked {
    match category.route() {
        Route::Maxpat => parse_dialect(Dialect::Maxpat, code.as_bytes()),
        Route::Wavir => parse_dialect(Dialect::Wavir, code.as_bytes()),
        Route::Script => match run_source(code, seed) {
            Ok(g) => validated(g),
            Err(e) => Checked::Failed(SampleError::new("script", e.code(), e.to_string())),
        },
        Route::External(dialect) => {
            let Some(template) = runner_template else {
                return Checked::Skipped(SampleError::new(
                    "runner",
                    "no-runner",
                    format!("no runner template for {category}"),
                ));
            };
            run_with_runner(template, category, code, dialect)
        }
    }
}

fn run_with_runner(template: &str, category: Category, code: &str, dialect: Dialect) -> Checked {
    let io = |e: std::io::Error| Checked::Skipped(SampleError::new("runner", "io-error", e.to_string()));
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return io(e),
    };
    let file = dir.path().join(format!("sample.{}", extension(category)));
    if let Err(e) = std::fs::write(&file, code) {
        return io(e);
    }
    let out = match run_external(template, &file, DEFAULT_TIMEOUT) {
        Ok(o) => o,
        Err(e) => return Checked::Failed(SampleError::new("runner", e.code(), e.to_string())),
    };
    match out.read() {
        Ok(bytes) => parse_dialect(dialect, &bytes),
        Err(e) => io(e),
    }
}
