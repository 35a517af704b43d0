//! Sampling patch code from chat-completions endpoints.
//!
//! Every sample is an independent request whose only messages are the
//! assistant's system prefix (knowledge document plus worked examples) and
//! the user prompt. Responses are stored in a content-addressed cache so a
//! run can be replayed offline.

mod cache;
mod client;
mod extract;
mod generate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::benchmark::Benchmark;
use crate::category::{Category, Family};
use crate::codec::{emit_maxpat, emit_wavir};
use crate::fixtures;

pub use cache::{cache_key, CacheEntry, ResponseCache};
pub use client::{ChatBackend, HttpBackend, RetryPolicy, DEFAULT_BASE_URL};
pub use extract::{extract_code, Extraction, ExtractionMethod};
pub use generate::{Generation, Generator, Job, DEFAULT_WORKERS};

pub const DEFAULT_TEMPERATURE: f64 = 1.0;
pub const DEFAULT_MODEL: &str = "gpt-4o";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LlmError {
    #[error("endpoint returned HTTP {status}")]
    Http { status: u16 },
    #[error("still rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    BadResponse(String),
    #[error("no cached response for key {0}")]
    CacheMiss(String),
    #[error("cache i/o: {0}")]
    Io(String),
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),
    #[error("sample count must be at least 1")]
    NoSamples,
}

impl LlmError {
    pub fn code(&self) -> &'static str {
        match self {
            LlmError::Http { .. } => "http-error",
            LlmError::RateLimited { .. } => "rate-limited",
            LlmError::Transport(_) => "transport-error",
            LlmError::BadResponse(_) => "bad-response",
            LlmError::CacheMiss(_) => "cache-miss",
            LlmError::Io(_) => "io-error",
            LlmError::UnknownCategory(_) => "unknown-category",
            LlmError::UnknownBenchmark(_) => "unknown-benchmark",
            LlmError::NoSamples => "no-samples",
        }
    }
}

impl From<std::io::Error> for LlmError {
    fn from(e: std::io::Error) -> Self {
        LlmError::Io(e.to_string())
    }
}

/// Where a response came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Provenance {
    Live { model: String },
    Replay { key: String },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Live { model } => write!(f, "live:{model}"),
            Provenance::Replay { key } => write!(f, "replay:{key}"),
        }
    }
}

impl From<Provenance> for String {
    fn from(p: Provenance) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for Provenance {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            Some(("live", model)) => Ok(Provenance::Live { model: model.to_string() }),
            Some(("replay", key)) => Ok(Provenance::Replay { key: key.to_string() }),
            _ => Err(format!("bad provenance `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub label: String,
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssistantConfig {
    pub category: Category,
    pub knowledge_document: String,
    pub examples: Vec<Example>,
    pub model: String,
    pub temperature: f64,
}

fn knowledge_document(category: Category) -> &'static str {
    match category.base() {
        Category::JsonMaxpat => include_str!("../../docs/knowledge/json-maxpat.md"),
        Category::JsonWavir => include_str!("../../docs/knowledge/json-wavir.md"),
        Category::Maxpy => include_str!("../../docs/knowledge/maxpy.md"),
        Category::Webaudio => include_str!("../../docs/knowledge/webaudio.md"),
        _ => include_str!("../../docs/knowledge/patchscript.md"),
    }
}

fn example_code(category: Category) -> String {
    let additive = fixtures::additive();
    let bytes = match category.base() {
        Category::JsonMaxpat => emit_maxpat(&additive).expect("fixture is well-formed"),
        Category::JsonWavir => emit_wavir(&additive).expect("fixture is well-formed"),
        Category::Maxpy => include_bytes!("../../docs/examples/additive.py").to_vec(),
        Category::Webaudio => include_bytes!("../../docs/examples/additive.js").to_vec(),
        _ => fixtures::ADDITIVE_SCRIPT.as_bytes().to_vec(),
    };
    String::from_utf8(bytes).expect("examples are UTF-8")
}

impl AssistantConfig {
    /// The shipped knowledge document and worked example for `category`.
    pub fn for_category(category: Category, model: impl Into<String>) -> Self {
        AssistantConfig {
            category,
            knowledge_document: knowledge_document(category).to_string(),
            examples: vec![Example {
                label: "additive synthesis".to_string(),
                code: example_code(category),
            }],
            model: model.into(),
            temperature: DEFAULT_TEMPERATURE,
        }
    }

    /// Knowledge document followed by the examples as fenced blocks.
    pub fn system_prefix(&self) -> String {
        let mut s = self.knowledge_document.trim_end().to_string();
        for ex in &self.examples {
            s.push_str("\n\n## Example: ");
            s.push_str(&ex.label);
            s.push_str("\n\n```\n");
            s.push_str(&ex.code);
            if !ex.code.ends_with('\n') {
                s.push('\n');
            }
            s.push_str("```\n");
        }
        s
    }

    /// A fresh two-message conversation for one sample.
    pub fn request(&self, prompt: &str) -> ChatRequest {
        ChatRequest {
            model: self.model.clone(),
            temperature: self.temperature,
            messages: vec![
                Message {
                    role: "system".to_string(),
                    content: self.system_prefix(),
                },
                Message {
                    role: "user".to_string(),
                    content: prompt.to_string(),
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

/// Body of a chat-completions request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: f64,
    pub messages: Vec<Message>,
}

pub fn prompt_for(category: Category, benchmark: Benchmark, rich: bool) -> String {
    let noun = benchmark.prompt_noun();
    let lang = category.language();
    let mut s = match category.family() {
        Family::Max => format!("Based on the examples given, use {lang} to write code that implements {noun}."),
        Family::Web => format!("Write {lang} that implements {noun}."),
    };
    if rich {
        s.push_str(&format!(" Use for loops and/or {} in your code.", category.random_function()));
    }
    s
}

pub fn build_prompt(category: &str, benchmark: &str, rich: bool) -> Result<String, LlmError> {
    let c: Category = category.parse().map_err(|_| LlmError::UnknownCategory(category.to_string()))?;
    let b: Benchmark = benchmark.parse().map_err(|_| LlmError::UnknownBenchmark(benchmark.to_string()))?;
    Ok(prompt_for(c, b, rich))
}

#[cfg(test)]
mod tests;
