use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::benchmark::{Benchmark, ALL_BENCHMARKS};
use crate::category::Category;
use crate::llm::{DEFAULT_MODEL, DEFAULT_WORKERS};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Live,
    #[default]
    Replay,
}

fn default_n() -> usize {
    10
}

fn default_k() -> Vec<u64> {
    vec![1, 3]
}

fn default_workers() -> usize {
    DEFAULT_WORKERS
}

fn default_benchmarks() -> Vec<String> {
    ALL_BENCHMARKS.iter().map(|b| b.id().to_string()).collect()
}

/// The experiment definition as written in a config file. Category and
/// benchmark names stay strings here so that unknown ones surface as
/// config errors from [`RunConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub categories: Vec<String>,
    #[serde(default = "default_benchmarks")]
    pub benchmarks: Vec<String>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_k")]
    pub k: Vec<u64>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Shell templates for external runners, keyed by category id.
    #[serde(default)]
    pub runner_templates: BTreeMap<String, String>,
    /// Model name; `LLM_MODEL` or a built-in default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Response cache directory, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

/// A validated config with parsed ids.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub raw: RunConfig,
    pub categories: Vec<Category>,
    pub benchmarks: Vec<Benchmark>,
    pub model: String,
    pub cache_dir: PathBuf,
    templates: BTreeMap<Category, String>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf), HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_json(&text)?, base))
    }

    /// Canonical JSON, as written to `config.json`.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// A run id derived from the config contents.
    pub fn default_run_id(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        format!("run-{}", &hex::encode(digest)[..12])
    }

    /// Checks every field; relative cache paths resolve against `base`.
    pub fn resolve(&self, base: &Path) -> Result<ResolvedConfig, HarnessError> {
        let err = |m: String| Err(HarnessError::Config(m));
        if self.categories.is_empty() {
            return err("no categories".into());
        }
        if self.benchmarks.is_empty() {
            return err("no benchmarks".into());
        }
        if self.n == 0 {
            return err("n must be at least 1".into());
        }
        if self.workers == 0 {
            return err("workers must be at least 1".into());
        }
        for &k in &self.k {
            if k == 0 || k as usize > self.n {
                return err(format!("k={k} outside 1..={}", self.n));
            }
        }
        let categories = self
            .categories
            .iter()
            .map(|c| c.parse::<Category>().map_err(|e| HarnessError::Config(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let benchmarks = self
            .benchmarks
            .iter()
            .map(|b| b.parse::<Benchmark>().map_err(|e| HarnessError::Config(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let mut seen = categories.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != categories.len() {
            return err("duplicate category".into());
        }
        let mut seen = benchmarks.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != benchmarks.len() {
            return err("duplicate benchmark".into());
        }
        let mut templates = BTreeMap::new();
        for (key, template) in &self.runner_templates {
            let Ok(c) = key.parse::<Category>() else {
                return err(format!("runner template for unknown category `{key}`"));
            };
            templates.insert(c, template.clone());
        }
        let model = self
            .model
            .clone()
            .or_else(|| std::env::var("LLM_MODEL").ok())
            .unwrap_or_else(|| DEFAULT_MODEL.to_string());
        let cache_dir = base.join(self.cache_dir.clone().unwrap_or_else(|| PathBuf::from("cache")));
        Ok(ResolvedConfig {
            raw: self.clone(),
            categories,
            benchmarks,
            model,
            cache_dir,
            templates,
        })
    }
}

impl ResolvedConfig {
    /// Runner template for `category`, falling back to its base category.
    pub fn runner_template(&self, category: Category) -> Option<&str> {
        self.templates
            .get(&category)
            .or_else(|| self.templates.get(&category.base()))
            .map(String::as_str)
    }
}
