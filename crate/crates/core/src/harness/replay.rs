use std::path::{Path, PathBuf};

use crate::llm::{cache_key, prompt_for, AssistantConfig, CacheEntry, ResponseCache};

use super::config::ResolvedConfig;
use super::HarnessError;

/// Path of the raw response for one sample inside a responses tree.
pub fn response_path(root: &Path, category: &str, benchmark: &str, index: usize) -> PathBuf {
    root.join(category).join(benchmark).join(format!("{index}.txt"))
}

/// Loads `responses/<category>/<benchmark>/<idx>.txt` for every sample the
/// config asks for and stores each under the key a run with that config
/// will look up. Returns the number of entries written.
pub fn pack_replay(config: &ResolvedConfig, responses: &Path, cache: &ResponseCache) -> Result<usize, HarnessError> {
    let mut written = 0;
    for &category in &config.categories {
        let assistant = AssistantConfig::for_category(category, config.model.clone());
        for &benchmark in &config.benchmarks {
            let prompt = prompt_for(category, benchmark, category.is_rich());
            for index in 0..config.raw.n {
                let path = response_path(responses, category.id(), benchmark.id(), index);
                let response = std::fs::read_to_string(&path)
                    .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
                cache.put(&CacheEntry {
                    key: cache_key(&assistant, &prompt, index),
                    category,
                    prompt: prompt.clone(),
                    index,
                    response,
                })?;
                written += 1;
            }
        }
    }
    Ok(written)
}
