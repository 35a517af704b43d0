use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use super::{cache_key, AssistantConfig, CacheEntry, ChatBackend, ChatRequest, LlmError, Provenance, ResponseCache};

pub const DEFAULT_WORKERS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub text: String,
    pub key: String,
    pub provenance: Provenance,
}

/// One sample to draw.
#[derive(Debug, Clone)]
pub struct Job {
    pub config: Arc<AssistantConfig>,
    pub prompt: String,
    pub index: usize,
}

/// Draws samples through the cache. Replay generators never touch the
/// network; live generators query the backend on a miss and store the
/// answer.
pub struct Generator {
    backend: Option<Arc<dyn ChatBackend>>,
    cache: ResponseCache,
    pool: rayon::ThreadPool,
    log: Mutex<Vec<ChatRequest>>,
}

impl Generator {
    pub fn replay(cache: ResponseCache) -> Self {
        Self::build(None, cache, 1)
    }

    /// At most `workers` requests are in flight at once.
    pub fn live(backend: Arc<dyn ChatBackend>, cache: ResponseCache, workers: usize) -> Self {
        Self::build(Some(backend), cache, workers)
    }

    fn build(backend: Option<Arc<dyn ChatBackend>>, cache: ResponseCache, workers: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .expect("thread pool");
        Generator {
            backend,
            cache,
            pool,
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn cache(&self) -> &ResponseCache {
        &self.cache
    }

    pub fn is_live(&self) -> bool {
        self.backend.is_some()
    }

    /// Every request body sent to the backend, in send order.
    pub fn request_log(&self) -> Vec<ChatRequest> {
        self.log.lock().unwrap_or_else(|p| p.into_inner()).clone()
    }

    pub fn generate_one(&self, config: &AssistantConfig, prompt: &str, index: usize) -> Result<Generation, LlmError> {
        let key = cache_key(config, prompt, index);
        if let Some(entry) = self.cache.get(&key)? {
            return Ok(Generation {
                text: entry.response,
                provenance: Provenance::Replay { key: key.clone() },
                key,
            });
        }
        let Some(backend) = &self.backend else {
            return Err(LlmError::CacheMiss(key));
        };
        let request = config.request(prompt);
        self.log.lock().unwrap_or_else(|p| p.into_inner()).push(request.clone());
        let text = backend.complete(&request)?;
        self.cache.put(&CacheEntry {
            key: key.clone(),
            category: config.category,
            prompt: prompt.to_string(),
            index,
            response: text.clone(),
        })?;
        Ok(Generation {
            text,
            key,
            provenance: Provenance::Live {
                model: config.model.clone(),
            },
        })
    }

    /// Runs every job on the worker pool; results keep the job order.
    pub fn generate_many(&self, jobs: &[Job]) -> Vec<Result<Generation, LlmError>> {
        self.pool.install(|| {
            jobs.par_iter()
                .map(|j| self.generate_one(&j.config, &j.prompt, j.index))
                .collect()
        })
    }

    /// `n` independent samples for one prompt.
    pub fn generate(&self, config: &AssistantConfig, prompt: &str, n: usize) -> Result<Vec<Generation>, LlmError> {
        if n == 0 {
            return Err(LlmError::NoSamples);
        }
        let config = Arc::new(config.clone());
        let jobs: Vec<Job> = (0..n)
            .map(|index| Job {
                config: config.clone(),
                prompt: prompt.to_string(),
                index,
            })
            .collect();
        self.generate_many(&jobs).into_iter().collect()
    }
}
