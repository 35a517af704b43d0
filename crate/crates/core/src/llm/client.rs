use std::time::Duration;

use serde::Deserialize;

use super::{ChatRequest, LlmError};

pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";

/// Anything that can answer one chat request.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(30),
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `attempt` (1-based).
    pub fn delay(&self, attempt: u32) -> Duration {
        let factor = 1u32 << attempt.saturating_sub(1).min(16);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

/// OpenAI-style `POST {base}/chat/completions` over blocking HTTP.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    client: reqwest::blocking::Client,
    base_url: String,
    api_key: Option<String>,
    retry: RetryPolicy,
}

#[derive(Deserialize)]
struct CompletionBody {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

impl HttpBackend {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>) -> Result<Self, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(300))
            .build()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        Ok(HttpBackend {
            client,
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key,
            retry: RetryPolicy::default(),
        })
    }

    /// Reads `LLM_BASE_URL` and `LLM_API_KEY`.
    pub fn from_env() -> Result<Self, LlmError> {
        let base = std::env::var("LLM_BASE_URL").unwrap_or_else(|_| DEFAULT_BASE_URL.to_string());
        Self::new(base, std::env::var("LLM_API_KEY").ok())
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    fn attempt(&self, request: &ChatRequest) -> Result<Result<String, LlmError>, u16> {
        let mut req = self.client.post(format!("{}/chat/completions", self.base_url)).json(request);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) => return Ok(Err(LlmError::Transport(e.to_string()))),
        };
        let status = resp.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(status.as_u16());
        }
        if !status.is_success() {
            return Ok(Err(LlmError::Http { status: status.as_u16() }));
        }
        let body: CompletionBody = match resp.json() {
            Ok(b) => b,
            Err(e) => return Ok(Err(LlmError::BadResponse(e.to_string()))),
        };
        Ok(body
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| LlmError::BadResponse("no message content".to_string())))
    }
}

impl ChatBackend for HttpBackend {
    /// Retries 429 and 5xx with exponential backoff up to the policy's
    /// attempt limit.
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let attempts = self.retry.max_attempts.max(1);
        let mut last = 0;
        for attempt in 1..=attempts {
            match self.attempt(request) {
                Ok(result) => return result,
                Err(status) => last = status,
            }
            if attempt < attempts {
                std::thread::sleep(self.retry.delay(attempt));
            }
        }
        if last == 429 {
            Err(LlmError::RateLimited { attempts })
        } else {
            Err(LlmError::Http { status: last })
        }
    }
}
