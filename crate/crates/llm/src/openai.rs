//! Client for OpenAI-compatible HTTP servers (hosted APIs, vLLM, llama.cpp, TGI).

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::model::ensure_prompt;
use crate::{
    Completion, Embedder, FinishReason, InFlightGate, LanguageModel, LlmError, Result, SamplingParams,
    TokenLogprob,
};

const MAX_BACKOFF: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    /// Base URL including the version prefix, e.g. `http://localhost:8000/v1`.
    pub endpoint_url: String,
    pub model_name: String,
    /// Name of the environment variable holding the API key; unset means no auth header.
    pub api_key_env: Option<String>,
    pub request_timeout_secs: f64,
    pub max_retries: u32,
    pub max_in_flight: usize,
    pub retry_base_delay_ms: u64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            endpoint_url: "http://localhost:8000/v1".to_string(),
            model_name: String::new(),
            api_key_env: Some("OPENAI_API_KEY".to_string()),
            request_timeout_secs: 120.0,
            max_retries: 3,
            max_in_flight: 4,
            retry_base_delay_ms: 500,
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.endpoint_url.trim().is_empty() {
            return Err(LlmError::Config("endpoint_url is empty".into()));
        }
        if self.model_name.trim().is_empty() {
            return Err(LlmError::Config("model_name is empty".into()));
        }
        if self.max_in_flight == 0 {
            return Err(LlmError::Config("max_in_flight must be at least 1".into()));
        }
        if !(self.request_timeout_secs.is_finite() && self.request_timeout_secs > 0.0) {
            return Err(LlmError::Config("request_timeout_secs must be positive".into()));
        }
        Ok(())
    }

    /// Delay before retry number `attempt` (0-based): base·2^attempt scaled by a jitter
    /// factor in [0.5, 1.5), capped.
    pub fn backoff(&self, attempt: u32, jitter: f64) -> Duration {
        let base = Duration::from_millis(self.retry_base_delay_ms);
        let exp = base.saturating_mul(1u32 << attempt.min(16));
        exp.mul_f64(jitter).min(MAX_BACKOFF)
    }
}

#[derive(Debug)]
pub struct OpenAiClient {
    config: ProviderConfig,
    http: reqwest::blocking::Client,
    api_key: Option<String>,
    gate: InFlightGate,
    next_id: AtomicU64,
}

enum Failure {
    Retryable(String),
    Fatal(LlmError),
}

impl OpenAiClient {
    pub fn new(config: ProviderConfig) -> Result<Self> {
        config.validate()?;
        let api_key = match &config.api_key_env {
            Some(var) => match std::env::var(var) {
                Ok(v) if !v.is_empty() => Some(v),
                _ => {
                    log::warn!("environment variable {var} is unset; sending requests without a key");
                    None
                }
            },
            None => None,
        };
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.request_timeout_secs))
            .build()
            .map_err(|e| LlmError::Config(format!("cannot build HTTP client: {e}")))?;
        Ok(OpenAiClient {
            gate: InFlightGate::new(config.max_in_flight),
            config,
            http,
            api_key,
            next_id: AtomicU64::new(1),
        })
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    fn url(&self, path: &str) -> String {
        format!("{}/{}", self.config.endpoint_url.trim_end_matches('/'), path)
    }

    fn send_once(&self, url: &str, body: &Value, request_id: &str) -> std::result::Result<Value, Failure> {
        let _permit = self.gate.acquire();
        let mut req = self.http.post(url).header("X-Request-Id", request_id).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| Failure::Retryable(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| Failure::Retryable(e.to_string()))?;
        if status.is_success() {
            return serde_json::from_str(&text).map_err(|e| {
                Failure::Fatal(LlmError::Permanent {
                    status: Some(status.as_u16()),
                    message: format!("malformed JSON response: {e}"),
                })
            });
        }
        let message = provider_message(&text);
        let code = status.as_u16();
        // 408 and 429 are client-class codes that signal a retryable condition.
        if status.is_server_error() || code == 408 || code == 429 {
            Err(Failure::Retryable(format!("HTTP {code}: {message}")))
        } else {
            Err(Failure::Fatal(LlmError::Permanent {
                status: Some(code),
                message,
            }))
        }
    }

    fn post(&self, path: &str, body: Value) -> Result<Value> {
        let url = self.url(path);
        let request_id = format!("req-{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let attempts = self.config.max_retries + 1;
        let mut last = String::new();
        for attempt in 0..attempts {
            match self.send_once(&url, &body, &request_id) {
                Ok(v) => return Ok(v),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(msg)) => {
                    log::debug!("{request_id} attempt {} failed: {msg}", attempt + 1);
                    last = msg;
                    if attempt + 1 < attempts {
                        let jitter = rand::thread_rng().gen_range(0.5..1.5);
                        std::thread::sleep(self.config.backoff(attempt, jitter));
                    }
                }
            }
        }
        Err(LlmError::Transient {
            attempts,
            message: last,
        })
    }
}

fn provider_message(body: &str) -> String {
    serde_json::from_str::<Value>(body)
        .ok()
        .and_then(|v| {
            v.pointer("/error/message")
                .or_else(|| v.get("message"))
                .and_then(Value::as_str)
                .map(str::to_string)
        })
        .unwrap_or_else(|| body.trim().to_string())
}

fn malformed(what: &str) -> LlmError {
    LlmError::Permanent {
        status: None,
        message: format!("malformed provider response: missing {what}"),
    }
}

fn parse_chat(v: &Value) -> Result<Completion> {
    let choice = v.pointer("/choices/0").ok_or_else(|| malformed("choices[0]"))?;
    let text = choice
        .pointer("/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("message.content"))?
        .to_string();
    let finish_reason = match choice.get("finish_reason").and_then(Value::as_str) {
        Some("length") => FinishReason::Length,
        Some("stop") | Some("eos") | None => FinishReason::Stop,
        Some(_) => FinishReason::Error,
    };
    let token_logprobs = choice
        .pointer("/logprobs/content")
        .and_then(Value::as_array)
        .map(|items| {
            items
                .iter()
                .filter_map(|t| {
                    Some(TokenLogprob {
                        token: t.get("token")?.as_str()?.to_string(),
                        logprob: t.get("logprob")?.as_f64()?,
                    })
                })
                .collect()
        });
    Ok(Completion {
        text,
        token_logprobs,
        finish_reason,
    })
}

/// Picks the echoed tokens whose character offset falls inside the target span.
fn parse_echo_logprobs(v: &Value, prompt_chars: usize, total_chars: usize) -> Result<Vec<f64>> {
    let lp = v
        .pointer("/choices/0/logprobs")
        .filter(|x| !x.is_null())
        .ok_or_else(|| {
            LlmError::Capability(
                "endpoint returned no logprobs for echoed text; use a logprob-capable \
                 completions endpoint or the mock backend"
                    .into(),
            )
        })?;
    let offsets = lp
        .get("text_offset")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("logprobs.text_offset"))?;
    let values = lp
        .get("token_logprobs")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("logprobs.token_logprobs"))?;
    let mut out = Vec::new();
    for (off, val) in offsets.iter().zip(values) {
        let off = off.as_u64().ok_or_else(|| malformed("numeric text_offset"))? as usize;
        if off >= prompt_chars && off < total_chars {
            out.push(val.as_f64().ok_or_else(|| malformed("numeric token logprob"))?);
        }
    }
    if out.is_empty() {
        return Err(LlmError::Capability(
            "echoed logprobs did not cover the target; the endpoint may not support echo".into(),
        ));
    }
    Ok(out)
}

impl LanguageModel for OpenAiClient {
    fn model_name(&self) -> &str {
        &self.config.model_name
    }

    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Completion> {
        ensure_prompt(prompt)?;
        params.validate()?;
        let mut body = json!({
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "top_p": params.top_p,
            "max_tokens": params.max_tokens,
            "logprobs": true,
        });
        if let Some(seed) = params.seed {
            body["seed"] = json!(seed);
        }
        parse_chat(&self.post("chat/completions", body)?)
    }

    fn target_token_logprobs(&self, prompt: &str, target: &str) -> Result<Vec<f64>> {
        ensure_prompt(prompt)?;
        let full = format!("{prompt}{target}");
        let body = json!({
            "model": self.config.model_name,
            "prompt": full,
            "max_tokens": 1,
            "temperature": 0.0,
            "echo": true,
            "logprobs": 1,
        });
        let v = self.post("completions", body)?;
        parse_echo_logprobs(&v, prompt.chars().count(), full.chars().count())
    }
}

impl Embedder for OpenAiClient {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        if texts.is_empty() {
            return Err(LlmError::InvalidRequest("no texts to embed".into()));
        }
        let v = self.post(
            "embeddings",
            json!({"model": self.config.model_name, "input": texts}),
        )?;
        let data = v
            .get("data")
            .and_then(Value::as_array)
            .ok_or_else(|| malformed("data"))?;
        let mut out: Vec<Option<Vec<f64>>> = vec![None; texts.len()];
        for (pos, item) in data.iter().enumerate() {
            let idx = item
                .get("index")
                .and_then(Value::as_u64)
                .map_or(pos, |i| i as usize);
            let vec = item
                .get("embedding")
                .and_then(Value::as_array)
                .ok_or_else(|| malformed("embedding"))?
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| malformed("numeric embedding")))
                .collect::<Result<Vec<_>>>()?;
            let slot = out
                .get_mut(idx)
                .ok_or_else(|| malformed("in-range embedding index"))?;
            *slot = Some(vec);
        }
        out.into_iter()
            .map(|v| v.ok_or_else(|| malformed("embedding for every input")))
            .collect()
    }
}
