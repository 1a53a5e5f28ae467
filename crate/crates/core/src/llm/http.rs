use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{CompletionParams, LanguageModel, LlmError};

/// Endpoint settings for an OpenAI-compatible chat-completions API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpModelConfig {
    /// Full URL of the chat-completions route.
    pub endpoint: String,
    /// Environment variable holding the bearer token; unset means no auth header.
    pub api_key_env: Option<String>,
    pub timeout_secs: u64,
}

pub struct HttpModel {
    agent: ureq::Agent,
    endpoint: String,
    api_key: Option<String>,
}

impl HttpModel {
    pub fn new(config: &HttpModelConfig) -> Result<Self, LlmError> {
        let api_key = match &config.api_key_env {
            Some(var) => Some(
                std::env::var(var).map_err(|_| LlmError::Config(format!("environment variable {var} is not set")))?,
            ),
            None => None,
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .build()
            .into();
        Ok(Self { agent, endpoint: config.endpoint.clone(), api_key })
    }
}

fn looks_like_context_overflow(body: &str) -> bool {
    let b = body.to_ascii_lowercase();
    b.contains("context_length")
        || b.contains("context length")
        || b.contains("maximum context")
        || b.contains("too many tokens")
}

/// Maps a non-success HTTP status and body to an error kind.
fn classify(status: u16, body: &str) -> LlmError {
    let detail = format!("HTTP {status}: {}", body.chars().take(500).collect::<String>());
    match status {
        429 => LlmError::RateLimited(detail),
        400 | 413 if looks_like_context_overflow(body) => LlmError::ContextLength(detail),
        500..=599 => LlmError::Network(detail),
        _ => LlmError::Config(detail),
    }
}

fn completion_text(body: &Value) -> Option<String> {
    body.pointer("/choices/0/message/content").and_then(Value::as_str).map(str::to_string)
}

impl LanguageModel for HttpModel {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String, LlmError> {
        let request = json!({
            "model": params.model_id,
            "temperature": params.temperature,
            "max_tokens": params.max_output_tokens,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut req = self.agent.post(&self.endpoint).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = req.send(request.to_string()).map_err(|e| LlmError::Network(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response.body_mut().read_to_string().map_err(|e| LlmError::Network(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(classify(status, &body));
        }
        let parsed: Value =
            serde_json::from_str(&body).map_err(|e| LlmError::Network(format!("bad response body: {e}")))?;
        let text =
            completion_text(&parsed).ok_or_else(|| LlmError::Network("response has no message content".into()))?;
        let finish = parsed.pointer("/choices/0/finish_reason").and_then(Value::as_str);
        if finish == Some("length") {
            tracing::warn!("completion truncated at max_output_tokens");
        }
        Ok(text)
    }
}
