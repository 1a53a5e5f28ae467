//! Chat-completion backends, prompt rendering, and completion post-processing.

mod http;
mod mock;
pub mod prompt;
mod retry;

use serde::{Deserialize, Serialize};

pub use http::{HttpModel, HttpModelConfig};
pub use mock::{MockLlm, MockScriptError};
pub use prompt::{render_prompt, Guidelines, PromptContext, PromptKind, RenderError};
pub use retry::{RetryPolicy, RetryingModel};

use crate::orchestrator::BudgetLedger;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionParams {
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub model_id: String,
}

impl Default for CompletionParams {
    fn default() -> Self {
        Self { temperature: 1.0, max_output_tokens: 16384, model_id: String::new() }
    }
}

impl CompletionParams {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(LlmError::InvalidParams(format!("temperature {} < 0", self.temperature)));
        }
        if self.max_output_tokens == 0 {
            return Err(LlmError::InvalidParams("max_output_tokens must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LlmError {
    #[error("empty prompt")]
    EmptyPrompt,
    #[error("invalid completion parameters: {0}")]
    InvalidParams(String),
    #[error("rate limited: {0}")]
    RateLimited(String),
    #[error("network failure: {0}")]
    Network(String),
    /// The prompt did not fit; the attempt fails but the run continues.
    #[error("context length exceeded: {0}")]
    ContextLength(String),
    #[error("mock script exhausted for {0}")]
    ScriptExhausted(String),
    #[error("backend misconfigured: {0}")]
    Config(String),
}

impl LlmError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, Self::RateLimited(_) | Self::Network(_))
    }

    /// Failures that abort a problem instead of consuming one attempt.
    pub fn is_infra(&self) -> bool {
        !matches!(self, Self::ContextLength(_))
    }
}

/// A text model Φ: prompt in, completion out.
pub trait LanguageModel: Send + Sync {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String, LlmError>;
}

/// Calls `model` and charges exactly one call to `ledger` whenever the
/// request reaches the backend, whether or not it succeeds.
pub fn complete(
    model: &dyn LanguageModel,
    prompt: &str,
    params: &CompletionParams,
    ledger: &mut BudgetLedger,
    kind: PromptKind,
) -> Result<String, LlmError> {
    if prompt.trim().is_empty() {
        return Err(LlmError::EmptyPrompt);
    }
    params.validate()?;
    ledger.record_llm(kind.as_str());
    model.complete(prompt, params)
}

/// Contents of the last fenced code block, or the whole completion trimmed
/// when there is none. An unterminated final fence runs to the end of text.
pub fn extract_code_block(completion: &str) -> String {
    let fences: Vec<usize> = completion.match_indices("```").map(|(i, _)| i).collect();
    if fences.is_empty() {
        return completion.trim().to_string();
    }
    let (open, close) = if fences.len().is_multiple_of(2) {
        (fences[fences.len() - 2], Some(fences[fences.len() - 1]))
    } else {
        (fences[fences.len() - 1], None)
    };
    let body = &completion[open + 3..close.unwrap_or(completion.len())];
    // Skip the info string (`lean`, `sketch`, ...) when the block spans lines.
    let body = match body.find('\n') {
        Some(nl) if !body[..nl].contains(char::is_whitespace) || body[..nl].trim().is_empty() => &body[nl + 1..],
        Some(_) | None => body,
    };
    body.trim_end().trim_start_matches('\n').to_string()
}
