use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::BufRead;
use std::path::Path;
use std::sync::Mutex;

use serde::Deserialize;

use super::prompt::{routing_key, PromptKind};
use super::{CompletionParams, LanguageModel, LlmError};

#[derive(Debug, thiserror::Error)]
pub enum MockScriptError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Deserialize)]
struct ScriptLine {
    key: String,
    #[serde(default)]
    response: Option<String>,
    #[serde(default)]
    error: Option<String>,
}

type Reply = Result<String, LlmError>;

#[derive(Default)]
struct State {
    queues: HashMap<String, VecDeque<Reply>>,
    calls: BTreeMap<PromptKind, u64>,
    total: u64,
}

/// Scripted model. Each prompt is routed by its `### Task:` line to the
/// first non-empty queue among `kind/name`, `name`, `kind`, and `*`.
#[derive(Default)]
pub struct MockLlm {
    state: Mutex<State>,
}

fn parse_error(kind: &str, key: &str) -> Option<LlmError> {
    let msg = format!("scripted for {key}");
    Some(match kind {
        "rate_limited" => LlmError::RateLimited(msg),
        "network" => LlmError::Network(msg),
        "context_length" => LlmError::ContextLength(msg),
        _ => return None,
    })
}

impl MockLlm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&self, key: impl Into<String>, response: impl Into<String>) -> &Self {
        self.enqueue(key.into(), Ok(response.into()));
        self
    }

    pub fn push_error(&self, key: impl Into<String>, error: LlmError) -> &Self {
        self.enqueue(key.into(), Err(error));
        self
    }

    fn enqueue(&self, key: String, reply: Reply) {
        self.state.lock().unwrap().queues.entry(key).or_default().push_back(reply);
    }

    pub fn from_jsonl(reader: impl BufRead) -> Result<Self, MockScriptError> {
        let mock = Self::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let malformed = |message: String| MockScriptError::Malformed { line: i + 1, message };
            let entry: ScriptLine = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
            match (entry.response, entry.error) {
                (Some(r), None) => mock.enqueue(entry.key, Ok(r)),
                (None, Some(e)) => {
                    let err =
                        parse_error(&e, &entry.key).ok_or_else(|| malformed(format!("unknown error kind `{e}`")))?;
                    mock.enqueue(entry.key, Err(err));
                }
                _ => return Err(malformed("exactly one of `response` or `error` is required".into())),
            }
        }
        Ok(mock)
    }

    pub fn from_path(path: &Path) -> Result<Self, MockScriptError> {
        Self::from_jsonl(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn calls(&self, kind: PromptKind) -> u64 {
        self.state.lock().unwrap().calls.get(&kind).copied().unwrap_or(0)
    }

    pub fn total_calls(&self) -> u64 {
        self.state.lock().unwrap().total
    }

    /// Entries still queued across all keys.
    pub fn remaining(&self) -> usize {
        self.state.lock().unwrap().queues.values().map(VecDeque::len).sum()
    }
}

impl LanguageModel for MockLlm {
    fn complete(&self, prompt: &str, _params: &CompletionParams) -> Result<String, LlmError> {
        let mut state = self.state.lock().unwrap();
        state.total += 1;
        let route = routing_key(prompt);
        let mut keys = Vec::with_capacity(4);
        if let Some((kind, name)) = route {
            *state.calls.entry(kind).or_default() += 1;
            keys.push(format!("{}/{name}", kind.as_str()));
            keys.push(name.to_string());
            keys.push(kind.as_str().to_string());
        }
        keys.push("*".to_string());
        for key in &keys {
            if let Some(reply) = state.queues.get_mut(key).and_then(VecDeque::pop_front) {
                return reply;
            }
        }
        Err(LlmError::ScriptExhausted(keys[0].clone()))
    }
}
