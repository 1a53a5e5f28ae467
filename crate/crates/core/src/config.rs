//! Run configuration (TOML) and the backends it describes.
//!
//! ```toml
//! [budget]
//! rounds_m = 4
//! repairs_n = 4
//!
//! [llm]
//! backend = "http"
//! endpoint = "https://api.example.com/v1/chat/completions"
//! model_id = "some-model"
//! api_key_env = "LLM_API_KEY"
//!
//! [verifier]
//! backend = "process"
//! command = ["lake", "exe", "shim"]
//! workdir = "../lean-shim"
//! pool_size = 4
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::llm::{
    CompletionParams, Guidelines, HttpModel, HttpModelConfig, LanguageModel, LlmError, MockLlm, MockScriptError,
    RetryPolicy, RetryingModel,
};
use crate::orchestrator::{Backends, BudgetConfig, BudgetError, Clock, Mode};
use crate::retrieval::{Index, IndexError, DEFAULT_K, MAX_QUERIES};
use crate::verifier::{self, MockDefault, MockVerifier, NamePatterns, Verifier, WorkerCommand, WorkerPool};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub budget: BudgetConfig,
    pub llm: LlmConfig,
    pub verifier: VerifierConfig,
    pub retrieval: RetrievalConfig,
    pub run: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LlmBackend {
    #[default]
    Http,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    pub backend: LlmBackend,
    pub endpoint: String,
    pub model_id: String,
    pub api_key_env: Option<String>,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub timeout_secs: u64,
    pub max_in_flight: usize,
    /// Backoff before each retry, in seconds.
    pub retry_backoff_secs: Vec<u64>,
    /// JSONL completion script for the mock backend.
    pub script: Option<PathBuf>,
}

impl Default for LlmConfig {
    fn default() -> Self {
        let params = CompletionParams::default();
        Self {
            backend: LlmBackend::Http,
            endpoint: String::new(),
            model_id: params.model_id,
            api_key_env: None,
            temperature: params.temperature,
            max_output_tokens: params.max_output_tokens,
            timeout_secs: 600,
            max_in_flight: 8,
            retry_backoff_secs: vec![1, 4, 16],
            script: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifierBackendKind {
    #[default]
    Process,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifierConfig {
    pub backend: VerifierBackendKind,
    /// Worker program and arguments.
    pub command: Vec<String>,
    pub workdir: Option<PathBuf>,
    pub pool_size: usize,
    pub timeout_secs: u64,
    /// Mock script. It sets its own default behavior.
    pub script: Option<PathBuf>,
    /// Behavior of the mock when no script is given.
    pub mock_default: MockDefault,
    /// Additional errored-name patterns (regexes with an `id` group).
    pub extra_name_patterns: Vec<String>,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        Self {
            backend: VerifierBackendKind::Process,
            command: Vec::new(),
            workdir: None,
            pool_size: 4,
            timeout_secs: verifier::DEFAULT_TIMEOUT.as_secs(),
            script: None,
            mock_default: MockDefault::Reject,
            extra_name_patterns: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalConfig {
    /// Declaration dump (JSONL). No index means retrieval returns nothing.
    pub index: Option<PathBuf>,
    pub k: usize,
    pub max_queries: usize,
    pub lenient: bool,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self { index: None, k: DEFAULT_K, max_queries: MAX_QUERIES, lenient: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    /// Problems solved concurrently.
    pub workers: usize,
    /// Directory overriding the built-in guideline texts.
    pub guidelines_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { mode: Mode::Full, workers: 1, guidelines_dir: None }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Budget(#[from] BudgetError),
    #[error("{0}")]
    Invalid(String),
    #[error("llm backend: {0}")]
    Llm(#[from] LlmError),
    #[error("llm script: {0}")]
    LlmScript(#[from] MockScriptError),
    #[error("verifier script: {0}")]
    VerifierScript(#[from] verifier::MockScriptError),
    #[error("index: {0}")]
    Index(#[from] IndexError),
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Loads a config file and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut config = Self::from_toml_str(&text)?;
        config.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p.as_mut().filter(|p| p.is_relative()) {
                *path = base.join(&*path);
            }
        };
        fix(&mut self.llm.script);
        fix(&mut self.verifier.script);
        fix(&mut self.verifier.workdir);
        fix(&mut self.retrieval.index);
        fix(&mut self.run.guidelines_dir);
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.budget.validate()?;
        self.params().validate()?;
        if self.retrieval.k == 0 {
            return Err(ConfigError::Invalid("retrieval.k must be at least 1".into()));
        }
        if self.run.workers == 0 {
            return Err(ConfigError::Invalid("run.workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> CompletionParams {
        CompletionParams {
            temperature: self.llm.temperature,
            max_output_tokens: self.llm.max_output_tokens,
            model_id: self.llm.model_id.clone(),
        }
    }
}

/// Backends built from a [`Config`], owned for the length of a run.
pub struct Runtime {
    pub llm: Box<dyn LanguageModel>,
    pub verifier: Verifier,
    pub index: Index,
    pub guidelines: Guidelines,
    pub params: CompletionParams,
    pub verify_timeout: Duration,
    pub retrieval_k: usize,
    pub max_queries: usize,
}

impl Runtime {
    pub fn from_config(config: &Config) -> Result<Self, ConfigError> {
        let policy =
            RetryPolicy { backoff: config.llm.retry_backoff_secs.iter().map(|s| Duration::from_secs(*s)).collect() };
        let llm: Box<dyn LanguageModel> = match config.llm.backend {
            LlmBackend::Http => {
                if config.llm.endpoint.is_empty() {
                    return Err(ConfigError::Invalid("llm.endpoint is required for the http backend".into()));
                }
                let http = HttpModel::new(&HttpModelConfig {
                    endpoint: config.llm.endpoint.clone(),
                    api_key_env: config.llm.api_key_env.clone(),
                    timeout_secs: config.llm.timeout_secs,
                })?;
                Box::new(RetryingModel::new(http, policy, config.llm.max_in_flight))
            }
            LlmBackend::Mock => {
                let script = config
                    .llm
                    .script
                    .as_ref()
                    .ok_or_else(|| ConfigError::Invalid("llm.script is required for the mock backend".into()))?;
                Box::new(MockLlm::from_path(script)?)
            }
        };

        let backend: Arc<dyn verifier::VerifierBackend> = match config.verifier.backend {
            VerifierBackendKind::Process => {
                let (program, args) = config.verifier.command.split_first().ok_or_else(|| {
                    ConfigError::Invalid("verifier.command is required for the process backend".into())
                })?;
                let mut cmd = WorkerCommand::new(program.clone(), args.iter().cloned());
                cmd.cwd = config.verifier.workdir.clone();
                Arc::new(WorkerPool::new(cmd, config.verifier.pool_size))
            }
            VerifierBackendKind::Mock => {
                let mock = match &config.verifier.script {
                    Some(path) => MockVerifier::from_path(path)?,
                    None => MockVerifier::new(config.verifier.mock_default),
                };
                Arc::new(mock)
            }
        };
        let mut patterns = NamePatterns::default();
        for p in &config.verifier.extra_name_patterns {
            patterns = patterns.with_extra(p).map_err(|e| ConfigError::Invalid(format!("name pattern `{p}`: {e}")))?;
        }
        let verifier = Verifier::new(backend).with_patterns(patterns);

        let index = match &config.retrieval.index {
            Some(path) => {
                let file =
                    std::fs::File::open(path).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
                Index::from_jsonl(std::io::BufReader::new(file), config.retrieval.lenient)?.0
            }
            None => Index::default(),
        };
        let guidelines = match &config.run.guidelines_dir {
            Some(dir) => Guidelines::from_dir(dir).map_err(|source| ConfigError::Io { path: dir.clone(), source })?,
            None => Guidelines::default(),
        };
        Ok(Self {
            llm,
            verifier,
            index,
            guidelines,
            params: config.params(),
            verify_timeout: Duration::from_secs(config.verifier.timeout_secs.max(1)),
            retrieval_k: config.retrieval.k,
            max_queries: config.retrieval.max_queries,
        })
    }

    pub fn backends<'a>(&'a self, clock: &'a dyn Clock) -> Backends<'a> {
        let mut b =
            Backends::new(self.llm.as_ref(), &self.verifier, &self.index, &self.guidelines, clock, &self.params);
        b.verify_timeout = self.verify_timeout;
        b.retrieval_k = self.retrieval_k;
        b.max_queries = self.max_queries;
        b
    }
}
