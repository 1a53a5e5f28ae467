use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::lean::{self, Header, HeaderError};

/// A Lean 4 theorem header without a proof body.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormalStatement {
    pub name: String,
    /// Header text as it appears in a Lean file, e.g. `theorem th (a : ℤ) : a = a`.
    pub source: String,
    #[serde(default)]
    pub imports: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatementError {
    #[error("statement source is empty")]
    Empty,
    #[error("invalid statement name `{0}`")]
    InvalidName(String),
    #[error("malformed header: {0}")]
    Header(#[from] HeaderError),
}

impl FormalStatement {
    pub fn new(
        name: impl Into<String>,
        source: impl Into<String>,
        imports: Vec<String>,
    ) -> Result<Self, StatementError> {
        let name = name.into();
        let source = source.into();
        if source.trim().is_empty() {
            return Err(StatementError::Empty);
        }
        if !lean::is_identifier(&name) {
            return Err(StatementError::InvalidName(name));
        }
        Ok(Self { name, source, imports })
    }

    /// Parses a header (`[theorem] name binders : goal`) and normalizes the
    /// stored source to start with a declaration keyword.
    pub fn from_header(text: &str, imports: Vec<String>) -> Result<Self, StatementError> {
        if text.trim().is_empty() {
            return Err(StatementError::Empty);
        }
        let header = lean::parse_header(text)?;
        Ok(Self { name: header.name.clone(), source: header.render(), imports })
    }

    pub fn header(&self) -> Result<Header, HeaderError> {
        lean::parse_header(&self.source)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProofOrigin {
    Direct,
    Repair,
    Consolidation,
}

/// A tactic block that closes a [`FormalStatement`] when appended after `:= by`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormalProof {
    pub source: String,
    pub produced_by: ProofOrigin,
}

impl FormalProof {
    pub fn new(source: impl Into<String>, produced_by: ProofOrigin) -> Self {
        Self { source: source.into(), produced_by }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: u32,
    pub column: u32,
    pub severity: Severity,
    pub message: String,
    #[serde(default)]
    pub errored_names: Vec<String>,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>) -> Self {
        Self { line: 1, column: 0, severity: Severity::Error, message: message.into(), errored_names: Vec::new() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub ok: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub tactic_state: Option<String>,
    pub elapsed_ms: u64,
    pub timed_out: bool,
}

impl VerificationResult {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    pub fn first_error(&self) -> Option<&Diagnostic> {
        self.errors().next()
    }
}

/// Content key used by hash-scripted mocks and transcript replay.
pub fn content_hash(statement_source: &str, proof_source: &str) -> String {
    let mut h = Sha256::new();
    h.update(statement_source.as_bytes());
    h.update([0u8]);
    h.update(proof_source.as_bytes());
    hex::encode(h.finalize())
}
