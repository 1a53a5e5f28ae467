//! Agent state machines and their accounting.
//!
//! [`prove`] runs the direct repair loop first and falls back to sketch
//! decomposition. Every prompt, completion, and verifier result is appended
//! to the problem's [`Transcript`]; every model call is charged to its
//! [`BudgetLedger`].

mod decompose;
mod ledger;
mod pipeline;
mod repair;
mod replay;
mod transcript;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::llm::{self, CompletionParams, Guidelines, LanguageModel, LlmError, PromptContext, PromptKind};
use crate::retrieval::{Index, DEFAULT_K, MAX_QUERIES};
use crate::verifier::{
    content_hash, Diagnostic, FormalStatement, PlaceholderPolicy, VerificationResult, Verifier, VerifierError,
};

pub use decompose::{reflective_decomposition, DecompositionFeedback, DecompositionResult};
pub use ledger::{BudgetLedger, Clock, FixedClock, SystemClock};
pub use pipeline::{prove, prove_with_mode, Mode, ProofPath, ProveOutcome, ProveStatus};
pub use repair::{build_repair_context, informalize, iterative_proof_repair, RepairResult};
pub use replay::replay_backends;
pub use transcript::{Event, Transcript};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub id: String,
    pub statement: FormalStatement,
    pub informal: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    /// Rounds of the direct repair loop (m).
    pub rounds_m: u32,
    /// Attempts per round (n); `1` is plain best-of-N sampling.
    pub repairs_n: u32,
    /// Sketch attempts (l_max).
    pub decomp_attempts: u32,
    /// Rounds per sub-problem.
    pub sub_rounds: u32,
    /// Attempts per sub-problem round.
    pub sub_repairs: u32,
    pub parallel_subproblems: u32,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self { rounds_m: 4, repairs_n: 4, decomp_attempts: 2, sub_rounds: 1, sub_repairs: 4, parallel_subproblems: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("budget field `{0}` must be at least 1")]
pub struct BudgetError(pub &'static str);

impl BudgetConfig {
    pub fn validate(&self) -> Result<(), BudgetError> {
        for (name, v) in [
            ("rounds_m", self.rounds_m),
            ("repairs_n", self.repairs_n),
            ("decomp_attempts", self.decomp_attempts),
            ("sub_rounds", self.sub_rounds),
            ("sub_repairs", self.sub_repairs),
            ("parallel_subproblems", self.parallel_subproblems),
        ] {
            if v == 0 {
                return Err(BudgetError(name));
            }
        }
        Ok(())
    }
}

/// Everything the state machines talk to. Cheap to copy; shared by
/// concurrently solved sub-problems.
#[derive(Clone, Copy)]
pub struct Backends<'a> {
    pub llm: &'a dyn LanguageModel,
    pub verifier: &'a Verifier,
    pub index: &'a Index,
    pub guidelines: &'a Guidelines,
    pub clock: &'a dyn Clock,
    pub params: &'a CompletionParams,
    pub verify_timeout: Duration,
    pub retrieval_k: usize,
    pub max_queries: usize,
}

impl<'a> Backends<'a> {
    pub fn new(
        llm: &'a dyn LanguageModel,
        verifier: &'a Verifier,
        index: &'a Index,
        guidelines: &'a Guidelines,
        clock: &'a dyn Clock,
        params: &'a CompletionParams,
    ) -> Self {
        Self {
            llm,
            verifier,
            index,
            guidelines,
            clock,
            params,
            verify_timeout: crate::verifier::DEFAULT_TIMEOUT,
            retrieval_k: DEFAULT_K,
            max_queries: MAX_QUERIES,
        }
    }
}

/// Infrastructure failure that ends a problem without spending its budget.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct Abort(pub String);

impl From<VerifierError> for Abort {
    fn from(e: VerifierError) -> Self {
        Abort(e.to_string())
    }
}

/// Ledger and transcript of one problem, or of one sub-problem before it is
/// merged into its parent.
pub struct Session<'c> {
    pub ledger: BudgetLedger,
    pub transcript: Transcript,
    pub phase: String,
    clock: &'c dyn Clock,
}

impl<'c> Session<'c> {
    pub fn new(clock: &'c dyn Clock, phase: impl Into<String>) -> Self {
        Self { ledger: BudgetLedger::default(), transcript: Transcript::default(), phase: phase.into(), clock }
    }

    pub fn log(&mut self, event: &str, payload: Value) {
        let ts = self.clock.now_ms();
        self.transcript.push(ts, &self.phase, event, payload);
    }

    pub fn child(&self, phase: impl Into<String>) -> Session<'c> {
        Session::new(self.clock, phase)
    }

    /// Folds a finished child session into this one.
    pub fn merge(&mut self, child: Session<'_>) {
        self.ledger.absorb(&child.ledger);
        self.transcript.extend(child.transcript);
    }

    /// Renders, sends, and logs one prompt. `Ok(None)` is a failed attempt
    /// (the prompt did not fit); `Err` aborts the problem.
    pub(crate) fn ask(&mut self, b: &Backends, kind: PromptKind, ctx: &PromptContext) -> Result<Option<String>, Abort> {
        let prompt = llm::render_prompt(kind, ctx).map_err(|e| Abort(e.to_string()))?;
        let statement = ctx.statement.name.as_str();
        self.log(
            "prompt",
            json!({
                "kind": kind.as_str(),
                "statement": statement,
                "params": b.params,
                "text": prompt,
            }),
        );
        match llm::complete(b.llm, &prompt, b.params, &mut self.ledger, kind) {
            Ok(text) => {
                self.log(
                    "completion",
                    json!({"kind": kind.as_str(), "statement": statement, "ok": true, "text": text}),
                );
                Ok(Some(text))
            }
            Err(e @ (LlmError::EmptyPrompt | LlmError::InvalidParams(_))) => Err(Abort(e.to_string())),
            Err(e) => {
                self.log(
                    "completion",
                    json!({"kind": kind.as_str(), "statement": statement, "ok": false, "error": error_tag(&e), "message": e.to_string()}),
                );
                if e.is_infra() {
                    Err(Abort(e.to_string()))
                } else {
                    Ok(None)
                }
            }
        }
    }

    pub(crate) fn check(
        &mut self,
        b: &Backends,
        statement: &FormalStatement,
        proof: &str,
        policy: PlaceholderPolicy,
        purpose: &str,
    ) -> Result<VerificationResult, Abort> {
        self.ledger.record_verify(purpose);
        match b.verifier.check_text(statement, proof, policy, b.verify_timeout) {
            Ok(result) => {
                self.log(
                    "verify",
                    json!({
                        "purpose": purpose,
                        "statement": statement.source,
                        "imports": statement.imports,
                        "proof": proof,
                        "hash": content_hash(&statement.source, proof),
                        "result": result,
                    }),
                );
                Ok(result)
            }
            Err(e) => {
                self.log(
                    "verify_error",
                    json!({"purpose": purpose, "statement": statement.source, "error": e.to_string()}),
                );
                Err(e.into())
            }
        }
    }
}

fn error_tag(e: &LlmError) -> &'static str {
    match e {
        LlmError::RateLimited(_) => "rate_limited",
        LlmError::Network(_) => "network",
        LlmError::ContextLength(_) => "context_length",
        LlmError::ScriptExhausted(_) => "script_exhausted",
        LlmError::Config(_) => "config",
        LlmError::EmptyPrompt => "empty_prompt",
        LlmError::InvalidParams(_) => "invalid_params",
    }
}

/// A diagnostic not produced by the kernel (parse or assembly failures).
pub(crate) fn synthetic_error(line: u32, column: u32, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        line: line.max(1),
        column,
        severity: crate::verifier::Severity::Error,
        message: message.into(),
        errored_names: Vec::new(),
    }
}
