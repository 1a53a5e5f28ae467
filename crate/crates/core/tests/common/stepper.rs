//! A stateless model and verifier pair whose outcome depends only on the
//! (m, n) schedule: each repair improves the failed proof by one step.

use std::sync::Arc;
use std::time::Duration;

use leanagent_core::lean;
use leanagent_core::llm::prompt::routing_key;
use leanagent_core::llm::{CompletionParams, Guidelines, LanguageModel, LlmError, PromptKind};
use leanagent_core::orchestrator::{Backends, FixedClock};
use leanagent_core::retrieval::Index;
use leanagent_core::verifier::wire::{error_response, WireResponse};
use leanagent_core::verifier::{CheckRequest, Verifier, VerifierBackend, VerifierError};

/// Fresh attempts start at `attempt_1`; a repair of `attempt_k` returns
/// `attempt_{k+1}`.
pub struct Stepper;

fn highest_attempt(text: &str) -> u32 {
    text.match_indices("attempt_")
        .filter_map(|(i, m)| {
            let digits: String = text[i + m.len()..].chars().take_while(char::is_ascii_digit).collect();
            digits.parse().ok()
        })
        .max()
        .unwrap_or(0)
}

impl LanguageModel for Stepper {
    fn complete(&self, prompt: &str, _: &CompletionParams) -> Result<String, LlmError> {
        Ok(match routing_key(prompt).map(|(k, _)| k) {
            Some(PromptKind::FormalProof) => "```lean\nattempt_1\n```".into(),
            Some(PromptKind::Repair) => format!("```lean\nattempt_{}\n```", highest_attempt(prompt) + 1),
            Some(PromptKind::InformalizeStatement) => "```text\nA statement.\n```".into(),
            _ => "nothing useful".into(),
        })
    }
}

/// Accepts `attempt_k` for theorem `needN_*` when `k >= N`.
pub struct StepVerifier;

pub fn needed(statement: &str) -> u32 {
    let name = lean::parse_header(statement).map(|h| h.name).unwrap_or_default();
    name.strip_prefix("need").and_then(|r| r.split('_').next()).and_then(|d| d.parse().ok()).unwrap_or(u32::MAX)
}

impl VerifierBackend for StepVerifier {
    fn check(&self, req: &CheckRequest, _: Duration) -> Result<WireResponse, VerifierError> {
        if highest_attempt(&req.proof) >= needed(&req.statement) {
            Ok(WireResponse { id: None, ok: true, diagnostics: vec![], tactic_state: None, elapsed_ms: 1 })
        } else {
            Ok(error_response(None, "unsolved goals"))
        }
    }
}

/// Backends around [`StepVerifier`] with a fixed clock, so runs are reproducible byte for byte.
pub struct StepEnv<L> {
    pub llm: L,
    pub verifier: Verifier,
    pub index: Index,
    pub guidelines: Guidelines,
    pub clock: FixedClock,
    pub params: CompletionParams,
}

impl<L: LanguageModel> StepEnv<L> {
    pub fn new(llm: L) -> Self {
        Self {
            llm,
            verifier: Verifier::new(Arc::new(StepVerifier)),
            index: Index::default(),
            guidelines: Guidelines::default(),
            clock: FixedClock(5),
            params: CompletionParams::default(),
        }
    }

    pub fn backends(&self) -> Backends<'_> {
        Backends::new(&self.llm, &self.verifier, &self.index, &self.guidelines, &self.clock, &self.params)
    }
}
