//! Kernel verification: backends, wire protocol, and result post-processing.

mod mock;
mod names;
mod process;
mod types;
pub mod wire;

use std::sync::Arc;
use std::time::Duration;

pub use mock::{serve_mock, MockDefault, MockResponse, MockScriptError, MockVerifier};
pub use names::NamePatterns;
pub use process::{WorkerCommand, WorkerConnection, WorkerPool};
pub use types::{
    content_hash, Diagnostic, FormalProof, FormalStatement, ProofOrigin, Severity, StatementError, VerificationResult,
};
pub use wire::CheckRequest;

use wire::WireResponse;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

/// Token used as the proof body when only the statement is elaborated.
pub const PLACEHOLDER_BODY: &str = "sorry";

const SORRY_WARNING: &str = "declaration uses 'sorry'";

#[derive(Debug, Clone, thiserror::Error)]
pub enum VerifierError {
    /// The worker is gone or could not be started. Retryable infrastructure failure.
    #[error("verification backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("verification timed out after {0:?}")]
    Timeout(Duration),
}

/// A transport that can elaborate one statement/proof pair.
pub trait VerifierBackend: Send + Sync {
    fn check(&self, request: &CheckRequest, timeout: Duration) -> Result<WireResponse, VerifierError>;
}

/// How `sorry` warnings are treated when post-processing a response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaceholderPolicy {
    /// A placeholder in a proof is a failure.
    Reject,
    /// The placeholder warning is dropped; only well-formedness counts.
    Ignore,
}

/// Front end over a [`VerifierBackend`] that turns raw worker responses into
/// [`VerificationResult`]s. Proof errors are data; only infrastructure
/// failures surface as `Err`.
#[derive(Clone)]
pub struct Verifier {
    backend: Arc<dyn VerifierBackend>,
    patterns: NamePatterns,
}

impl Verifier {
    pub fn new(backend: Arc<dyn VerifierBackend>) -> Self {
        Self { backend, patterns: NamePatterns::default() }
    }

    pub fn with_patterns(mut self, patterns: NamePatterns) -> Self {
        self.patterns = patterns;
        self
    }

    pub fn patterns(&self) -> &NamePatterns {
        &self.patterns
    }

    pub fn verify(
        &self,
        statement: &FormalStatement,
        proof: &FormalProof,
        timeout: Duration,
    ) -> Result<VerificationResult, VerifierError> {
        self.check_text(statement, &proof.source, PlaceholderPolicy::Reject, timeout)
    }

    /// Elaborates the statement with a placeholder body.
    pub fn check_statement(
        &self,
        statement: &FormalStatement,
        timeout: Duration,
    ) -> Result<VerificationResult, VerifierError> {
        self.check_text(statement, PLACEHOLDER_BODY, PlaceholderPolicy::Ignore, timeout)
    }

    pub fn check_text(
        &self,
        statement: &FormalStatement,
        proof: &str,
        policy: PlaceholderPolicy,
        timeout: Duration,
    ) -> Result<VerificationResult, VerifierError> {
        let request = CheckRequest {
            imports: statement.imports.clone(),
            statement: statement.source.clone(),
            proof: proof.to_string(),
        };
        match self.backend.check(&request, timeout) {
            Ok(raw) => Ok(self.interpret(raw, policy)),
            Err(VerifierError::Timeout(t)) => Ok(VerificationResult {
                ok: false,
                diagnostics: vec![Diagnostic::error(format!("verification timed out after {} ms", t.as_millis()))],
                tactic_state: None,
                elapsed_ms: t.as_millis() as u64,
                timed_out: true,
            }),
            Err(e) => Err(e),
        }
    }

    fn interpret(&self, raw: WireResponse, policy: PlaceholderPolicy) -> VerificationResult {
        let mut diagnostics = Vec::with_capacity(raw.diagnostics.len());
        for d in raw.diagnostics {
            let mut severity = d.severity;
            if d.message.contains(SORRY_WARNING) && severity != Severity::Error {
                match policy {
                    PlaceholderPolicy::Ignore => continue,
                    PlaceholderPolicy::Reject => severity = Severity::Error,
                }
            }
            let errored_names =
                if severity == Severity::Error { self.patterns.extract(&d.message) } else { Vec::new() };
            diagnostics.push(Diagnostic {
                line: d.line.max(1) as u32,
                column: d.col.max(0) as u32,
                severity,
                message: d.message,
                errored_names,
            });
        }
        if !raw.ok && !diagnostics.iter().any(Diagnostic::is_error) {
            diagnostics.push(Diagnostic::error("verifier reported failure without an error diagnostic"));
        }
        let ok = !diagnostics.iter().any(Diagnostic::is_error);
        VerificationResult {
            ok,
            diagnostics,
            tactic_state: raw.tactic_state,
            elapsed_ms: raw.elapsed_ms,
            timed_out: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::wire::WireDiagnostic;
    use super::*;

    struct Fixed(WireResponse);
    impl VerifierBackend for Fixed {
        fn check(&self, _: &CheckRequest, _: Duration) -> Result<WireResponse, VerifierError> {
            Ok(self.0.clone())
        }
    }

    struct Slow;
    impl VerifierBackend for Slow {
        fn check(&self, _: &CheckRequest, t: Duration) -> Result<WireResponse, VerifierError> {
            Err(VerifierError::Timeout(t))
        }
    }

    fn st() -> FormalStatement {
        FormalStatement::from_header("th : 1 = 1", vec![]).unwrap()
    }

    fn response(ok: bool, diags: Vec<(Severity, &str)>) -> WireResponse {
        WireResponse {
            id: Some(1),
            ok,
            diagnostics: diags
                .into_iter()
                .map(|(severity, m)| WireDiagnostic { line: 0, col: -3, severity, message: m.into() })
                .collect(),
            tactic_state: None,
            elapsed_ms: 5,
        }
    }

    #[test]
    fn sorry_warning_fails_a_proof_but_not_a_statement_check() {
        let v = Verifier::new(Arc::new(Fixed(response(true, vec![(Severity::Warning, "declaration uses 'sorry'")]))));
        let proof = v.verify(&st(), &FormalProof::new("sorry", ProofOrigin::Direct), DEFAULT_TIMEOUT).unwrap();
        assert!(!proof.ok);
        let stmt = v.check_statement(&st(), DEFAULT_TIMEOUT).unwrap();
        assert!(stmt.ok);
        assert!(stmt.diagnostics.is_empty());
    }

    #[test]
    fn positions_are_clamped_and_names_extracted() {
        let v = Verifier::new(Arc::new(Fixed(response(false, vec![(Severity::Error, "unknown identifier 'foo'")]))));
        let r = v.verify(&st(), &FormalProof::new("exact foo", ProofOrigin::Direct), DEFAULT_TIMEOUT).unwrap();
        assert_eq!((r.diagnostics[0].line, r.diagnostics[0].column), (1, 0));
        assert_eq!(r.diagnostics[0].errored_names, vec!["foo"]);
    }

    #[test]
    fn ok_always_agrees_with_error_diagnostics() {
        let v = Verifier::new(Arc::new(Fixed(response(true, vec![(Severity::Error, "boom")]))));
        assert!(!v.check_statement(&st(), DEFAULT_TIMEOUT).unwrap().ok);
        let v = Verifier::new(Arc::new(Fixed(response(false, vec![(Severity::Info, "note")]))));
        let r = v.check_statement(&st(), DEFAULT_TIMEOUT).unwrap();
        assert!(!r.ok);
        assert!(r.errors().count() == 1);
    }

    #[test]
    fn timeouts_become_failed_results() {
        let v = Verifier::new(Arc::new(Slow));
        let r = v.verify(&st(), &FormalProof::new("rfl", ProofOrigin::Direct), Duration::from_millis(250)).unwrap();
        assert!(r.timed_out);
        assert!(!r.ok);
        assert!(r.first_error().unwrap().message.contains("timed out"));
    }
}
