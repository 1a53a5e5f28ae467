use crate::llm::{LlmError, MockLlm};
use crate::verifier::wire::WireDiagnostic;
use crate::verifier::{MockDefault, MockResponse, MockVerifier, VerificationResult};

use super::Transcript;

/// Mocks that answer exactly as the backends recorded in `transcript` did.
/// Completions are queued per `(kind, statement)`; verifier results are
/// keyed by content hash.
pub fn replay_backends(transcript: &Transcript) -> (MockLlm, MockVerifier) {
    let llm = MockLlm::new();
    for e in transcript.iter_event("completion") {
        let p = &e.payload;
        let (Some(kind), Some(name)) = (p["kind"].as_str(), p["statement"].as_str()) else { continue };
        let key = format!("{kind}/{name}");
        if p["ok"].as_bool() == Some(true) {
            llm.push(key, p["text"].as_str().unwrap_or_default());
        } else {
            let msg = p["message"].as_str().unwrap_or_default().to_string();
            let err = match p["error"].as_str() {
                Some("rate_limited") => LlmError::RateLimited(msg),
                Some("network") => LlmError::Network(msg),
                Some("context_length") => LlmError::ContextLength(msg),
                Some("config") => LlmError::Config(msg),
                _ => LlmError::ScriptExhausted(key.clone()),
            };
            llm.push_error(key, err);
        }
    }
    let mut verifier = MockVerifier::new(MockDefault::Reject);
    for e in transcript.iter_event("verify") {
        let Some(hash) = e.payload["hash"].as_str() else { continue };
        let Ok(result) = serde_json::from_value::<VerificationResult>(e.payload["result"].clone()) else { continue };
        verifier = verifier.with_hash_key(hash, to_response(&result));
    }
    (llm, verifier)
}

fn to_response(r: &VerificationResult) -> MockResponse {
    MockResponse {
        ok: r.ok,
        diagnostics: if r.timed_out {
            Vec::new()
        } else {
            r.diagnostics
                .iter()
                .map(|d| WireDiagnostic {
                    line: d.line as i64,
                    col: d.column as i64,
                    severity: d.severity,
                    message: d.message.clone(),
                })
                .collect()
        },
        tactic_state: r.tactic_state.clone(),
        // Recorded timeouts replay as timeouts.
        delay_ms: if r.timed_out { u64::MAX } else { 0 },
    }
}
