//! Deterministic scripted verifier used by tests and the mock worker.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::types::{content_hash, Severity};
use super::wire::{error_response, CheckRequest, WireDiagnostic, WireRequest, WireResponse};
use super::{VerifierBackend, VerifierError};
use crate::lean;

/// Behavior for requests no script entry matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MockDefault {
    Accept,
    #[default]
    Reject,
    /// Rule-based elaboration: every identifier in the header must be bound
    /// by an earlier binder or be a known global; proofs are accepted unless
    /// empty or containing a placeholder.
    Elaborate,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MockResponse {
    pub ok: bool,
    #[serde(default)]
    pub diagnostics: Vec<WireDiagnostic>,
    #[serde(default)]
    pub tactic_state: Option<String>,
    /// Simulated latency; exceeding the caller's timeout yields a timeout.
    #[serde(default)]
    pub delay_ms: u64,
}

impl MockResponse {
    pub fn pass() -> Self {
        Self { ok: true, ..Self::default() }
    }

    pub fn fail(message: impl Into<String>) -> Self {
        Self {
            ok: false,
            diagnostics: vec![WireDiagnostic { line: 1, col: 0, severity: Severity::Error, message: message.into() }],
            ..Self::default()
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ScriptLine {
    Default {
        default: MockDefault,
        #[serde(default)]
        known: Vec<String>,
    },
    Hash {
        hash: String,
        #[serde(flatten)]
        response: MockResponse,
    },
    Attempt {
        statement: String,
        attempt: u32,
        #[serde(flatten)]
        response: MockResponse,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum MockScriptError {
    #[error("reading mock script: {0}")]
    Io(#[from] std::io::Error),
    #[error("mock script line {line}: {message}")]
    Malformed { line: usize, message: String },
}

const KNOWN_GLOBALS: &[&str] = &[
    "abs", "max", "min", "gcd", "lcm", "id", "sqrt", "exp", "log", "sin", "cos", "tan", "deriv", "choose", "fib",
    "floor", "ceil", "round", "digits", "divisors", "card", "range", "norm", "dist", "succ", "pred", "fract", "logb",
    "arctan", "cexp", "true", "false", "default", "rfl",
];

/// Scripted verifier. Lookup order: content hash, then `(statement name,
/// attempt index)`, then the default behavior. Attempt indices are 1-based
/// and count every request made for a statement name.
#[derive(Debug, Default)]
pub struct MockVerifier {
    by_hash: HashMap<String, MockResponse>,
    by_attempt: HashMap<(String, u32), MockResponse>,
    attempts: Mutex<HashMap<String, u32>>,
    default: MockDefault,
    known: BTreeSet<String>,
    calls: AtomicU64,
}

impl MockVerifier {
    pub fn new(default: MockDefault) -> Self {
        Self { default, known: KNOWN_GLOBALS.iter().map(|s| s.to_string()).collect(), ..Self::default() }
    }

    pub fn accept_all() -> Self {
        Self::new(MockDefault::Accept)
    }

    pub fn with_hash(mut self, statement_source: &str, proof: &str, response: MockResponse) -> Self {
        self.by_hash.insert(content_hash(statement_source, proof), response);
        self
    }

    pub fn with_hash_key(mut self, hash: impl Into<String>, response: MockResponse) -> Self {
        self.by_hash.insert(hash.into(), response);
        self
    }

    pub fn with_attempt(mut self, statement: impl Into<String>, attempt: u32, response: MockResponse) -> Self {
        self.by_attempt.insert((statement.into(), attempt), response);
        self
    }

    pub fn with_known(mut self, names: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.known.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn from_jsonl(text: &str) -> Result<Self, MockScriptError> {
        let mut mock = Self::new(MockDefault::Reject);
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed: ScriptLine = serde_json::from_str(line)
                .map_err(|e| MockScriptError::Malformed { line: i + 1, message: e.to_string() })?;
            match parsed {
                ScriptLine::Default { default, known } => {
                    mock.default = default;
                    mock.known.extend(known);
                }
                ScriptLine::Hash { hash, response } => {
                    mock.by_hash.insert(hash, response);
                }
                ScriptLine::Attempt { statement, attempt, response } => {
                    if attempt == 0 {
                        return Err(MockScriptError::Malformed { line: i + 1, message: "attempt is 1-based".into() });
                    }
                    mock.by_attempt.insert((statement, attempt), response);
                }
            }
        }
        Ok(mock)
    }

    pub fn from_path(path: &Path) -> Result<Self, MockScriptError> {
        Self::from_jsonl(&std::fs::read_to_string(path)?)
    }

    /// Number of checks served so far.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    fn lookup(&self, req: &CheckRequest) -> MockResponse {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let name = lean::parse_header(&req.statement).map(|h| h.name).unwrap_or_default();
        let attempt = {
            let mut attempts = self.attempts.lock().unwrap();
            let n = attempts.entry(name.clone()).or_insert(0);
            *n += 1;
            *n
        };
        if let Some(r) = self.by_hash.get(&content_hash(&req.statement, &req.proof)) {
            return r.clone();
        }
        if let Some(r) = self.by_attempt.get(&(name, attempt)) {
            return r.clone();
        }
        match self.default {
            MockDefault::Accept => MockResponse::pass(),
            MockDefault::Reject => MockResponse::fail("mock verifier: proof rejected"),
            MockDefault::Elaborate => self.elaborate(req),
        }
    }

    fn resolves(&self, id: &str, bound: &[String]) -> bool {
        let head = lean::head_segment(id);
        if bound.iter().any(|b| b == head) || self.known.contains(id) || self.known.contains(head) {
            return true;
        }
        let first = head.chars().next().unwrap_or('a');
        first.is_ascii_uppercase() || ('\u{2100}'..='\u{214f}').contains(&first)
    }

    fn elaborate(&self, req: &CheckRequest) -> MockResponse {
        let header = match lean::parse_header(&req.statement) {
            Ok(h) => h,
            Err(e) => return MockResponse::fail(format!("unexpected token: {e}")),
        };
        let mut diagnostics = Vec::new();
        let mut unknown = |id: &str| {
            diagnostics.push(WireDiagnostic {
                line: 1,
                col: 0,
                severity: Severity::Error,
                message: format!("unknown identifier '{id}'"),
            })
        };
        let mut bound: Vec<String> = Vec::new();
        for b in &header.binders {
            if let Some(ty) = &b.ty {
                for id in lean::free_full_identifiers(ty) {
                    if !self.resolves(&id, &bound) {
                        unknown(&id);
                    }
                }
            }
            bound.extend(b.names.iter().cloned());
        }
        for id in lean::free_full_identifiers(&header.goal) {
            if !self.resolves(&id, &bound) {
                unknown(&id);
            }
        }
        if req.proof.trim().is_empty() {
            diagnostics.push(WireDiagnostic {
                line: 2,
                col: 0,
                severity: Severity::Error,
                message: "expected tactic".into(),
            });
        } else if lean::contains_placeholder(&req.proof) {
            diagnostics.push(WireDiagnostic {
                line: 1,
                col: 0,
                severity: Severity::Warning,
                message: "declaration uses 'sorry'".into(),
            });
        }
        let ok = !diagnostics.iter().any(|d| d.severity == Severity::Error);
        MockResponse { ok, diagnostics, tactic_state: None, delay_ms: 0 }
    }

    fn respond(&self, req: &CheckRequest, id: Option<u64>) -> (WireResponse, u64) {
        let r = self.lookup(req);
        let resp =
            WireResponse { id, ok: r.ok, diagnostics: r.diagnostics, tactic_state: r.tactic_state, elapsed_ms: 0 };
        (resp, r.delay_ms)
    }
}

impl VerifierBackend for MockVerifier {
    fn check(&self, request: &CheckRequest, timeout: Duration) -> Result<WireResponse, VerifierError> {
        let (resp, delay) = self.respond(request, None);
        if Duration::from_millis(delay) > timeout {
            return Err(VerifierError::Timeout(timeout));
        }
        Ok(resp)
    }
}

/// Serves the wire protocol from a mock script: one response line per
/// request line. Responses with a scripted delay are written from a
/// separate thread, so they may arrive out of order.
pub fn serve_mock<R: BufRead, W: Write + Send>(mock: &MockVerifier, input: R, output: W) -> std::io::Result<()> {
    let out = Mutex::new(output);
    let write_line = |resp: &WireResponse| -> std::io::Result<()> {
        let mut w = out.lock().unwrap();
        serde_json::to_writer(&mut *w, resp)?;
        w.write_all(b"\n")?;
        w.flush()
    };
    std::thread::scope(|scope| -> std::io::Result<()> {
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let req: WireRequest = match serde_json::from_str(&line) {
                Ok(r) => r,
                Err(e) => {
                    write_line(&error_response(None, format!("malformed request: {e}")))?;
                    continue;
                }
            };
            if req.cmd != "check" {
                write_line(&error_response(Some(req.id), format!("unknown command '{}'", req.cmd)))?;
                continue;
            }
            let (resp, delay) = mock.respond(&CheckRequest::from(&req), Some(req.id));
            if delay == 0 {
                write_line(&resp)?;
            } else {
                let write_line = &write_line;
                scope.spawn(move || {
                    std::thread::sleep(Duration::from_millis(delay));
                    let _ = write_line(&resp);
                });
            }
        }
        Ok(())
    })
}
