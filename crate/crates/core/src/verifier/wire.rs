//! Line-delimited JSON protocol spoken by verification workers.
//!
//! Request: `{"id":N,"cmd":"check","imports":[..],"statement":"..","proof":".."}`
//! Response: `{"id":N,"ok":bool,"diagnostics":[{"line","col","severity","message"}],"tacticState":..,"elapsedMs":N}`

use serde::{Deserialize, Serialize};

use super::types::Severity;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireRequest {
    pub id: u64,
    pub cmd: String,
    pub imports: Vec<String>,
    pub statement: String,
    pub proof: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireDiagnostic {
    pub line: i64,
    pub col: i64,
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WireResponse {
    pub id: Option<u64>,
    pub ok: bool,
    #[serde(default)]
    pub diagnostics: Vec<WireDiagnostic>,
    #[serde(default)]
    pub tactic_state: Option<String>,
    #[serde(default)]
    pub elapsed_ms: u64,
}

/// The payload of a check, independent of transport.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckRequest {
    pub imports: Vec<String>,
    pub statement: String,
    pub proof: String,
}

impl CheckRequest {
    pub fn to_wire(&self, id: u64) -> WireRequest {
        WireRequest {
            id,
            cmd: "check".to_string(),
            imports: self.imports.clone(),
            statement: self.statement.clone(),
            proof: self.proof.clone(),
        }
    }
}

impl From<&WireRequest> for CheckRequest {
    fn from(r: &WireRequest) -> Self {
        Self { imports: r.imports.clone(), statement: r.statement.clone(), proof: r.proof.clone() }
    }
}

pub fn error_response(id: Option<u64>, message: impl Into<String>) -> WireResponse {
    WireResponse {
        id,
        ok: false,
        diagnostics: vec![WireDiagnostic { line: 1, col: 0, severity: Severity::Error, message: message.into() }],
        tactic_state: None,
        elapsed_ms: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn response_field_names_match_protocol() {
        let line = r#"{"id":7,"ok":false,"diagnostics":[{"line":3,"col":2,"severity":"error","message":"unknown identifier 'x'"}],"tacticState":"⊢ x = x","elapsedMs":12}"#;
        let r: WireResponse = serde_json::from_str(line).unwrap();
        assert_eq!(r.id, Some(7));
        assert_eq!(r.diagnostics[0].col, 2);
        assert_eq!(r.tactic_state.as_deref(), Some("⊢ x = x"));
        assert_eq!(serde_json::to_string(&r).unwrap(), line);
    }

    #[test]
    fn request_serializes_in_protocol_order() {
        let req = CheckRequest {
            imports: vec!["Mathlib".into()],
            statement: "theorem t : True".into(),
            proof: "trivial".into(),
        };
        assert_eq!(
            serde_json::to_string(&req.to_wire(1)).unwrap(),
            r#"{"id":1,"cmd":"check","imports":["Mathlib"],"statement":"theorem t : True","proof":"trivial"}"#
        );
    }
}
