use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::lean::{self, Token};
use crate::orchestrator::ProblemInstance;
use crate::verifier::{FormalStatement, StatementError};

/// One line of a benchmark file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkEntry {
    pub id: String,
    /// Preamble: `import`, `open`, and `set_option` lines.
    #[serde(default)]
    pub header: String,
    pub statement: String,
    #[serde(default)]
    pub informal: Option<String>,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkProblem {
    pub id: String,
    pub header: String,
    pub statement: FormalStatement,
    pub informal: Option<String>,
    pub tags: Vec<String>,
}

impl BenchmarkProblem {
    pub fn instance(&self) -> ProblemInstance {
        ProblemInstance { id: self.id.clone(), statement: self.statement.clone(), informal: self.informal.clone() }
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchmarkError {
    #[error("reading benchmark: {0}")]
    Io(#[from] std::io::Error),
    #[error("benchmark line {line} ({id}): {message}")]
    Malformed { line: usize, id: String, message: String },
    #[error("benchmark line {line}: duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },
}

/// Module names from the `import` lines of a preamble.
pub fn preamble_imports(header: &str) -> Vec<String> {
    header
        .lines()
        .filter_map(|l| l.trim().strip_prefix("import "))
        .flat_map(|rest| rest.split_whitespace().map(str::to_string))
        .collect()
}

impl BenchmarkEntry {
    pub fn into_problem(self) -> Result<BenchmarkProblem, StatementError> {
        let statement = FormalStatement::from_header(&self.statement, preamble_imports(&self.header))?;
        let mut tags = self.tags;
        // The IMO subset is identified by id prefix.
        if self.id.starts_with("imo") && !tags.iter().any(|t| t == "imo") {
            tags.push("imo".into());
        }
        Ok(BenchmarkProblem { id: self.id, header: self.header, statement, informal: self.informal, tags })
    }
}

pub fn parse_benchmark(text: &str) -> Result<Vec<BenchmarkProblem>, BenchmarkError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let entry: BenchmarkEntry = serde_json::from_str(line).map_err(|e| BenchmarkError::Malformed {
            line: line_no,
            id: serde_json::from_str::<serde_json::Value>(line)
                .ok()
                .and_then(|v| v["id"].as_str().map(str::to_string))
                .unwrap_or_else(|| "?".into()),
            message: e.to_string(),
        })?;
        if !seen.insert(entry.id.clone()) {
            return Err(BenchmarkError::DuplicateId { line: line_no, id: entry.id });
        }
        let id = entry.id.clone();
        let problem = entry.into_problem().map_err(|e| BenchmarkError::Malformed {
            line: line_no,
            id,
            message: e.to_string(),
        })?;
        out.push(problem);
    }
    Ok(out)
}

pub fn load_benchmark(path: &Path) -> Result<Vec<BenchmarkProblem>, BenchmarkError> {
    parse_benchmark(&std::fs::read_to_string(path)?)
}

pub fn filter_tag<'a>(problems: &'a [BenchmarkProblem], tag: &str) -> Vec<&'a BenchmarkProblem> {
    problems.iter().filter(|p| p.has_tag(tag)).collect()
}

const PREAMBLE_KEYWORDS: &[&str] = &["import", "open", "set_option"];

/// Converts a Lean file of `theorem ... := by sorry` declarations (the
/// miniF2F Lean 4 layout) into benchmark entries. The preamble is every
/// `import`/`open`/`set_option` line before the first declaration; a doc
/// comment directly above a theorem becomes its informal statement.
pub fn convert_lean_file(src: &str, tags: &[String]) -> Vec<BenchmarkEntry> {
    let lines: Vec<&str> = src.lines().collect();
    let starts: Vec<usize> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| l.starts_with("theorem ") || l.starts_with("lemma "))
        .map(|(i, _)| i)
        .collect();
    let Some(&first) = starts.first() else {
        return Vec::new();
    };
    let header = lines[..first]
        .iter()
        .filter(|l| PREAMBLE_KEYWORDS.iter().any(|k| l.trim_start().starts_with(&format!("{k} "))))
        .map(|l| l.trim())
        .collect::<Vec<_>>()
        .join("\n");

    let mut out = Vec::new();
    let mut prev_end = 0;
    for (k, &start) in starts.iter().enumerate() {
        let end = starts.get(k + 1).copied().unwrap_or(lines.len());
        let decl = lines[start..end].join("\n");
        let statement = match lean::top_level_tokens(&decl).into_iter().find(|t| t.token == Token::Symbol(":=")) {
            Some(t) => decl[..t.start].trim().to_string(),
            None => decl.trim().to_string(),
        };
        let informal = doc_comment(&lines[prev_end..start].join("\n"));
        prev_end = end;
        let Ok(header_parsed) = lean::parse_header(&statement) else {
            continue;
        };
        out.push(BenchmarkEntry {
            id: header_parsed.name,
            header: header.clone(),
            statement: lean::normalize_ws(&statement),
            informal,
            tags: tags.to_vec(),
        });
    }
    out
}

/// The last `/-- ... -/` block in `text`, if it ends the text.
fn doc_comment(text: &str) -> Option<String> {
    let trimmed = text.trim_end();
    let body = trimmed.strip_suffix("-/")?;
    let open = body.rfind("/--")?;
    let doc = body[open + 3..].trim();
    (!doc.is_empty()).then(|| doc.to_string())
}
