//! Declaration index over a library dump, queried by errored identifiers.

pub mod score;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::lean;
use crate::verifier::VerificationResult;
use score::NameFeatures;

pub const DEFAULT_K: usize = 5;
pub const MAX_QUERIES: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Declaration {
    pub name: String,
    pub signature: String,
    #[serde(default)]
    pub docstring: Option<String>,
    #[serde(default)]
    pub namespace: String,
}

impl Declaration {
    pub fn new(name: impl Into<String>, signature: impl Into<String>, docstring: Option<String>) -> Self {
        let name = name.into();
        let namespace = namespace_of(&name).to_string();
        Self { name, signature: signature.into(), docstring, namespace }
    }
}

/// Dot-separated prefix of `name`; empty for root-level names.
pub fn namespace_of(name: &str) -> &str {
    name.rsplit_once('.').map(|(ns, _)| ns).unwrap_or("")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalHit {
    pub decl: Declaration,
    pub score: f64,
    pub query: String,
}

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("duplicate declaration `{name}` (line {line})")]
    Duplicate { name: String, line: usize },
    #[error("malformed declaration on line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Immutable name index. Lookups are read-only and safe to share.
#[derive(Debug, Default)]
pub struct Index {
    decls: Vec<Declaration>,
    features: Vec<NameFeatures>,
    by_name: HashMap<String, usize>,
}

/// Records dropped by a lenient build.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct BuildReport {
    pub skipped: Vec<(usize, String)>,
}

fn validate(decl: &mut Declaration) -> Result<(), String> {
    if !lean::is_identifier(&decl.name) {
        return Err(format!("invalid name `{}`", decl.name));
    }
    let expected = namespace_of(&decl.name);
    if decl.namespace.is_empty() {
        decl.namespace = expected.to_string();
    } else if decl.namespace != expected {
        return Err(format!("namespace `{}` is not the prefix of `{}`", decl.namespace, decl.name));
    }
    Ok(())
}

impl Index {
    pub fn build(declarations: impl IntoIterator<Item = Declaration>) -> Result<Self, IndexError> {
        let mut index = Self::default();
        for (i, mut decl) in declarations.into_iter().enumerate() {
            validate(&mut decl).map_err(|message| IndexError::Malformed { line: i + 1, message })?;
            index.insert(decl, i + 1)?;
        }
        Ok(index)
    }

    fn insert(&mut self, decl: Declaration, line: usize) -> Result<(), IndexError> {
        if self.by_name.contains_key(&decl.name) {
            return Err(IndexError::Duplicate { name: decl.name, line });
        }
        self.by_name.insert(decl.name.clone(), self.decls.len());
        self.features.push(NameFeatures::new(&decl.name));
        self.decls.push(decl);
        Ok(())
    }

    /// Reads a JSONL dump. With `lenient`, malformed records are skipped and
    /// reported; otherwise the first one is fatal. Duplicates are always fatal.
    pub fn from_jsonl(reader: impl BufRead, lenient: bool) -> Result<(Self, BuildReport), IndexError> {
        let mut index = Self::default();
        let mut report = BuildReport::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let parsed = serde_json::from_str::<Declaration>(&line)
                .map_err(|e| e.to_string())
                .and_then(|mut d| validate(&mut d).map(|_| d));
            match parsed {
                Ok(decl) => index.insert(decl, lineno)?,
                Err(message) if lenient => {
                    tracing::warn!(line = lineno, %message, "skipping malformed declaration");
                    report.skipped.push((lineno, message));
                }
                Err(message) => return Err(IndexError::Malformed { line: lineno, message }),
            }
        }
        Ok((index, report))
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for d in &self.decls {
            serde_json::to_writer(&mut out, d)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Declaration> {
        self.by_name.get(name).map(|&i| &self.decls[i])
    }

    pub fn declarations(&self) -> &[Declaration] {
        &self.decls
    }

    /// Top-`k` declarations for `errored_name`, by descending score with ties
    /// broken by name. An exact match always ranks first with score 1.0.
    pub fn lookup(&self, errored_name: &str, k: usize) -> Vec<RetrievalHit> {
        if k == 0 || self.decls.is_empty() {
            return Vec::new();
        }
        let q = NameFeatures::new(errored_name);
        // Min-heap on rank: the root is the worst of the current top-k.
        let mut heap: BinaryHeap<Ranked> = BinaryHeap::with_capacity(k + 1);
        for (i, f) in self.features.iter().enumerate() {
            let name = self.decls[i].name.as_str();
            if heap.len() == k && name != errored_name {
                let upper = score::TRIGRAM_WEIGHT * score::jaccard(&q.trigrams, &f.trigrams)
                    + score::TOKEN_WEIGHT * score::jaccard(&q.tokens, &f.tokens)
                    + score::EDIT_WEIGHT;
                if upper < heap.peek().unwrap().score {
                    continue;
                }
            }
            let s = score::score(errored_name, &q, name, f);
            heap.push(Ranked { score: s, name: &self.decls[i].name, idx: i });
            if heap.len() > k {
                heap.pop();
            }
        }
        let mut ranked = heap.into_vec();
        ranked.sort();
        ranked
            .into_iter()
            .map(|r| RetrievalHit { decl: self.decls[r.idx].clone(), score: r.score, query: errored_name.to_string() })
            .collect()
    }
}

/// Ordering where "smaller" means better ranked: higher score, then
/// lexicographically smaller name.
#[derive(Debug)]
struct Ranked<'a> {
    score: f64,
    name: &'a str,
    idx: usize,
}

impl Ord for Ranked<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        other.score.total_cmp(&self.score).then_with(|| self.name.cmp(other.name))
    }
}

impl PartialOrd for Ranked<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Ranked<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked<'_> {}

/// Errored names across all error diagnostics, deduplicated in
/// first-occurrence order.
pub fn select_queries(result: &VerificationResult) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for d in result.errors() {
        for n in &d.errored_names {
            if !out.contains(n) {
                out.push(n.clone());
            }
        }
    }
    out
}
