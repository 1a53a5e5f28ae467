//! The decomposition language: a line-oriented sketch of a proof as a list
//! of hypotheses, abbreviations, and intermediate claims with proof holes.
//!
//! ```text
//! theorem th (a : ℤ) : a > 0 → a ≥ 0
//!
//! sketch th
//!   suppose h : a > 0
//!   define y : ℤ := a + 1
//!   show s1 : y > 0 by ?
//!   show s2 : a ≥ 0 after s1 by ?
//!   conclude
//! end
//! ```
//!
//! Expressions are kept as whitespace-normalized text; only the kernel
//! checks them.

mod consolidate;
mod extract;
mod parser;
mod printer;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::verifier::{FormalProof, FormalStatement};

pub use consolidate::{consolidate, consolidate_with, skeleton, ConsolidateError, ConsolidateOptions};
pub use extract::{extract_subproblems, infer_define_types, ExtractError, SubProblem};
pub use parser::{parse, parse_for, parse_with, ParseError, ParseErrorKind, ParseOptions};
pub use printer::{print, print_block};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShowBody {
    Hole,
    /// Tactic text, possibly spanning several lines, with common
    /// indentation removed.
    Proof(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    Suppose {
        label: String,
        type_expr: String,
    },
    Define {
        name: String,
        /// Annotated, or filled in later from the kernel's tactic state.
        ty: Option<String>,
        body_expr: String,
    },
    ShowBy {
        label: String,
        goal_expr: String,
        body: ShowBody,
        /// `None` when `after` is omitted: every earlier `show` is available.
        depends_on: Option<Vec<String>>,
    },
}

impl Step {
    pub fn label(&self) -> &str {
        match self {
            Step::Suppose { label, .. } | Step::ShowBy { label, .. } => label,
            Step::Define { name, .. } => name,
        }
    }

    pub fn is_show(&self) -> bool {
        matches!(self, Step::ShowBy { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SketchAst {
    pub theorem_ref: FormalStatement,
    pub steps: Vec<Step>,
    pub concluded: bool,
}

impl SketchAst {
    pub fn show_labels(&self) -> Vec<&str> {
        self.steps.iter().filter(|s| s.is_show()).map(Step::label).collect()
    }

    /// Labels of the `show` steps that step `i` may use, in order.
    pub fn dependencies(&self, i: usize) -> Vec<&str> {
        match &self.steps[i] {
            Step::ShowBy { depends_on: Some(deps), .. } => deps.iter().map(String::as_str).collect(),
            _ => self.steps[..i].iter().filter(|s| s.is_show()).map(Step::label).collect(),
        }
    }

    /// Proofs written inline in the sketch (`show l : g by <tactics>`).
    pub fn inline_proofs(&self) -> BTreeMap<String, FormalProof> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                Step::ShowBy { label, body: ShowBody::Proof(p), .. } => {
                    Some((label.clone(), FormalProof::new(p.clone(), crate::verifier::ProofOrigin::Direct)))
                }
                _ => None,
            })
            .collect()
    }
}
