//! Prompt templates for proof generation, repair, planning, and sketching.
//!
//! Sections always appear in this order, each only when populated:
//! task preamble, guidelines, problem statements, prior plan/sketch,
//! failure feedback, retrieved declarations, output format.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::retrieval::RetrievalHit;
use crate::verifier::{FormalProof, FormalStatement, VerificationResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    FormalProof,
    InformalPlan,
    FormalSketch,
    InformalizeStatement,
    Repair,
}

impl PromptKind {
    pub const ALL: [PromptKind; 5] =
        [Self::FormalProof, Self::InformalPlan, Self::FormalSketch, Self::InformalizeStatement, Self::Repair];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::FormalProof => "formal_proof",
            Self::InformalPlan => "informal_plan",
            Self::FormalSketch => "formal_sketch",
            Self::InformalizeStatement => "informalize_statement",
            Self::Repair => "repair",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    fn role(self) -> &'static str {
        match self {
            Self::FormalProof => {
                "You are an expert in Lean 4 and Mathlib. Write a complete formal proof of the theorem below."
            }
            Self::Repair => {
                "You are an expert in Lean 4 and Mathlib. The proof below was rejected by the Lean 4 checker. Use the checker's message and the retrieved declarations to write a corrected proof."
            }
            Self::InformalPlan => {
                "You are an experienced competition mathematician. Write a rigorous step-by-step natural-language proof of the theorem below that can later be turned into a formal proof sketch."
            }
            Self::FormalSketch => {
                "You are an expert in Lean 4 and Mathlib. Translate the proof plan below into a formal proof sketch in the decomposition language described in the guidelines. Each `show` step becomes a separate sub-problem."
            }
            Self::InformalizeStatement => {
                "You are an expert in Lean 4 and mathematics. Restate the Lean 4 theorem below as a precise natural-language mathematical statement."
            }
        }
    }

    fn output_format(self) -> &'static str {
        match self {
            Self::FormalProof | Self::Repair => {
                "Reply with exactly one ```lean code block containing only the tactic proof, i.e. the text that follows `:= by`. Do not restate the theorem."
            }
            Self::InformalPlan => "Reply with exactly one ```text code block containing the numbered proof plan.",
            Self::FormalSketch => {
                "Reply with exactly one ```sketch code block containing the complete `sketch ... end` block."
            }
            Self::InformalizeStatement => {
                "Reply with exactly one ```text code block containing the natural-language statement."
            }
        }
    }
}

/// Editable guideline texts. Built-in defaults are compiled from the files
/// under `data/guidelines`; [`Guidelines::from_dir`] overrides any subset at
/// run time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guidelines {
    pub formatting: String,
    pub tactics: String,
    pub lean4_only: String,
    pub dsl: String,
    pub pitfalls: String,
    pub planning: String,
}

impl Default for Guidelines {
    fn default() -> Self {
        Self {
            formatting: include_str!("../../data/guidelines/formatting.md").trim_end().to_string(),
            tactics: include_str!("../../data/guidelines/tactics.md").trim_end().to_string(),
            lean4_only: include_str!("../../data/guidelines/lean4_only.md").trim_end().to_string(),
            dsl: include_str!("../../data/guidelines/dsl.md").trim_end().to_string(),
            pitfalls: include_str!("../../data/guidelines/pitfalls.md").trim_end().to_string(),
            planning: include_str!("../../data/guidelines/planning.md").trim_end().to_string(),
        }
    }
}

impl Guidelines {
    pub fn from_dir(dir: &Path) -> std::io::Result<Self> {
        let mut g = Self::default();
        for (file, slot) in [
            ("formatting.md", &mut g.formatting),
            ("tactics.md", &mut g.tactics),
            ("lean4_only.md", &mut g.lean4_only),
            ("dsl.md", &mut g.dsl),
            ("pitfalls.md", &mut g.pitfalls),
            ("planning.md", &mut g.planning),
        ] {
            let path = dir.join(file);
            if path.exists() {
                *slot = std::fs::read_to_string(path)?.trim_end().to_string();
            }
        }
        Ok(g)
    }

    /// Fills the guideline fields of `ctx` that belong to prompts of `kind`.
    pub fn apply(&self, kind: PromptKind, ctx: &mut PromptContext) {
        match kind {
            PromptKind::FormalProof | PromptKind::Repair => {
                ctx.formatting = Some(self.formatting.clone());
                ctx.tactics = Some(self.tactics.clone());
                ctx.lean4_rules = Some(self.lean4_only.clone());
            }
            PromptKind::FormalSketch => {
                ctx.dsl_guidelines = Some(self.dsl.clone());
                ctx.pitfalls = Some(self.pitfalls.clone());
            }
            PromptKind::InformalPlan => ctx.plan_guidance = Some(self.planning.clone()),
            PromptKind::InformalizeStatement => {}
        }
    }
}

/// Everything a prompt may show. Unpopulated fields are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptContext {
    pub statement: FormalStatement,
    /// The enclosing theorem when `statement` is an extracted sub-problem.
    pub context_statement: Option<FormalStatement>,
    pub informal: Option<String>,
    pub plan: Option<String>,
    pub sketch: Option<String>,
    pub failed_proof: Option<FormalProof>,
    pub kernel_output: Option<VerificationResult>,
    pub retrieved: Vec<RetrievalHit>,
    pub unsolved_subproblems: Vec<String>,
    pub formatting: Option<String>,
    pub tactics: Option<String>,
    pub lean4_rules: Option<String>,
    pub dsl_guidelines: Option<String>,
    pub pitfalls: Option<String>,
    pub plan_guidance: Option<String>,
}

impl PromptContext {
    pub fn new(statement: FormalStatement) -> Self {
        Self {
            statement,
            context_statement: None,
            informal: None,
            plan: None,
            sketch: None,
            failed_proof: None,
            kernel_output: None,
            retrieved: Vec::new(),
            unsolved_subproblems: Vec::new(),
            formatting: None,
            tactics: None,
            lean4_rules: None,
            dsl_guidelines: None,
            pitfalls: None,
            plan_guidance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("{kind} prompt requires `{field}`")]
    MissingField { kind: &'static str, field: &'static str },
}

fn present(s: &Option<String>) -> Option<&str> {
    s.as_deref().filter(|t| !t.trim().is_empty())
}

fn lean_block(out: &mut String, statement: &FormalStatement) {
    out.push_str("```lean\n");
    for import in &statement.imports {
        let _ = writeln!(out, "import {import}");
    }
    if !statement.imports.is_empty() {
        out.push('\n');
    }
    let _ = writeln!(out, "{}", statement.source);
    out.push_str("```\n");
}

/// Renders the prompt for `kind`. Pure: the same inputs give the same bytes.
pub fn render_prompt(kind: PromptKind, ctx: &PromptContext) -> Result<String, RenderError> {
    let missing = |field| RenderError::MissingField { kind: kind.as_str(), field };
    match kind {
        PromptKind::Repair => {
            if ctx.failed_proof.is_none() {
                return Err(missing("failed_proof"));
            }
            if ctx.kernel_output.is_none() {
                return Err(missing("kernel_output"));
            }
        }
        PromptKind::FormalSketch if present(&ctx.plan).is_none() => return Err(missing("plan")),
        _ => {}
    }

    let mut out = String::new();
    // The first line doubles as a routing key for scripted backends.
    let _ = writeln!(out, "### Task: {} ({})", kind.as_str(), ctx.statement.name);
    let _ = writeln!(out, "{}", kind.role());

    let guidelines = [
        ("Formatting conventions", &ctx.formatting),
        ("Effective tactics", &ctx.tactics),
        ("Lean 4 only", &ctx.lean4_rules),
        ("Decomposition language", &ctx.dsl_guidelines),
        ("Auto-formalization pitfalls", &ctx.pitfalls),
        ("Planning guidance", &ctx.plan_guidance),
    ];
    if guidelines.iter().any(|(_, v)| present(v).is_some()) {
        out.push_str("\n## Guidelines\n");
        for (title, value) in guidelines {
            if let Some(text) = present(value) {
                let _ = write!(out, "\n### {title}\n{text}\n");
            }
        }
    }

    out.push_str("\n## Problem\n\n### Formal statement\n");
    lean_block(&mut out, &ctx.statement);
    if let Some(parent) = &ctx.context_statement {
        out.push_str("\n### Overall theorem (context only; prove the statement above)\n");
        lean_block(&mut out, parent);
    }
    if let Some(informal) = present(&ctx.informal) {
        let _ = write!(out, "\n### Informal statement\n{informal}\n");
    }

    if present(&ctx.plan).is_some() || present(&ctx.sketch).is_some() {
        out.push_str("\n## Prior work\n");
        if let Some(plan) = present(&ctx.plan) {
            let _ = write!(out, "\n### Informal proof plan\n{plan}\n");
        }
        if let Some(sketch) = present(&ctx.sketch) {
            let _ = write!(out, "\n### Previous formal sketch\n```sketch\n{sketch}\n```\n");
        }
    }

    let has_feedback =
        ctx.failed_proof.is_some() || ctx.kernel_output.is_some() || !ctx.unsolved_subproblems.is_empty();
    if has_feedback {
        out.push_str("\n## Feedback\n");
        if let Some(proof) = &ctx.failed_proof {
            let _ = write!(out, "\n### Failed proof\n```lean\n{}\n```\n", proof.source);
        }
        if let Some(result) = &ctx.kernel_output {
            out.push_str("\n### Message from Lean 4 kernel\n");
            if result.diagnostics.is_empty() {
                out.push_str("(no diagnostics)\n");
            }
            for d in &result.diagnostics {
                let sev = match d.severity {
                    crate::verifier::Severity::Error => "error",
                    crate::verifier::Severity::Warning => "warning",
                    crate::verifier::Severity::Info => "info",
                };
                let _ = writeln!(out, "line {}, column {} ({sev}): {}", d.line, d.column, d.message);
            }
            if let Some(state) = result.tactic_state.as_deref().filter(|s| !s.trim().is_empty()) {
                let _ = write!(out, "\n### Tactic state\n```\n{state}\n```\n");
            }
        }
        if !ctx.unsolved_subproblems.is_empty() {
            out.push_str("\n### Unsolved sub-problems\nThese steps of the previous sketch could not be proved; decompose them differently or into smaller steps.\n");
            for s in &ctx.unsolved_subproblems {
                let _ = writeln!(out, "- {s}");
            }
        }
    }

    if kind == PromptKind::Repair || !ctx.retrieved.is_empty() {
        out.push_str("\n## Retrieved Information\n");
        if ctx.retrieved.is_empty() {
            out.push_str("none\n");
        } else {
            out.push_str("Library declarations whose names resemble identifiers the checker could not resolve:\n");
            for hit in &ctx.retrieved {
                let _ = writeln!(out, "- `{}` : {}", hit.decl.name, hit.decl.signature);
                if let Some(doc) = hit.decl.docstring.as_deref().filter(|d| !d.trim().is_empty()) {
                    let _ = writeln!(out, "  {}", doc.trim());
                }
            }
        }
    }

    let _ = write!(out, "\n## Output format\n{}\n", kind.output_format());
    Ok(out)
}

/// Recovers `(kind, statement name)` from the first line of a rendered prompt.
pub fn routing_key(prompt: &str) -> Option<(PromptKind, &str)> {
    let line = prompt.lines().next()?.strip_prefix("### Task: ")?;
    let (kind, rest) = line.split_once(" (")?;
    Some((PromptKind::parse(kind)?, rest.strip_suffix(')')?))
}
