use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::lean::{self, HeaderError};
use crate::verifier::{FormalProof, ProofOrigin};

use super::extract::{definition_eq, matches_binder};
use super::{ShowBody, SketchAst, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConsolidateOptions {
    /// Fill holes with `sorry` and accept placeholder tokens in proofs.
    pub allow_placeholders: bool,
    /// Require the last `show` goal to equal the remaining theorem goal.
    pub require_goal_match: bool,
    /// Emit untyped definitions and a `trace_state` so the kernel reports
    /// the inferred types.
    pub trace_untyped: bool,
}

impl Default for ConsolidateOptions {
    fn default() -> Self {
        Self { allow_placeholders: false, require_goal_match: true, trace_untyped: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConsolidateError {
    #[error("sketch is not concluded")]
    NotConcluded,
    #[error("sketch has no show steps")]
    NoShowSteps,
    #[error("no proof supplied for `{0}`")]
    MissingProof(String),
    #[error("proof of `{0}` contains a placeholder")]
    PlaceholderInProof(String),
    #[error("type of `{0}` is unknown")]
    MissingDefineType(String),
    #[error("cannot introduce `{label}`: goal `{goal}` has no premise or universal quantifier")]
    CannotIntroduce { label: String, goal: String },
    #[error("last show goal `{found}` does not match the theorem goal `{expected}`")]
    GoalMismatch { expected: String, found: String },
    #[error("theorem header: {0}")]
    Header(#[from] HeaderError),
}

fn push_have(out: &mut String, label: &str, goal: &str, proof: &str) {
    let proof = proof.trim_matches('\n');
    if proof.contains('\n') {
        let _ = writeln!(out, "have {label} : {goal} := by");
        for line in proof.lines() {
            if line.trim().is_empty() {
                out.push('\n');
            } else {
                let _ = writeln!(out, "  {line}");
            }
        }
    } else {
        let _ = writeln!(out, "have {label} : {goal} := by {}", proof.trim());
    }
}

/// Assembles a tactic proof of the sketched theorem from one proof per
/// `show` label. The result must still be checked by the kernel.
pub fn consolidate(ast: &SketchAst, proofs: &BTreeMap<String, FormalProof>) -> Result<FormalProof, ConsolidateError> {
    let text = consolidate_with(ast, proofs, ConsolidateOptions::default())?;
    Ok(FormalProof::new(text, ProofOrigin::Consolidation))
}

/// The sketch with every hole closed by `sorry`, used to check that the
/// decomposition is well formed before any sub-problem is attempted.
pub fn skeleton(ast: &SketchAst, require_goal_match: bool) -> Result<String, ConsolidateError> {
    let opts = ConsolidateOptions { allow_placeholders: true, require_goal_match, trace_untyped: true };
    consolidate_with(ast, &BTreeMap::new(), opts)
}

pub fn consolidate_with(
    ast: &SketchAst,
    proofs: &BTreeMap<String, FormalProof>,
    opts: ConsolidateOptions,
) -> Result<String, ConsolidateError> {
    if !ast.concluded && !opts.allow_placeholders {
        return Err(ConsolidateError::NotConcluded);
    }
    let header = ast.theorem_ref.header()?;
    let mut goal = header.goal.clone();
    let mut out = String::new();
    let mut last_show: Option<(&str, &str)> = None;
    let mut untyped = false;
    for step in &ast.steps {
        match step {
            Step::Suppose { label, type_expr } => {
                if matches_binder(&header, label, type_expr) {
                    continue;
                }
                let (premise, rest) = match lean::split_forall(&goal) {
                    Some((var, ty, rest)) if var == *label => (ty, rest),
                    _ => match lean::split_implication(&goal) {
                        Some((p, rest)) => (Some(p), rest),
                        None => {
                            return Err(ConsolidateError::CannotIntroduce { label: label.clone(), goal: goal.clone() })
                        }
                    },
                };
                if premise.as_deref().is_none_or(|p| p == type_expr) {
                    let _ = writeln!(out, "intro {label}");
                } else {
                    // Let the kernel decide whether the stated type is
                    // definitionally the premise.
                    let _ = writeln!(out, "intro ({label} : {type_expr})");
                }
                goal = rest;
            }
            Step::Define { name, ty, body_expr } => {
                let eq = definition_eq(name, body_expr);
                match ty {
                    Some(ty) => {
                        let _ = writeln!(out, "obtain ⟨{name}, {name}_def⟩ : ∃ {name} : {ty}, {eq} := ⟨_, rfl⟩");
                    }
                    None if opts.trace_untyped => {
                        untyped = true;
                        let _ = writeln!(out, "obtain ⟨{name}, {name}_def⟩ : ∃ {name}, {eq} := ⟨_, rfl⟩");
                    }
                    None => return Err(ConsolidateError::MissingDefineType(name.clone())),
                }
            }
            Step::ShowBy { label, goal_expr, body, .. } => {
                let supplied = proofs.get(label).map(|p| p.source.as_str());
                let proof = match (supplied, body) {
                    (Some(p), _) => p,
                    (None, ShowBody::Proof(p)) => p.as_str(),
                    (None, ShowBody::Hole) if opts.allow_placeholders => "sorry",
                    (None, ShowBody::Hole) => return Err(ConsolidateError::MissingProof(label.clone())),
                };
                if !opts.allow_placeholders && lean::contains_placeholder(proof) {
                    return Err(ConsolidateError::PlaceholderInProof(label.clone()));
                }
                push_have(&mut out, label, goal_expr, proof);
                last_show = Some((label, goal_expr));
            }
        }
    }
    let (label, found) = last_show.ok_or(ConsolidateError::NoShowSteps)?;
    if opts.require_goal_match && lean::normalize_ws(found) != lean::normalize_ws(&goal) {
        return Err(ConsolidateError::GoalMismatch { expected: goal, found: found.to_string() });
    }
    if untyped {
        out.push_str("trace_state\n");
    }
    let _ = writeln!(out, "exact {label}");
    Ok(out.trim_end().to_string())
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn proofs(items: &[(&str, &str)]) -> BTreeMap<String, FormalProof> {
        items.iter().map(|(l, p)| (l.to_string(), FormalProof::new(*p, ProofOrigin::Repair))).collect()
    }

    #[test]
    fn single_show_minimal_case() {
        let ast = parse("theorem th : 1 = 1\nsketch th\n  show s1 : 1 = 1 by ?\n  conclude\nend").unwrap();
        let p = consolidate(&ast, &proofs(&[("s1", "rfl")])).unwrap();
        assert_eq!(p.source, "have s1 : 1 = 1 := by rfl\nexact s1");
        assert_eq!(p.produced_by, ProofOrigin::Consolidation);
    }

    #[test]
    fn full_translation() {
        let src = "theorem th (a : ℤ) : a > 0 → a ≥ 0\nsketch th\n  suppose h : a > 0\n  define b : ℤ := a + 1\n  show s1 : b > 0 by ?\n  show s2 : a ≥ 0 after s1 by ?\n  conclude\nend";
        let ast = parse(src).unwrap();
        let p = consolidate(&ast, &proofs(&[("s1", "omega"), ("s2", "have := s1\nomega")])).unwrap();
        assert_eq!(
            p.source,
            "intro h\nobtain ⟨b, b_def⟩ : ∃ b : ℤ, b = (a + 1) := ⟨_, rfl⟩\nhave s1 : b > 0 := by omega\nhave s2 : a ≥ 0 := by\n  have := s1\n  omega\nexact s2"
        );
    }

    #[test]
    fn errors() {
        let ast = parse(
            "theorem th (x : ℕ) : x = x\nsketch th\n  show s1 : x = x by ?\n  show s2 : 0 = 0 by ?\n  conclude\nend",
        )
        .unwrap();
        assert_eq!(consolidate(&ast, &proofs(&[("s1", "rfl")])), Err(ConsolidateError::MissingProof("s2".into())));
        assert_eq!(
            consolidate(&ast, &proofs(&[("s1", "rfl"), ("s2", "rfl")])),
            Err(ConsolidateError::GoalMismatch { expected: "x = x".into(), found: "0 = 0".into() })
        );
        assert_eq!(
            consolidate(&ast, &proofs(&[("s1", "sorry"), ("s2", "rfl")])),
            Err(ConsolidateError::PlaceholderInProof("s1".into()))
        );
        let ast = parse(
            "theorem th (x : ℕ) : x = x\nsketch th\n  suppose h : x > 0\n  show s1 : x = x by ?\n  conclude\nend",
        )
        .unwrap();
        assert!(matches!(consolidate(&ast, &proofs(&[("s1", "rfl")])), Err(ConsolidateError::CannotIntroduce { .. })));
    }

    #[test]
    fn skeleton_fills_holes_and_traces_untyped_definitions() {
        let src = "theorem th : ∀ n : ℕ, n + 0 = n\nsketch th\n  suppose n : ℕ\n  define m := n + 0\n  show s1 : n + 0 = n by ?\n  conclude\nend";
        let sk = skeleton(&parse(src).unwrap(), true).unwrap();
        assert_eq!(sk, "intro n\nobtain ⟨m, m_def⟩ : ∃ m, m = (n + 0) := ⟨_, rfl⟩\nhave s1 : n + 0 = n := by sorry\ntrace_state\nexact s1");
    }

    #[test]
    fn mismatched_premise_is_ascribed() {
        let ast = parse("theorem th (a : ℤ) : 0 < a → a ≥ 0\nsketch th\n  suppose h : a > 0\n  show s1 : a ≥ 0 by ?\n  conclude\nend").unwrap();
        let p = consolidate(&ast, &proofs(&[("s1", "omega")])).unwrap();
        assert!(p.source.starts_with("intro (h : a > 0)\n"));
    }
}
