use serde::{Deserialize, Serialize};

use crate::lean::{self, HeaderError};
use crate::verifier::{Diagnostic, FormalStatement, Severity};

use super::{ShowBody, SketchAst, Step};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubProblem {
    /// 1-based position among the sketch's `show` steps.
    pub index: usize,
    pub name: String,
    pub statement: FormalStatement,
    pub origin_label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("sketch has no show steps")]
    NoShowSteps,
    #[error("step `{0}` already has a proof; only holes can be extracted")]
    NonHoleBody(String),
    #[error("type of `{0}` is unknown; annotate it or infer it from the kernel")]
    MissingDefineType(String),
    #[error("theorem header: {0}")]
    Header(#[from] HeaderError),
}

/// `x = body`, parenthesizing compound bodies so the equation binds tightest.
pub(crate) fn definition_eq(name: &str, body: &str) -> String {
    let simple = lean::tokenize(body).len() == 1 || (body.starts_with('(') && lean::top_level_tokens(body).is_empty());
    if simple {
        format!("{name} = {body}")
    } else {
        format!("{name} = ({body})")
    }
}

/// Whether a `suppose` restates a theorem binder, in which case it adds
/// nothing to the context.
pub(crate) fn matches_binder(header: &lean::Header, label: &str, type_expr: &str) -> bool {
    header.binders.iter().any(|b| {
        b.names.iter().any(|n| n == label) && b.ty.as_deref().map(lean::normalize_ws).as_deref() == Some(type_expr)
    })
}

/// One self-contained statement per `show` step, closed over the theorem
/// binders, earlier hypotheses and definitions, and the shown facts it may
/// use.
pub fn extract_subproblems(ast: &SketchAst) -> Result<Vec<SubProblem>, ExtractError> {
    let header = ast.theorem_ref.header()?;
    let mut context: Vec<String> = header.binders.iter().map(|b| b.text.clone()).collect();
    let mut out = Vec::new();
    for (i, step) in ast.steps.iter().enumerate() {
        match step {
            Step::Suppose { label, type_expr } => {
                if !matches_binder(&header, label, type_expr) {
                    context.push(format!("({label} : {type_expr})"));
                }
            }
            Step::Define { name, ty, body_expr } => {
                let ty = ty.as_ref().ok_or_else(|| ExtractError::MissingDefineType(name.clone()))?;
                context.push(format!("({name} : {ty})"));
                context.push(format!("({name}_def : {})", definition_eq(name, body_expr)));
            }
            Step::ShowBy { label, goal_expr, body, .. } => {
                if *body != ShowBody::Hole {
                    return Err(ExtractError::NonHoleBody(label.clone()));
                }
                let mut binders = context.clone();
                for dep in ast.dependencies(i) {
                    if let Some(Step::ShowBy { goal_expr: g, .. }) = ast.steps.iter().find(|s| s.label() == dep) {
                        binders.push(format!("({dep} : {g})"));
                    }
                }
                let index = out.len() + 1;
                let name = format!("sub_{index}");
                let mut source = format!("theorem {name}");
                for b in &binders {
                    source.push(' ');
                    source.push_str(b);
                }
                source.push_str(" : ");
                source.push_str(goal_expr);
                out.push(SubProblem {
                    index,
                    statement: FormalStatement { name: name.clone(), source, imports: ast.theorem_ref.imports.clone() },
                    name,
                    origin_label: label.clone(),
                });
            }
        }
    }
    if out.is_empty() {
        return Err(ExtractError::NoShowSteps);
    }
    Ok(out)
}

/// Hypothesis lines `names : type` from a rendered tactic state, with
/// wrapped continuation lines joined.
fn hypotheses(state: &str) -> Vec<(Vec<&str>, String)> {
    let mut out: Vec<(Vec<&str>, String)> = Vec::new();
    for line in state.lines() {
        if line.starts_with(char::is_whitespace) && !line.trim().is_empty() {
            if let Some(last) = out.last_mut() {
                last.1 = lean::normalize_ws(&format!("{} {}", last.1, line));
            }
            continue;
        }
        let Some((names, ty)) = line.split_once(" : ") else { continue };
        let names: Vec<&str> = names.split_whitespace().collect();
        if !names.is_empty() && names.iter().all(|n| lean::is_identifier(n)) {
            out.push((names, lean::normalize_ws(ty)));
        }
    }
    out
}

/// Fills missing `define` types from tactic states the kernel reported as
/// info diagnostics. Returns the names that are still untyped.
pub fn infer_define_types(ast: &mut SketchAst, diagnostics: &[Diagnostic]) -> Vec<String> {
    let states: Vec<&str> =
        diagnostics.iter().filter(|d| d.severity == Severity::Info).map(|d| d.message.as_str()).collect();
    let mut missing = Vec::new();
    for step in &mut ast.steps {
        if let Step::Define { name, ty: ty @ None, .. } = step {
            let found = states
                .iter()
                .flat_map(|s| hypotheses(s))
                .find(|(names, _)| names.contains(&name.as_str()))
                .map(|(_, t)| t);
            match found {
                Some(t) => *ty = Some(t),
                None => missing.push(name.clone()),
            }
        }
    }
    missing
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn closure_rule_minimal() {
        let ast = parse("theorem th (a : ℤ) : a > 0 → a ≥ 0\nsketch th\n  suppose h : a > 0\n  show s1 : a ≥ 0 by ?\n  conclude\nend").unwrap();
        let subs = extract_subproblems(&ast).unwrap();
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].statement.source, "theorem sub_1 (a : ℤ) (h : a > 0) : a ≥ 0");
        assert_eq!(subs[0].origin_label, "s1");
    }

    #[test]
    fn dependencies_and_definitions() {
        let src = "theorem th (a : ℤ) (ha : 0 < a) : a ^ 2 > 0\nsketch th\n  suppose ha : 0 < a\n  define b : ℤ := a * a\n  show s1 : b > 0 by ?\n  show s2 : a ≠ 0 after s1 by ?\n  show s3 : a ^ 2 > 0 after s1 by ?\n  conclude\nend";
        let subs = extract_subproblems(&parse(src).unwrap()).unwrap();
        assert_eq!(
            subs[0].statement.source,
            "theorem sub_1 (a : ℤ) (ha : 0 < a) (b : ℤ) (b_def : b = (a * a)) : b > 0"
        );
        assert_eq!(
            subs[1].statement.source,
            "theorem sub_2 (a : ℤ) (ha : 0 < a) (b : ℤ) (b_def : b = (a * a)) (s1 : b > 0) : a ≠ 0"
        );
        assert_eq!(subs[2].name, "sub_3");
        assert!(subs[2].statement.source.contains("(s1 : b > 0) : a ^ 2 > 0"));
        assert!(!subs[2].statement.source.contains("(s2"));
    }

    #[test]
    fn omitted_after_includes_all_earlier_shows() {
        let src = "theorem th (x : ℕ) : x + 0 = x\nsketch th\n  show s1 : 0 = 0 by ?\n  show s2 : x = x by ?\n  show s3 : x + 0 = x by ?\n  conclude\nend";
        let subs = extract_subproblems(&parse(src).unwrap()).unwrap();
        assert_eq!(subs[2].statement.source, "theorem sub_3 (x : ℕ) (s1 : 0 = 0) (s2 : x = x) : x + 0 = x");
    }

    #[test]
    fn rejects_proved_steps_and_untyped_definitions() {
        let src = "theorem th (x : ℕ) : x = x\nsketch th\n  show s1 : x = x by rfl\n  conclude\nend";
        assert_eq!(extract_subproblems(&parse(src).unwrap()), Err(ExtractError::NonHoleBody("s1".into())));
        let src = "theorem th (x : ℕ) : x = x\nsketch th\n  define y := x\n  show s1 : x = x by ?\n  conclude\nend";
        assert_eq!(extract_subproblems(&parse(src).unwrap()), Err(ExtractError::MissingDefineType("y".into())));
    }

    #[test]
    fn types_inferred_from_tactic_state() {
        let src = "theorem th (x : ℕ) : x = x\nsketch th\n  define y := x + 1\n  define z := y\n  show s1 : x = x by ?\n  conclude\nend";
        let mut ast = parse(src).unwrap();
        let info = Diagnostic {
            line: 4,
            column: 2,
            severity: Severity::Info,
            message: "x : ℕ\ny : ℕ\ny_def : y = x + 1\n⊢ x = x".into(),
            errored_names: vec![],
        };
        assert_eq!(infer_define_types(&mut ast, &[info]), vec!["z"]);
        assert_eq!(ast.steps[0], Step::Define { name: "y".into(), ty: Some("ℕ".into()), body_expr: "x + 1".into() });
    }
}
