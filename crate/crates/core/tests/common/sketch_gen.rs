use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use leanagent_core::lean;
use leanagent_core::sketch::{ShowBody, SketchAst, Step, SubProblem};
use leanagent_core::verifier::{FormalProof, FormalStatement, MockDefault, MockVerifier, ProofOrigin, Verifier};
use proptest::prelude::*;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sketches")
}

pub fn corpus() -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(fixtures())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "sketch"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect()
}

pub fn elaborator() -> Verifier {
    Verifier::new(Arc::new(MockVerifier::new(MockDefault::Elaborate)))
}

/// Identifiers free in a closed statement: everything must be bound by an
/// earlier binder, or be a global (capitalized or a letterlike symbol).
pub fn unbound_identifiers(st: &FormalStatement) -> Vec<String> {
    let header = lean::parse_header(&st.source).unwrap();
    let mut bound: Vec<String> = Vec::new();
    let mut free = Vec::new();
    let mut check = |expr: &str, bound: &[String]| {
        for id in lean::free_identifiers(expr) {
            let first = id.chars().next().unwrap();
            let global = first.is_ascii_uppercase() || ('\u{2100}'..='\u{214f}').contains(&first);
            if !global && !bound.contains(&id) {
                free.push(id);
            }
        }
    };
    for b in &header.binders {
        if let Some(ty) = &b.ty {
            check(ty, &bound);
        }
        bound.extend(b.names.iter().cloned());
    }
    check(&header.goal, &bound);
    free
}

pub fn sub_proofs(ast: &SketchAst) -> BTreeMap<String, FormalProof> {
    ast.show_labels()
        .iter()
        .map(|l| (l.to_string(), FormalProof::new(format!("exact proof_of_{l}"), ProofOrigin::Direct)))
        .collect()
}

// Generated sketches over `theorem th (a b : ℤ) (h : a > 0) : GOAL`.

pub const GOAL: &str = "a + b ≥ b";

#[derive(Debug, Clone)]
pub enum Gen {
    Suppose(usize),
    Define(usize, bool),
    Show(usize, Option<Vec<prop::sample::Index>>, Option<u8>),
}

pub fn term(vars: &[String], i: usize, j: usize) -> String {
    let (x, y) = (&vars[i % vars.len()], &vars[j % vars.len()]);
    match (i + j) % 4 {
        0 => format!("{x} + {y}"),
        1 => format!("{x} * ({y} - 1)"),
        2 => format!("|{x}| + 2"),
        _ => x.clone(),
    }
}

pub fn prop(vars: &[String], k: usize) -> String {
    let t = term(vars, k, k / 3 + 1);
    match k % 3 {
        0 => format!("{t} ≥ 0"),
        1 => format!("0 < {t} ∨ {t} ≤ 0"),
        _ => format!("∀ z : ℤ, z * z ≥ {t} - {t}"),
    }
}

pub fn build(plan: &[Gen]) -> SketchAst {
    let theorem_ref =
        FormalStatement::from_header(&format!("th (a b : ℤ) (h : a > 0) : {GOAL}"), vec!["Mathlib".into()]).unwrap();
    let mut vars: Vec<String> = vec!["a".into(), "b".into()];
    let mut shows: Vec<String> = Vec::new();
    let mut steps = Vec::new();
    for (n, g) in plan.iter().enumerate() {
        match g {
            Gen::Suppose(k) => steps.push(Step::Suppose { label: format!("hyp{n}"), type_expr: prop(&vars, *k) }),
            Gen::Define(k, typed) => {
                let name = format!("d{n}");
                steps.push(Step::Define {
                    name: name.clone(),
                    ty: typed.then(|| "ℤ".to_string()),
                    body_expr: term(&vars, *k, k + 1),
                });
                vars.push(name);
            }
            Gen::Show(k, deps, proof) => {
                let label = format!("s{n}");
                let depends_on = deps.as_ref().map(|d| {
                    let mut picked: Vec<String> =
                        d.iter().filter(|_| !shows.is_empty()).map(|i| i.get(&shows).clone()).collect();
                    picked.sort_by_key(|l| shows.iter().position(|s| s == l));
                    picked.dedup();
                    picked
                });
                let body = match proof {
                    None => ShowBody::Hole,
                    Some(0) => ShowBody::Proof("omega".into()),
                    Some(p) => ShowBody::Proof(format!(
                        "have aux : 0 ≤ 1 := by norm_num\nnlinarith [sq_nonneg ({} - {p})]",
                        vars[0]
                    )),
                };
                steps.push(Step::ShowBy { label: label.clone(), goal_expr: prop(&vars, *k), body, depends_on });
                shows.push(label);
            }
        }
    }
    steps.push(Step::ShowBy { label: "final".into(), goal_expr: GOAL.into(), body: ShowBody::Hole, depends_on: None });
    SketchAst { theorem_ref, steps, concluded: true }
}

pub fn gen_step() -> impl Strategy<Value = Gen> {
    prop_oneof![
        (0usize..30).prop_map(Gen::Suppose),
        (0usize..30, any::<bool>()).prop_map(|(k, t)| Gen::Define(k, t)),
        (
            0usize..30,
            prop::option::of(prop::collection::vec(any::<prop::sample::Index>(), 0..3)),
            prop::option::of(0u8..3)
        )
            .prop_map(|(k, d, p)| Gen::Show(k, d, p)),
    ]
}

pub fn sketch_ast() -> impl Strategy<Value = SketchAst> {
    prop::collection::vec(gen_step(), 0..8).prop_map(|plan| build(&plan))
}

pub fn holes_only(mut ast: SketchAst) -> SketchAst {
    for s in &mut ast.steps {
        match s {
            Step::ShowBy { body, .. } => *body = ShowBody::Hole,
            Step::Define { ty, .. } => *ty = Some("ℤ".into()),
            Step::Suppose { .. } => {}
        }
    }
    ast
}

/// Re-spaces a printed sketch without changing its meaning: wider gaps
/// between tokens, a different step indentation, blank lines, trailing
/// spaces.
pub fn perturb(text: &str, seed: &[u8]) -> String {
    let mut out = String::new();
    let mut in_block = false;
    for (i, line) in text.lines().enumerate() {
        let s = seed[i % seed.len()];
        if line.starts_with("sketch ") {
            in_block = true;
        }
        // Steps share one indentation; a deeper line would continue the step above.
        let extra = if in_block && line.starts_with("  ") { " ".repeat((seed[0] % 3) as usize) } else { String::new() };
        // Tactic text inside proofs is kept verbatim, so only step lines are re-spaced.
        let step = ["suppose", "define", "show", "theorem"].iter().any(|k| line.trim_start().starts_with(k));
        let body = if step && s.is_multiple_of(2) { line.replacen(" : ", "   :  ", 1) } else { line.to_string() };
        out.push_str(&extra);
        out.push_str(&body);
        if s.is_multiple_of(5) {
            out.push_str("   ");
        }
        out.push('\n');
        if s.is_multiple_of(7) {
            out.push('\n');
        }
    }
    out
}

/// The generated goal has no premises, so extra hypotheses cannot be
/// introduced by consolidation.
pub fn without_hypotheses(mut ast: SketchAst) -> SketchAst {
    ast.steps.retain(|s| !matches!(s, Step::Suppose { .. }));
    ast
}

pub fn extracted_sources(subs: &[SubProblem]) -> Vec<String> {
    subs.iter().map(|s| s.statement.source.clone()).collect()
}
