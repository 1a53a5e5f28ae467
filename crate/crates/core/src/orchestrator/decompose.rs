use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::llm::{extract_code_block, PromptContext, PromptKind};
use crate::sketch::{self, ConsolidateError, SketchAst, SubProblem};
use crate::verifier::{content_hash, Diagnostic, FormalProof, FormalStatement, PlaceholderPolicy, VerificationResult};

use super::repair::{informalize, repair_loop};
use super::{synthetic_error, Abort, Backends, Session};

/// Why a sketch attempt failed; shown to the model when it regenerates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "items", rename_all = "snake_case")]
pub enum DecompositionFeedback {
    KernelErrors(Vec<Diagnostic>),
    Unsolved(Vec<SubProblem>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub sketch: SketchAst,
    pub solved: Vec<(SubProblem, FormalProof)>,
}

/// Parses a sketch and checks its skeleton with one kernel call. On
/// success returns the sketch with inferred types and its sub-problems.
fn check_sketch(
    text: &str,
    statement: &FormalStatement,
    b: &Backends,
    session: &mut Session,
) -> Result<Result<(SketchAst, Vec<SubProblem>), DecompositionFeedback>, Abort> {
    let mut ast = match sketch::parse_for(text, statement) {
        Ok(ast) => ast,
        Err(e) => {
            session.log("sketch_parse_error", json!({"error": e.to_string()}));
            return Ok(Err(DecompositionFeedback::KernelErrors(vec![synthetic_error(
                e.line,
                e.column,
                e.to_string(),
            )])));
        }
    };
    let skeleton = match sketch::skeleton(&ast, true) {
        Ok(s) => s,
        Err(ConsolidateError::GoalMismatch { expected, found }) => {
            let message = format!("the last show goal `{found}` must be exactly the theorem goal `{expected}`");
            let lenient = sketch::skeleton(&ast, false).map_err(|e| Abort(e.to_string()))?;
            let result = session.check(b, statement, &lenient, PlaceholderPolicy::Ignore, "sketch")?;
            session.log("goal_near_miss", json!({"expected": expected, "found": found, "kernel_ok": result.ok}));
            let mut diags = vec![synthetic_error(1, 0, message)];
            diags.extend(result.errors().cloned());
            return Ok(Err(DecompositionFeedback::KernelErrors(diags)));
        }
        Err(e) => return Ok(Err(DecompositionFeedback::KernelErrors(vec![synthetic_error(1, 0, e.to_string())]))),
    };
    let result = session.check(b, statement, &skeleton, PlaceholderPolicy::Ignore, "sketch")?;
    if !result.ok {
        return Ok(Err(DecompositionFeedback::KernelErrors(result.errors().cloned().collect())));
    }
    let missing = sketch::infer_define_types(&mut ast, &result.diagnostics);
    if !missing.is_empty() {
        let msg = format!("could not infer the type of {}; annotate it as `define x : T := ...`", missing.join(", "));
        return Ok(Err(DecompositionFeedback::KernelErrors(vec![synthetic_error(1, 0, msg)])));
    }
    match sketch::extract_subproblems(&ast) {
        Ok(subs) => Ok(Ok((ast, subs))),
        Err(e) => Ok(Err(DecompositionFeedback::KernelErrors(vec![synthetic_error(1, 0, e.to_string())]))),
    }
}

type SubOutcome<'c> = (Session<'c>, Result<Option<FormalProof>, Abort>);

/// Solves every sub-problem, up to `parallel` at a time. Sessions come back
/// in index order so merged ledgers and transcripts are deterministic.
#[allow(clippy::too_many_arguments)]
fn solve_all<'c>(
    subs: &[SubProblem],
    informals: &[Option<String>],
    statement: &FormalStatement,
    m: u32,
    n: u32,
    parallel: usize,
    b: &Backends,
    parent: &Session<'c>,
) -> Vec<SubOutcome<'c>> {
    let solve = |i: usize| -> SubOutcome<'c> {
        let sub = &subs[i];
        let mut s = parent.child(format!("{}/{}", parent.phase, sub.name));
        let r = repair_loop(&sub.statement, informals[i].as_deref(), Some(statement), m, n, b, &mut s);
        (s, r)
    };
    if parallel <= 1 || subs.len() <= 1 {
        return (0..subs.len()).map(solve).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<SubOutcome<'c>>>> = Mutex::new((0..subs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..parallel.min(subs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= subs.len() {
                    break;
                }
                let out = solve(i);
                slots.lock().unwrap()[i] = Some(out);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|s| s.expect("every sub-problem is solved once")).collect()
}

/// Plans, sketches, and solves sub-problems, regenerating the sketch from
/// feedback at most `l_max - 1` times. `Ok(None)` is failure by budget.
#[allow(clippy::too_many_arguments)]
pub fn reflective_decomposition(
    statement: &FormalStatement,
    informal: Option<&str>,
    l_max: u32,
    sub_m: u32,
    sub_n: u32,
    parallel: u32,
    b: &Backends,
    session: &mut Session,
) -> Result<Option<DecompositionResult>, Abort> {
    let base = |kind| {
        let mut ctx = PromptContext::new(statement.clone());
        b.guidelines.apply(kind, &mut ctx);
        ctx.informal = informal.map(str::to_string);
        ctx
    };
    let Some(plan) = session.ask(b, PromptKind::InformalPlan, &base(PromptKind::InformalPlan))? else {
        return Ok(None);
    };
    let plan = extract_code_block(&plan);
    let mut ctx = base(PromptKind::FormalSketch);
    ctx.plan = Some(plan.clone());
    let Some(mut sketch_text) = session.ask(b, PromptKind::FormalSketch, &ctx)?.map(|t| extract_code_block(&t)) else {
        return Ok(None);
    };
    let mut informal_cache: HashMap<String, Option<String>> = HashMap::new();
    for attempt in 1..=l_max {
        session.log("sketch_attempt", json!({"attempt": attempt, "sketch": sketch_text}));
        let feedback = match check_sketch(&sketch_text, statement, b, session)? {
            Err(fb) => fb,
            Ok((ast, subs)) => {
                session.log(
                    "subproblems",
                    json!(subs
                        .iter()
                        .map(|s| json!({"name": s.name, "label": s.origin_label, "statement": s.statement.source}))
                        .collect::<Vec<_>>()),
                );
                // Informal statements first, one call per distinct statement.
                let mut informals = Vec::with_capacity(subs.len());
                for sub in &subs {
                    // Keyed without the generated name, which shifts between sketches.
                    let key = content_hash(sub.statement.source.split_once(&sub.name).map_or("", |(_, rest)| rest), "");
                    let s = match informal_cache.get(&key) {
                        Some(s) => s.clone(),
                        None => {
                            let phase = format!("{}/{}", session.phase, sub.name);
                            let prev = std::mem::replace(&mut session.phase, phase);
                            let s = informalize(&sub.statement, b, session);
                            session.phase = prev;
                            let s = s?;
                            informal_cache.insert(key, s.clone());
                            s
                        }
                    };
                    informals.push(s);
                }
                let outcomes = solve_all(&subs, &informals, statement, sub_m, sub_n, parallel as usize, b, session);
                let mut solved = Vec::new();
                let mut unsolved = Vec::new();
                let mut abort = None;
                for ((child, r), sub) in outcomes.into_iter().zip(&subs) {
                    session.merge(child);
                    match r {
                        Ok(Some(p)) => solved.push((sub.clone(), p)),
                        Ok(None) => unsolved.push(sub.clone()),
                        Err(e) => {
                            abort.get_or_insert(e);
                        }
                    }
                }
                if let Some(e) = abort {
                    return Err(e);
                }
                if unsolved.is_empty() {
                    return Ok(Some(DecompositionResult { sketch: ast, solved }));
                }
                if !solved.is_empty() && attempt < l_max {
                    session.log("discard_solved", json!(solved.iter().map(|(s, _)| &s.name).collect::<Vec<_>>()));
                }
                DecompositionFeedback::Unsolved(unsolved)
            }
        };
        session.log("sketch_feedback", serde_json::to_value(&feedback).unwrap_or_default());
        if attempt == l_max {
            break;
        }
        let mut ctx = base(PromptKind::FormalSketch);
        ctx.plan = Some(plan.clone());
        ctx.sketch = Some(sketch_text.clone());
        match &feedback {
            DecompositionFeedback::KernelErrors(diags) => {
                ctx.kernel_output = Some(VerificationResult {
                    ok: false,
                    diagnostics: diags.clone(),
                    tactic_state: None,
                    elapsed_ms: 0,
                    timed_out: false,
                });
            }
            DecompositionFeedback::Unsolved(subs) => {
                ctx.unsolved_subproblems = subs.iter().map(|s| s.statement.source.clone()).collect();
            }
        }
        match session.ask(b, PromptKind::FormalSketch, &ctx)? {
            Some(t) => sketch_text = extract_code_block(&t),
            None => return Ok(None),
        }
    }
    Ok(None)
}
