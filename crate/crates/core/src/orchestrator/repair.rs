use serde_json::json;

use crate::llm::{extract_code_block, PromptContext, PromptKind};
use crate::retrieval::{select_queries, Index, RetrievalHit};
use crate::verifier::{FormalProof, FormalStatement, PlaceholderPolicy, ProofOrigin, VerificationResult};

use super::{Abort, Backends, Session};

#[derive(Debug, Clone, PartialEq)]
pub struct RepairResult {
    pub proof: Option<FormalProof>,
    /// The informal statement used, including one generated here.
    pub informal: Option<String>,
}

/// One model call restating `statement` in natural language. `Ok(None)`
/// when the model produced nothing usable.
pub fn informalize(statement: &FormalStatement, b: &Backends, session: &mut Session) -> Result<Option<String>, Abort> {
    let ctx = PromptContext::new(statement.clone());
    let Some(text) = session.ask(b, PromptKind::InformalizeStatement, &ctx)? else {
        return Ok(None);
    };
    let text = extract_code_block(&text);
    Ok(if text.is_empty() { None } else { Some(text) })
}

/// Repair prompt context for a rejected proof: the proof, the kernel's
/// output, and index hits for up to `max_queries` errored names.
pub fn build_repair_context(
    statement: &FormalStatement,
    failed: &FormalProof,
    result: &VerificationResult,
    index: &Index,
    k: usize,
    max_queries: usize,
) -> PromptContext {
    let mut ctx = PromptContext::new(statement.clone());
    ctx.failed_proof = Some(failed.clone());
    ctx.kernel_output = Some(result.clone());
    let mut hits: Vec<RetrievalHit> = Vec::new();
    for q in select_queries(result).into_iter().take(max_queries) {
        for hit in index.lookup(&q, k) {
            if !hits.iter().any(|h| h.decl.name == hit.decl.name) {
                hits.push(hit);
            }
        }
    }
    ctx.retrieved = hits;
    ctx
}

/// `m` rounds of `n` attempts. Each round opens with a fresh proof; later
/// attempts repair the latest rejected proof from the kernel's feedback.
/// Every candidate is verified, so proof calls never exceed `m·n`.
#[allow(clippy::too_many_arguments)]
pub fn iterative_proof_repair(
    statement: &FormalStatement,
    informal: Option<&str>,
    context: Option<&FormalStatement>,
    m: u32,
    n: u32,
    b: &Backends,
    session: &mut Session,
) -> Result<RepairResult, Abort> {
    let informal = match informal {
        Some(s) => Some(s.to_string()),
        None => informalize(statement, b, session)?,
    };
    let proof = repair_loop(statement, informal.as_deref(), context, m, n, b, session)?;
    Ok(RepairResult { proof, informal })
}

/// The loop proper, with the informal statement already settled.
pub(crate) fn repair_loop(
    statement: &FormalStatement,
    informal: Option<&str>,
    context: Option<&FormalStatement>,
    m: u32,
    n: u32,
    b: &Backends,
    session: &mut Session,
) -> Result<Option<FormalProof>, Abort> {
    let fill = |ctx: &mut PromptContext, kind| {
        b.guidelines.apply(kind, ctx);
        ctx.informal = informal.map(str::to_string);
        ctx.context_statement = context.cloned();
    };
    for round in 0..m {
        let mut last: Option<(FormalProof, VerificationResult)> = None;
        for attempt in 0..n {
            let (kind, mut ctx) = match &last {
                Some((proof, result)) => (
                    PromptKind::Repair,
                    build_repair_context(statement, proof, result, b.index, b.retrieval_k, b.max_queries),
                ),
                None => (PromptKind::FormalProof, PromptContext::new(statement.clone())),
            };
            fill(&mut ctx, kind);
            let Some(text) = session.ask(b, kind, &ctx)? else {
                last = None;
                continue;
            };
            let origin = if kind == PromptKind::Repair { ProofOrigin::Repair } else { ProofOrigin::Direct };
            let proof = FormalProof::new(extract_code_block(&text), origin);
            let result = session.check(b, statement, &proof.source, PlaceholderPolicy::Reject, "proof")?;
            if result.ok {
                session.log("solved", json!({"statement": statement.name, "round": round + 1, "attempt": attempt + 1}));
                return Ok(Some(proof));
            }
            last = Some((proof, result));
        }
    }
    session.log("exhausted", json!({"statement": statement.name, "rounds": m, "repairs": n}));
    Ok(None)
}
