use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::sketch;
use crate::verifier::{FormalProof, PlaceholderPolicy};

use super::decompose::reflective_decomposition;
use super::repair::iterative_proof_repair;
use super::{Abort, Backends, BudgetConfig, BudgetLedger, ProblemInstance, Session, Transcript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Repair loop only.
    Direct,
    /// Repair loop, then decomposition.
    #[default]
    Full,
    /// `m·n` independent samples, no repair.
    #[serde(rename = "bon")]
    BestOfN,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(Self::Direct),
            "full" => Ok(Self::Full),
            "bon" => Ok(Self::BestOfN),
            _ => Err(format!("unknown mode `{s}` (expected direct, full or bon)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProveStatus {
    Proved,
    /// The budget ran out.
    Failed,
    /// Infrastructure failed; the budget says nothing about the problem.
    Aborted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProofPath {
    Direct,
    Decomposed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProveOutcome {
    pub status: ProveStatus,
    pub proof: Option<FormalProof>,
    /// The last branch that ran.
    pub path: ProofPath,
    pub ledger: BudgetLedger,
    pub transcript: Transcript,
    pub abort_reason: Option<String>,
}

/// Direct repair first, decomposition on failure.
pub fn prove(problem: &ProblemInstance, config: &BudgetConfig, b: &Backends) -> ProveOutcome {
    prove_with_mode(problem, config, Mode::Full, b)
}

pub fn prove_with_mode(problem: &ProblemInstance, config: &BudgetConfig, mode: Mode, b: &Backends) -> ProveOutcome {
    let start = b.clock.now_ms();
    let mut session = Session::new(b.clock, "direct");
    session
        .log("start", json!({"id": problem.id, "statement": problem.statement.source, "mode": mode, "config": config}));
    let mut path = ProofPath::Direct;
    let result = match config.validate() {
        Ok(()) => run(problem, config, mode, b, &mut session, &mut path),
        Err(e) => Err(Abort(e.to_string())),
    };
    let (status, proof, abort_reason) = match result {
        Ok(Some(p)) => {
            session.ledger.mark_success();
            (ProveStatus::Proved, Some(p), None)
        }
        Ok(None) => (ProveStatus::Failed, None, None),
        Err(Abort(reason)) => (ProveStatus::Aborted, None, Some(reason)),
    };
    session.phase = "outcome".into();
    session.log(
        "outcome",
        json!({
            "status": status,
            "path": path,
            "llm_calls": session.ledger.llm_calls,
            "verifier_calls": session.ledger.verifier_calls,
            "abort_reason": abort_reason,
        }),
    );
    session.ledger.wall_time_ms = b.clock.now_ms().saturating_sub(start);
    ProveOutcome { status, proof, path, ledger: session.ledger, transcript: session.transcript, abort_reason }
}

fn run(
    problem: &ProblemInstance,
    config: &BudgetConfig,
    mode: Mode,
    b: &Backends,
    session: &mut Session,
    path: &mut ProofPath,
) -> Result<Option<FormalProof>, Abort> {
    let st = &problem.statement;
    let (m, n) = match mode {
        Mode::BestOfN => (config.rounds_m * config.repairs_n, 1),
        _ => (config.rounds_m, config.repairs_n),
    };
    let direct = iterative_proof_repair(st, problem.informal.as_deref(), None, m, n, b, session)?;
    if direct.proof.is_some() || mode != Mode::Full {
        return Ok(direct.proof);
    }

    *path = ProofPath::Decomposed;
    session.phase = "decompose".into();
    let Some(dec) = reflective_decomposition(
        st,
        direct.informal.as_deref(),
        config.decomp_attempts,
        config.sub_rounds,
        config.sub_repairs,
        config.parallel_subproblems,
        b,
        session,
    )?
    else {
        return Ok(None);
    };

    session.phase = "consolidate".into();
    let proofs: BTreeMap<String, FormalProof> =
        dec.solved.iter().map(|(sub, p)| (sub.origin_label.clone(), p.clone())).collect();
    let proof = match sketch::consolidate(&dec.sketch, &proofs) {
        Ok(p) => p,
        Err(e) => {
            session.log("consolidation_error", json!({"error": e.to_string()}));
            return Ok(None);
        }
    };
    let result = session.check(b, st, &proof.source, PlaceholderPolicy::Reject, "consolidation")?;
    // A rejected consolidation ends the problem; decomposition is not retried.
    Ok(result.ok.then_some(proof))
}
