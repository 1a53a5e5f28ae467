use leanagent_core::llm::MockLlm;
use leanagent_core::verifier::{MockResponse, MockVerifier};

use super::{lean_block, statement};

pub const TH: &str = "th (a : ℤ) (h : a > 0) : a ≥ 0";

/// Direct proof fails, then a sketch with two sub-problems that both close.
pub const SKETCH_TWO: &str =
    "```sketch\nsketch th\n  show s1 : a ≥ 1 by ?\n  show s2 : a ≥ 0 after s1 by ?\n  conclude\nend\n```";

pub fn two_subproblem_llm() -> MockLlm {
    let llm = MockLlm::new();
    llm.push("formal_proof/th", lean_block("bad"))
        .push("informal_plan/th", "```text\n1. a is positive.\n2. so a is non-negative.\n```")
        .push("formal_sketch/th", SKETCH_TWO)
        .push("informalize_statement/sub_1", "a is at least one")
        .push("informalize_statement/sub_2", "a is non-negative")
        .push("formal_proof/sub_1", lean_block("omega"))
        .push("formal_proof/sub_2", lean_block("omega"));
    llm
}

pub fn two_subproblem_verifier() -> MockVerifier {
    MockVerifier::accept_all().with_hash(&statement(TH).source, "bad", MockResponse::fail("linarith failed"))
}
