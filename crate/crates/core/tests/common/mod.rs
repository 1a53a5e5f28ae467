#![allow(dead_code)]

pub mod retrieval_data;
pub mod scenarios;
pub mod sketch_gen;
pub mod stepper;

use std::sync::Arc;

use leanagent_core::llm::{CompletionParams, Guidelines, LanguageModel};
use leanagent_core::orchestrator::{Backends, FixedClock, ProblemInstance};
use leanagent_core::retrieval::Index;
use leanagent_core::verifier::{FormalStatement, MockVerifier, Verifier};

pub struct Fixture<L> {
    pub llm: L,
    pub mock: Arc<MockVerifier>,
    pub verifier: Verifier,
    pub index: Index,
    pub guidelines: Guidelines,
    pub clock: FixedClock,
    pub params: CompletionParams,
}

impl<L: LanguageModel> Fixture<L> {
    pub fn new(llm: L, mock: MockVerifier) -> Self {
        let mock = Arc::new(mock);
        Self {
            llm,
            verifier: Verifier::new(mock.clone()),
            mock,
            index: Index::default(),
            guidelines: Guidelines::default(),
            clock: FixedClock(1_000),
            params: CompletionParams::default(),
        }
    }

    pub fn with_index(mut self, index: Index) -> Self {
        self.index = index;
        self
    }

    pub fn backends(&self) -> Backends<'_> {
        Backends::new(&self.llm, &self.verifier, &self.index, &self.guidelines, &self.clock, &self.params)
    }
}

pub fn statement(header: &str) -> FormalStatement {
    FormalStatement::from_header(header, vec!["Mathlib".into()]).unwrap()
}

pub fn problem(id: &str, header: &str, informal: Option<&str>) -> ProblemInstance {
    ProblemInstance { id: id.into(), statement: statement(header), informal: informal.map(str::to_string) }
}

pub fn lean_block(body: &str) -> String {
    format!("Here is the proof.\n```lean\n{body}\n```")
}
