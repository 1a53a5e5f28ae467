use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

/// Per-problem call accounting. Counters only ever grow.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetLedger {
    pub llm_calls: u64,
    pub verifier_calls: u64,
    /// Keys are `llm:<prompt kind>` and `verify:<purpose>`.
    pub per_phase: BTreeMap<String, u64>,
    pub wall_time_ms: u64,
    pub llm_calls_at_success: Option<u64>,
}

impl BudgetLedger {
    pub fn record_llm(&mut self, kind: &str) {
        self.llm_calls += 1;
        *self.per_phase.entry(format!("llm:{kind}")).or_default() += 1;
    }

    pub fn record_verify(&mut self, purpose: &str) {
        self.verifier_calls += 1;
        *self.per_phase.entry(format!("verify:{purpose}")).or_default() += 1;
    }

    pub fn phase(&self, key: &str) -> u64 {
        self.per_phase.get(key).copied().unwrap_or(0)
    }

    /// Calls that generated a candidate proof (fresh or repaired).
    pub fn proof_calls(&self) -> u64 {
        self.phase("llm:formal_proof") + self.phase("llm:repair")
    }

    pub fn mark_success(&mut self) {
        debug_assert!(self.llm_calls_at_success.is_none(), "success recorded twice");
        self.llm_calls_at_success.get_or_insert(self.llm_calls);
    }

    /// Folds a child ledger (e.g. one sub-problem) into this one.
    pub fn absorb(&mut self, other: &BudgetLedger) {
        self.llm_calls += other.llm_calls;
        self.verifier_calls += other.verifier_calls;
        for (k, v) in &other.per_phase {
            *self.per_phase.entry(k.clone()).or_default() += v;
        }
    }
}

pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
    }
}

/// Clock frozen at one instant; makes records reproducible byte-for-byte.
#[derive(Debug, Default, Clone, Copy)]
pub struct FixedClock(pub u64);

impl Clock for FixedClock {
    fn now_ms(&self) -> u64 {
        self.0
    }
}
