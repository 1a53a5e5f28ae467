use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::RunRecord;
use crate::orchestrator::ProveStatus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub budget: u64,
    /// Problems solved within `budget` calls.
    pub solved: usize,
    /// `solved` over all problems in the suite.
    pub fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TagMetrics {
    pub total: usize,
    pub proved: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteMetrics {
    pub total: usize,
    pub proved: usize,
    pub failed: usize,
    pub aborted: usize,
    /// Proved over total; aborted problems count as unsolved.
    pub accuracy: f64,
    /// Largest number of model calls any solved problem needed.
    pub sample_budget: u64,
    pub per_tag: BTreeMap<String, TagMetrics>,
    pub curve: Vec<CurvePoint>,
    pub aborted_ids: Vec<String>,
    pub llm_calls: u64,
    pub verifier_calls: u64,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn compute_metrics(records: &[RunRecord]) -> SuiteMetrics {
    let mut m = SuiteMetrics { total: records.len(), ..SuiteMetrics::default() };
    let mut costs: BTreeMap<u64, usize> = BTreeMap::new();
    for r in records {
        m.llm_calls += r.llm_calls;
        m.verifier_calls += r.verifier_calls;
        let proved = r.status == ProveStatus::Proved;
        match r.status {
            ProveStatus::Proved => m.proved += 1,
            ProveStatus::Failed => m.failed += 1,
            ProveStatus::Aborted => {
                m.aborted += 1;
                m.aborted_ids.push(r.problem_id.clone());
            }
        }
        if let (true, Some(c)) = (proved, r.llm_calls_at_success) {
            *costs.entry(c).or_default() += 1;
            m.sample_budget = m.sample_budget.max(c);
        }
        for tag in &r.tags {
            let t = m.per_tag.entry(tag.clone()).or_default();
            t.total += 1;
            t.proved += usize::from(proved);
        }
    }
    m.accuracy = ratio(m.proved, m.total);
    for t in m.per_tag.values_mut() {
        t.accuracy = ratio(t.proved, t.total);
    }
    let mut solved = 0;
    for (budget, count) in costs {
        solved += count;
        m.curve.push(CurvePoint { budget, solved, fraction: ratio(solved, m.total) });
    }
    m
}

/// The scaling curve as CSV: `budget,cumulative_solved_fraction`, one row
/// per distinct success cost.
pub fn emit_scaling_curve(records: &[RunRecord], out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["budget", "cumulative_solved_fraction"])?;
    for p in compute_metrics(records).curve {
        w.write_record([p.budget.to_string(), p.fraction.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
