use std::io::Write;

use serde::{Deserialize, Serialize};

use super::BenchmarkProblem;
use crate::orchestrator::{BudgetConfig, ProveStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub m: u32,
    pub n: u32,
    pub accuracy: f64,
    pub proved: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AblationError {
    #[error("pair m={m}, n={n} spends {} calls, expected {budget}", u64::from(*m) * u64::from(*n))]
    BudgetMismatch { m: u32, n: u32, budget: u32 },
    #[error("no (m, n) pairs given")]
    NoPairs,
}

/// Every pair must spend exactly `total_budget` proof calls.
pub fn check_pairs(total_budget: u32, pairs: &[(u32, u32)]) -> Result<(), AblationError> {
    if pairs.is_empty() {
        return Err(AblationError::NoPairs);
    }
    for &(m, n) in pairs {
        if u64::from(m) * u64::from(n) != u64::from(total_budget) {
            return Err(AblationError::BudgetMismatch { m, n, budget: total_budget });
        }
    }
    Ok(())
}

/// Runs `solve` over every problem once per `(m, n)` pair, with `base`
/// supplying the non-ablated budget fields.
pub fn ablation_grid(
    problems: &[BenchmarkProblem],
    total_budget: u32,
    pairs: &[(u32, u32)],
    base: &BudgetConfig,
    mut solve: impl FnMut(&BenchmarkProblem, &BudgetConfig) -> ProveStatus,
) -> Result<Vec<AblationRow>, AblationError> {
    check_pairs(total_budget, pairs)?;
    Ok(pairs
        .iter()
        .map(|&(m, n)| {
            let config = BudgetConfig { rounds_m: m, repairs_n: n, ..*base };
            let proved = problems.iter().filter(|p| solve(p, &config) == ProveStatus::Proved).count();
            let total = problems.len();
            let accuracy = if total == 0 { 0.0 } else { proved as f64 / total as f64 };
            AblationRow { m, n, accuracy, proved, total }
        })
        .collect())
}

pub fn write_ablation_csv(rows: &[AblationRow], out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
