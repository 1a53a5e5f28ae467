//! Benchmark suites: loading, batch runs with resumable on-disk records,
//! metrics and the m/n ablation grid.

pub mod ablation;
pub mod benchmark;
pub mod metrics;
pub mod run;

pub use ablation::{ablation_grid, check_pairs, write_ablation_csv, AblationError, AblationRow};
pub use benchmark::{
    convert_lean_file, filter_tag, load_benchmark, parse_benchmark, BenchmarkEntry, BenchmarkError, BenchmarkProblem,
};
pub use metrics::{compute_metrics, emit_scaling_curve, CurvePoint, SuiteMetrics, TagMetrics};
pub use run::{run_suite, FaultHook, RunDir, RunRecord, Stage, SuiteError, SuiteOptions};

#[cfg(test)]
pub(crate) fn record_fixture(id: &str, cost: Option<u64>) -> RunRecord {
    use crate::orchestrator::{BudgetConfig, Mode, ProofPath, ProveStatus};
    RunRecord {
        problem_id: id.into(),
        status: if cost.is_some() { ProveStatus::Proved } else { ProveStatus::Failed },
        path: ProofPath::Direct,
        mode: Mode::Full,
        proof: cost.map(|_| "by simp".into()),
        llm_calls: cost.unwrap_or(16),
        verifier_calls: cost.unwrap_or(16),
        llm_calls_at_success: cost,
        per_phase: Default::default(),
        abort_reason: None,
        config: BudgetConfig::default(),
        tags: Vec::new(),
        started_ms: 0,
        finished_ms: 0,
        wall_time_ms: 0,
    }
}
