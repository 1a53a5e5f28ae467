use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{self, BufReader, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::BenchmarkProblem;
use crate::orchestrator::{
    prove_with_mode, Backends, BudgetConfig, Mode, ProofPath, ProveOutcome, ProveStatus, Transcript,
};

/// Everything kept about one problem of a suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem_id: String,
    pub status: ProveStatus,
    pub path: ProofPath,
    pub mode: Mode,
    pub proof: Option<String>,
    pub llm_calls: u64,
    pub verifier_calls: u64,
    pub llm_calls_at_success: Option<u64>,
    pub per_phase: BTreeMap<String, u64>,
    pub abort_reason: Option<String>,
    pub config: BudgetConfig,
    pub tags: Vec<String>,
    pub started_ms: u64,
    pub finished_ms: u64,
    pub wall_time_ms: u64,
}

impl RunRecord {
    fn new(
        problem: &BenchmarkProblem,
        outcome: &ProveOutcome,
        config: &BudgetConfig,
        mode: Mode,
        started_ms: u64,
        finished_ms: u64,
    ) -> Self {
        let l = &outcome.ledger;
        Self {
            problem_id: problem.id.clone(),
            status: outcome.status,
            path: outcome.path,
            mode,
            proof: outcome.proof.as_ref().map(|p| p.source.clone()),
            llm_calls: l.llm_calls,
            verifier_calls: l.verifier_calls,
            llm_calls_at_success: l.llm_calls_at_success,
            per_phase: l.per_phase.clone(),
            abort_reason: outcome.abort_reason.clone(),
            config: *config,
            tags: problem.tags.clone(),
            started_ms,
            finished_ms,
            wall_time_ms: l.wall_time_ms,
        }
    }
}

/// Points in a problem's lifecycle where a fault hook runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Started,
    TranscriptWritten,
    RecordWritten,
}

pub type FaultHook<'a> = &'a (dyn Fn(Stage, &str) + Sync);

pub struct SuiteOptions<'a> {
    pub mode: Mode,
    pub workers: usize,
    /// Keep existing records instead of re-running their problems.
    pub resume: bool,
    /// Called at every [`Stage`]; a panic here is not caught, which makes it
    /// usable for crash tests.
    pub fault_hook: Option<FaultHook<'a>>,
}

impl Default for SuiteOptions<'_> {
    fn default() -> Self {
        Self { mode: Mode::Full, workers: 1, resume: true, fault_hook: None }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: corrupt record: {source}")]
    CorruptRecord { path: PathBuf, source: serde_json::Error },
    #[error("duplicate problem id `{0}`")]
    DuplicateId(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> SuiteError + '_ {
    move |source| SuiteError::Io { path: path.to_path_buf(), source }
}

/// Output directory of a suite run: `records/<id>.json` is written last, so
/// its presence marks a finished problem.
#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn record_path(&self, id: &str) -> PathBuf {
        self.root.join("records").join(format!("{}.json", file_stem(id)))
    }

    pub fn transcript_path(&self, id: &str) -> PathBuf {
        self.root.join("transcripts").join(format!("{}.jsonl", file_stem(id)))
    }

    pub fn read_record(&self, id: &str) -> Result<Option<RunRecord>, SuiteError> {
        let path = self.record_path(id);
        match fs::read(&path) {
            Ok(bytes) => {
                serde_json::from_slice(&bytes).map(Some).map_err(|source| SuiteError::CorruptRecord { path, source })
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(SuiteError::Io { path, source: e }),
        }
    }

    /// All finished records, sorted by problem id.
    pub fn read_records(&self) -> Result<Vec<RunRecord>, SuiteError> {
        let dir = self.root.join("records");
        let entries = match fs::read_dir(&dir) {
            Ok(e) => e,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(SuiteError::Io { path: dir, source: e }),
        };
        let mut out = Vec::new();
        for entry in entries {
            let path = entry.map_err(io_err(&dir))?.path();
            if path.extension().is_some_and(|e| e == "json") {
                let bytes = fs::read(&path).map_err(io_err(&path))?;
                let record =
                    serde_json::from_slice(&bytes).map_err(|source| SuiteError::CorruptRecord { path, source })?;
                out.push(record);
            }
        }
        out.sort_by(|a: &RunRecord, b| a.problem_id.cmp(&b.problem_id));
        Ok(out)
    }

    pub fn read_transcript(&self, id: &str) -> Result<Transcript, SuiteError> {
        let path = self.transcript_path(id);
        let file = fs::File::open(&path).map_err(io_err(&path))?;
        Transcript::read_jsonl(BufReader::new(file)).map_err(io_err(&path))
    }

    fn write_transcript(&self, id: &str, t: &Transcript) -> Result<(), SuiteError> {
        let mut buf = Vec::new();
        t.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        write_atomic(&self.transcript_path(id), &buf)
    }

    fn write_record(&self, r: &RunRecord) -> Result<(), SuiteError> {
        let mut buf = serde_json::to_vec_pretty(r).expect("records serialize");
        buf.push(b'\n');
        write_atomic(&self.record_path(&r.problem_id), &buf)
    }
}

/// Ids are used as file names when they are plain; anything else gets a
/// sanitized name with a hash suffix so distinct ids never collide.
fn file_stem(id: &str) -> String {
    let plain = !id.is_empty()
        && !id.starts_with('.')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if plain {
        return id.to_string();
    }
    let clean: String = id.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).take(64).collect();
    let digest = Sha256::digest(id.as_bytes());
    format!("{clean}-{}", &hex::encode(digest)[..12])
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), SuiteError> {
    let dir = path.parent().expect("run paths have a parent");
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

fn run_one(
    problem: &BenchmarkProblem,
    config: &BudgetConfig,
    b: &Backends,
    dir: &RunDir,
    opts: &SuiteOptions,
) -> Result<RunRecord, SuiteError> {
    let hook = |stage| {
        if let Some(h) = opts.fault_hook {
            h(stage, &problem.id)
        }
    };
    hook(Stage::Started);
    let started = b.clock.now_ms();
    let instance = problem.instance();
    let outcome = catch_unwind(AssertUnwindSafe(|| prove_with_mode(&instance, config, opts.mode, b)));
    let finished = b.clock.now_ms();
    let (record, transcript) = match outcome {
        Ok(o) => (RunRecord::new(problem, &o, config, opts.mode, started, finished), o.transcript),
        Err(payload) => {
            let reason = format!("panic: {}", panic_message(payload.as_ref()));
            tracing::error!(id = %problem.id, %reason, "problem panicked");
            let mut t = Transcript::default();
            t.push(finished, "outcome", "outcome", serde_json::json!({"status": "aborted", "abort_reason": reason}));
            let record = RunRecord {
                problem_id: problem.id.clone(),
                status: ProveStatus::Aborted,
                path: ProofPath::Direct,
                mode: opts.mode,
                proof: None,
                llm_calls: 0,
                verifier_calls: 0,
                llm_calls_at_success: None,
                per_phase: BTreeMap::new(),
                abort_reason: Some(reason),
                config: *config,
                tags: problem.tags.clone(),
                started_ms: started,
                finished_ms: finished,
                wall_time_ms: finished.saturating_sub(started),
            };
            (record, t)
        }
    };
    dir.write_transcript(&problem.id, &transcript)?;
    hook(Stage::TranscriptWritten);
    dir.write_record(&record)?;
    hook(Stage::RecordWritten);
    Ok(record)
}

/// Proves every problem and writes its transcript and record under `dir`.
/// Returns the records in input order.
pub fn run_suite(
    problems: &[BenchmarkProblem],
    config: &BudgetConfig,
    b: &Backends,
    dir: &RunDir,
    opts: &SuiteOptions,
) -> Result<Vec<RunRecord>, SuiteError> {
    let mut seen = HashSet::new();
    for p in problems {
        if !seen.insert(p.id.as_str()) {
            return Err(SuiteError::DuplicateId(p.id.clone()));
        }
    }
    let mut results: Vec<Option<RunRecord>> = Vec::with_capacity(problems.len());
    for p in problems {
        results.push(if opts.resume { dir.read_record(&p.id)? } else { None });
    }
    let pending: Vec<usize> = (0..problems.len()).filter(|&i| results[i].is_none()).collect();
    tracing::info!(total = problems.len(), pending = pending.len(), "running suite");

    let next = AtomicUsize::new(0);
    let results = Mutex::new(results);
    let first_error: Mutex<Option<SuiteError>> = Mutex::new(None);
    std::thread::scope(|s| {
        for _ in 0..opts.workers.max(1).min(pending.len().max(1)) {
            s.spawn(|| loop {
                if first_error.lock().unwrap().is_some() {
                    return;
                }
                let Some(&i) = pending.get(next.fetch_add(1, Ordering::SeqCst)) else {
                    return;
                };
                match run_one(&problems[i], config, b, dir, opts) {
                    Ok(r) => results.lock().unwrap()[i] = Some(r),
                    Err(e) => {
                        first_error.lock().unwrap().get_or_insert(e);
                        return;
                    }
                }
            });
        }
    });
    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }
    Ok(results.into_inner().unwrap().into_iter().map(|r| r.expect("every problem ran")).collect())
}
