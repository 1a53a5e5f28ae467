use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use leanagent_core::verifier::{content_hash, CheckRequest, WorkerCommand, WorkerConnection};
use serde_json::{json, Value};

const BIN: &str = env!("CARGO_BIN_EXE_leanagent");

fn core_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core")
}

fn leanagent(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        o.status,
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_jsonl(path: &Path, lines: &[Value]) {
    fs::write(path, lines.iter().map(|l| l.to_string() + "\n").collect::<String>()).unwrap();
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn index_build_and_query() {
    let dir = tempfile::tempdir().unwrap();
    let idx = dir.path().join("index.jsonl");
    let dump = core_dir().join("fixtures/declarations_1k.jsonl");
    stdout(&leanagent(&["index", "build", p(&dump), "-o", p(&idx)]));
    let out = stdout(&leanagent(&["index", "query", p(&idx), "AntitoneOn.sum_le_integral_Icc", "-k", "5"]));
    let hits: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(hits.len(), 5);
    assert_eq!(hits[0]["decl"]["name"], "AntitoneOn.sum_le_integral_Ico");

    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "{\"name\":\"a\",\"signature\":\"T\"}\nnot json\n").unwrap();
    let strict = leanagent(&["index", "build", p(&bad), "-o", p(&idx)]);
    assert_eq!(strict.status.code(), Some(2));
    stdout(&leanagent(&["index", "build", p(&bad), "-o", p(&idx), "--lenient"]));
}

#[test]
fn sketch_extract_and_consolidate() {
    let sketches = core_dir().join("tests/fixtures/sketches");
    let file = sketches.join("02_suppose_intro.sketch");
    let out = stdout(&leanagent(&["sketch", "extract", p(&file)]));
    let sources: Vec<String> = out
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["statement"]["source"].as_str().unwrap().to_string())
        .collect();
    let expected = fs::read_to_string(sketches.join("02_suppose_intro.subproblems")).unwrap();
    assert_eq!(sources, expected.lines().collect::<Vec<_>>());

    let proofs = tempfile::tempdir().unwrap();
    fs::write(proofs.path().join("s1.lean"), "exact proof_of_s1\n").unwrap();
    let missing = leanagent(&["sketch", "consolidate", p(&file), "--proofs", p(proofs.path())]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("no proof for step `s2`"));
    fs::write(proofs.path().join("s2.lean"), "exact proof_of_s2\n").unwrap();
    let out = stdout(&leanagent(&["sketch", "consolidate", p(&file), "--proofs", p(proofs.path())]));
    assert_eq!(out, fs::read_to_string(sketches.join("02_suppose_intro.consolidated")).unwrap());
}

const STATEMENT: &str = "theorem th (a : ℤ) (h : a > 0) : a ≥ 0";

fn mock_config(dir: &Path, verifier: &str) -> PathBuf {
    let cfg = dir.join("config.toml");
    fs::write(
        &cfg,
        format!(
            "[budget]\nrounds_m = 1\nrepairs_n = 2\n\n[llm]\nbackend = \"mock\"\nscript = \"llm.jsonl\"\n\n{verifier}"
        ),
    )
    .unwrap();
    cfg
}

#[test]
fn prove_with_mocks() {
    let dir = tempfile::tempdir().unwrap();
    write_jsonl(
        &dir.path().join("llm.jsonl"),
        &[
            json!({"key": "formal_proof/th", "response": "```lean\nlinarith\n```"}),
            json!({"key": "repair/th", "response": "```lean\nomega\n```"}),
        ],
    );
    write_jsonl(
        &dir.path().join("verifier.jsonl"),
        &[json!({"default": "reject"}), json!({"hash": content_hash(STATEMENT, "omega"), "ok": true})],
    );
    let cfg = mock_config(dir.path(), "[verifier]\nbackend = \"mock\"\nscript = \"verifier.jsonl\"\n");
    let st = dir.path().join("th.lean");
    fs::write(
        &st,
        format!("import Mathlib\n\n/-- A positive integer is non-negative. -/\n{STATEMENT} := by\n  sorry\n"),
    )
    .unwrap();
    let transcript = dir.path().join("t.jsonl");
    let out = leanagent(&["prove", p(&st), "-c", p(&cfg), "--mode", "direct", "--transcript", p(&transcript)]);
    let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["status"], "proved");
    assert_eq!(summary["proof"], "omega");
    assert_eq!(summary["ledger"]["llm_calls"], 2);
    let events = fs::read_to_string(&transcript).unwrap();
    assert_eq!(events.lines().filter(|l| l.contains("\"event\":\"completion\"")).count(), 2);

    // A budget of one call cannot reach the repair.
    let out = leanagent(&["prove", p(&st), "-c", p(&cfg), "--mode", "direct", "--n", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let bad = leanagent(&["prove", p(&st), "-c", p(&cfg), "--m", "0"]);
    assert_eq!(bad.status.code(), Some(2));
}

/// Four problems; `q<i>` is proved by its first repair, except `q4` which never is.
fn bench_fixture(dir: &Path, delay_ms: u64) -> (PathBuf, PathBuf) {
    let mut problems = Vec::new();
    let mut llm = Vec::new();
    let mut verifier = vec![json!({"default": "reject"})];
    for i in 1..=4 {
        let id = format!("q{i}");
        let statement = format!("theorem {id} (a : ℕ) : a + {i} > 0");
        problems.push(json!({"id": id, "header": "import Mathlib", "statement": statement, "informal": "Positive.", "tags": ["toy"]}));
        llm.push(json!({"key": format!("formal_proof/{id}"), "response": format!("```lean\nfirst_{i}\n```")}));
        llm.push(json!({"key": format!("repair/{id}"), "response": format!("```lean\nsecond_{i}\n```")}));
        verifier
            .push(json!({"hash": content_hash(&statement, &format!("first_{i}")), "ok": false, "delayMs": delay_ms,
            "diagnostics": [{"line": 1, "col": 0, "severity": "error", "message": "linarith failed"}]}));
        verifier
            .push(json!({"hash": content_hash(&statement, &format!("second_{i}")), "ok": i != 4, "delayMs": delay_ms}));
    }
    let bench = dir.join("bench.jsonl");
    write_jsonl(&bench, &problems);
    write_jsonl(&dir.join("llm.jsonl"), &llm);
    write_jsonl(&dir.join("verifier.jsonl"), &verifier);
    let verifier_cfg = format!(
        "[verifier]\nbackend = \"process\"\ncommand = [{:?}, \"mock-worker\", \"--script\", {:?}]\npool_size = 2\n",
        BIN,
        p(&dir.join("verifier.jsonl"))
    );
    (bench, mock_config(dir, &verifier_cfg))
}

#[test]
fn bench_run_metrics_curve_over_a_process_pool() {
    let dir = tempfile::tempdir().unwrap();
    let (bench, cfg) = bench_fixture(dir.path(), 0);
    let run = dir.path().join("run");
    let out = stdout(&leanagent(&[
        "bench",
        "run",
        p(&bench),
        "-c",
        p(&cfg),
        "-o",
        p(&run),
        "--mode",
        "direct",
        "--workers",
        "2",
    ]));
    let m: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(m["accuracy"], 0.75);
    assert_eq!(m["sample_budget"], 2);
    assert_eq!(m["per_tag"]["toy"]["proved"], 3);

    let again: Value = serde_json::from_str(&stdout(&leanagent(&["bench", "metrics", p(&run)]))).unwrap();
    assert_eq!(again, m);
    let curve = dir.path().join("curve.csv");
    stdout(&leanagent(&["bench", "curve", p(&run), "-o", p(&curve)]));
    assert_eq!(fs::read_to_string(&curve).unwrap(), "budget,cumulative_solved_fraction\n2,0.75\n");
}

#[test]
fn bench_ablate_checks_the_budget() {
    let dir = tempfile::tempdir().unwrap();
    let (bench, cfg) = bench_fixture(dir.path(), 0);
    let grid = dir.path().join("grid.csv");
    let bad = leanagent(&[
        "bench",
        "ablate",
        p(&bench),
        "-c",
        p(&cfg),
        "--budget",
        "2",
        "--pairs",
        "2x1,3x1",
        "-o",
        p(&grid),
    ]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(!grid.exists());
    stdout(&leanagent(&[
        "bench",
        "ablate",
        p(&bench),
        "-c",
        p(&cfg),
        "--budget",
        "2",
        "--pairs",
        "2x1,1x2",
        "-o",
        p(&grid),
    ]));
    assert_eq!(fs::read_to_string(&grid).unwrap(), "m,n,accuracy,proved,total\n2,1,0.0,0,4\n1,2,0.75,3,4\n");
}

#[test]
fn bench_convert_lean_file() {
    let dir = tempfile::tempdir().unwrap();
    let lean = dir.path().join("Test.lean");
    fs::write(
        &lean,
        "import MiniF2F.Minif2fImport\nopen BigOperators Real Nat Topology Rat\n\n/-- Show that 2 + 2 = 4. -/\ntheorem mathd_algebra_1 : (2 : ℕ) + 2 = 4 := by\n  sorry\n\ntheorem imo_1959_p1 (n : ℕ) (h₀ : 0 < n) :\n    Nat.gcd (21 * n + 4) (14 * n + 3) = 1 := by\n  sorry\n",
    )
    .unwrap();
    let out = dir.path().join("minif2f.jsonl");
    stdout(&leanagent(&["bench", "convert", p(&lean), "-o", p(&out), "--tag", "minif2f"]));
    let rows: Vec<Value> =
        fs::read_to_string(&out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["informal"], "Show that 2 + 2 = 4.");
    assert_eq!(
        rows[1]["statement"],
        "theorem imo_1959_p1 (n : ℕ) (h₀ : 0 < n) : Nat.gcd (21 * n + 4) (14 * n + 3) = 1"
    );
    let problems = leanagent_core::harness::load_benchmark(&out).unwrap();
    assert_eq!(leanagent_core::harness::filter_tag(&problems, "imo").len(), 1);
}

#[test]
fn worker_answers_out_of_order_and_ids_route_back() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("v.jsonl");
    write_jsonl(
        &script,
        &[
            json!({"default": "reject"}),
            json!({"hash": content_hash("theorem slow : True", "trivial"), "ok": true, "delayMs": 400}),
            json!({"hash": content_hash("theorem fast : True", "trivial"), "ok": true}),
        ],
    );
    let conn =
        Arc::new(WorkerConnection::spawn(&WorkerCommand::new(BIN, ["mock-worker", "--script", p(&script)])).unwrap());
    let req = |name: &str| CheckRequest {
        imports: vec![],
        statement: format!("theorem {name} : True"),
        proof: "trivial".into(),
    };
    let slow = {
        let conn = Arc::clone(&conn);
        let r = req("slow");
        std::thread::spawn(move || {
            let resp = conn.request(&r, Duration::from_secs(5)).unwrap();
            (resp, Instant::now())
        })
    };
    std::thread::sleep(Duration::from_millis(50));
    let fast = conn.request(&req("fast"), Duration::from_secs(5)).unwrap();
    let fast_done = Instant::now();
    let (slow_resp, slow_done) = slow.join().unwrap();
    assert!(fast.ok && slow_resp.ok);
    assert_eq!(slow_resp.id, Some(1));
    assert_eq!(fast.id, Some(2));
    assert!(fast_done < slow_done, "the fast answer should overtake the slow one");
    let rejected = conn.request(&req("other"), Duration::from_secs(5)).unwrap();
    assert!(!rejected.ok);
}

fn snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for sub in ["records", "transcripts"] {
        let mut paths: Vec<_> = fs::read_dir(root.join(sub)).unwrap().map(|e| e.unwrap().path()).collect();
        paths.retain(|p| p.extension().is_some_and(|e| e != "tmp"));
        paths.sort();
        for p in paths {
            out.push((format!("{sub}/{}", p.file_name().unwrap().to_string_lossy()), fs::read(&p).unwrap()));
        }
    }
    out
}

fn record_count(run: &Path) -> usize {
    fs::read_dir(run.join("records"))
        .map(|d| d.filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "json")).count())
        .unwrap_or(0)
}

#[test]
fn sigkill_then_resume_matches_an_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let (bench, cfg) = bench_fixture(dir.path(), 150);
    let args = |run: &Path| {
        vec![
            "bench".to_string(),
            "run".into(),
            p(&bench).into(),
            "-c".into(),
            p(&cfg).into(),
            "-o".into(),
            p(run).into(),
            "--mode".into(),
            "direct".into(),
            "--fixed-clock".into(),
            "42".into(),
        ]
    };
    let clean = dir.path().join("clean");
    stdout(&Command::new(BIN).args(args(&clean)).output().unwrap());

    let run = dir.path().join("killed");
    let mut child = Command::new(BIN).args(args(&run)).stdout(Stdio::null()).stderr(Stdio::null()).spawn().unwrap();
    let deadline = Instant::now() + Duration::from_secs(20);
    while record_count(&run) == 0 {
        assert!(Instant::now() < deadline, "no record appeared");
        std::thread::sleep(Duration::from_millis(10));
    }
    child.kill().unwrap();
    child.wait().unwrap();
    let survived = record_count(&run);
    assert!(survived < 4, "the run finished before it was killed");

    stdout(&Command::new(BIN).args(args(&run)).output().unwrap());
    assert_eq!(snapshot(&run), snapshot(&clean));
}
