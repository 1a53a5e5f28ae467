use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use leanagent_core::config::{Config, Runtime};
use leanagent_core::harness::{
    ablation_grid, check_pairs, compute_metrics, convert_lean_file, emit_scaling_curve, load_benchmark, run_suite,
    write_ablation_csv, BenchmarkEntry, BenchmarkProblem, RunDir, SuiteOptions,
};
use leanagent_core::orchestrator::{prove_with_mode, BudgetConfig, Clock, FixedClock, Mode, ProveStatus, SystemClock};
use leanagent_core::retrieval::Index;
use leanagent_core::sketch::{consolidate, extract_subproblems, parse};
use leanagent_core::verifier::{serve_mock, FormalProof, MockDefault, MockVerifier, ProofOrigin};

#[derive(Parser)]
#[command(name = "leanagent", version, about = "Lean 4 proving agent: repair loop, sketch decomposition, benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or query a declaration index.
    #[command(subcommand)]
    Index(IndexCommand),
    /// Work with proof sketches.
    #[command(subcommand)]
    Sketch(SketchCommand),
    /// Prove a single theorem statement.
    Prove(ProveArgs),
    /// Run and evaluate benchmark suites.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Serve the verifier wire protocol on stdin/stdout from a mock script.
    MockWorker {
        /// JSONL mock script.
        #[arg(long)]
        script: Option<PathBuf>,
        /// Behavior when no script entry matches: accept, reject or elaborate.
        #[arg(long, default_value = "reject")]
        default: String,
    },
}

#[derive(Subcommand)]
enum IndexCommand {
    /// Build an index from a JSONL declaration dump.
    Build {
        dump: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Skip malformed lines instead of failing.
        #[arg(long)]
        lenient: bool,
    },
    /// Print the closest declarations to a name as JSON lines.
    Query {
        index: PathBuf,
        name: String,
        #[arg(short, default_value_t = 5)]
        k: usize,
    },
}

#[derive(Subcommand)]
enum SketchCommand {
    /// Print the sub-problem statements of a sketch as JSON lines.
    Extract { file: PathBuf },
    /// Assemble a full proof from a sketch and one `<label>.lean` proof per step.
    Consolidate {
        file: PathBuf,
        #[arg(long)]
        proofs: PathBuf,
    },
}

#[derive(Args)]
struct BudgetArgs {
    /// Rounds of the direct repair loop.
    #[arg(long)]
    m: Option<u32>,
    /// Attempts per round.
    #[arg(long)]
    n: Option<u32>,
    /// Sketch attempts.
    #[arg(long)]
    lmax: Option<u32>,
    /// Rounds per sub-problem.
    #[arg(long)]
    mtilde: Option<u32>,
    /// Attempts per sub-problem round.
    #[arg(long)]
    ntilde: Option<u32>,
}

impl BudgetArgs {
    fn apply(&self, b: &mut BudgetConfig) {
        let set = |field: &mut u32, v: Option<u32>| {
            if let Some(v) = v {
                *field = v;
            }
        };
        set(&mut b.rounds_m, self.m);
        set(&mut b.repairs_n, self.n);
        set(&mut b.decomp_attempts, self.lmax);
        set(&mut b.sub_rounds, self.mtilde);
        set(&mut b.sub_repairs, self.ntilde);
    }
}

#[derive(Args)]
struct ProveArgs {
    /// Lean file holding `import` lines and one theorem statement.
    statement: PathBuf,
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// direct, full or bon.
    #[arg(long)]
    mode: Option<Mode>,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Where to write the JSONL transcript.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Use a constant clock, for reproducible output.
    #[arg(long)]
    fixed_clock: Option<u64>,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Prove every problem of a benchmark, writing records under the run directory.
    Run {
        benchmark: PathBuf,
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        workers: Option<usize>,
        /// Only problems carrying this tag.
        #[arg(long)]
        tag: Option<String>,
        /// Re-run problems that already have records.
        #[arg(long)]
        no_resume: bool,
        /// Use a constant clock, for reproducible records.
        #[arg(long)]
        fixed_clock: Option<u64>,
    },
    /// Print accuracy, sample budget and per-tag metrics of a run as JSON.
    Metrics { rundir: PathBuf },
    /// Write the scaling curve of a run as CSV.
    Curve {
        rundir: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compare (m, n) splits of one budget.
    Ablate {
        benchmark: PathBuf,
        #[arg(short, long)]
        config: PathBuf,
        /// Total proof calls per problem; every pair must multiply to it.
        #[arg(long)]
        budget: u32,
        /// Comma-separated `MxN` pairs, e.g. `16x1,4x4,1x16`.
        #[arg(long, value_delimiter = ',')]
        pairs: Vec<String>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value = "direct")]
        mode: Mode,
        #[arg(long)]
        tag: Option<String>,
    },
    /// Convert a Lean file of theorem statements into benchmark JSONL.
    Convert {
        lean_file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Tag added to every problem; repeatable.
        #[arg(long)]
        tag: Vec<String>,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Index(cmd) => index(cmd)?,
        Command::Sketch(cmd) => sketch(cmd)?,
        Command::Prove(args) => return prove(args),
        Command::Bench(cmd) => bench(cmd)?,
        Command::MockWorker { script, default } => {
            let mock = match script {
                Some(path) => MockVerifier::from_path(&path)?,
                None => MockVerifier::new(parse_mock_default(&default)?),
            };
            serve_mock(&mock, io::stdin().lock(), io::stdout())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_mock_default(s: &str) -> Result<MockDefault> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .with_context(|| format!("unknown mock default `{s}` (expected accept, reject or elaborate)"))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn index(cmd: IndexCommand) -> Result<()> {
    match cmd {
        IndexCommand::Build { dump, output, lenient } => {
            let (index, report) = Index::from_jsonl(open(&dump)?, lenient)?;
            for (line, why) in &report.skipped {
                eprintln!("skipped line {line}: {why}");
            }
            let mut out = create(&output)?;
            index.write_jsonl(&mut out)?;
            out.flush()?;
            eprintln!("{} declarations written to {}", index.len(), output.display());
        }
        IndexCommand::Query { index, name, k } => {
            let (index, _) = Index::from_jsonl(open(&index)?, false)?;
            let mut out = io::stdout().lock();
            for hit in index.lookup(&name, k) {
                serde_json::to_writer(&mut out, &hit)?;
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

fn sketch(cmd: SketchCommand) -> Result<()> {
    match cmd {
        SketchCommand::Extract { file } => {
            let ast = parse(&read(&file)?).with_context(|| format!("parsing {}", file.display()))?;
            let mut out = io::stdout().lock();
            for sub in extract_subproblems(&ast)? {
                serde_json::to_writer(&mut out, &sub)?;
                writeln!(out)?;
            }
        }
        SketchCommand::Consolidate { file, proofs } => {
            let ast = parse(&read(&file)?).with_context(|| format!("parsing {}", file.display()))?;
            let mut by_label: BTreeMap<String, FormalProof> = ast.inline_proofs();
            for label in ast.show_labels() {
                let path = proofs.join(format!("{label}.lean"));
                if path.exists() {
                    by_label.insert(label.to_string(), FormalProof::new(read(&path)?.trim_end(), ProofOrigin::Direct));
                } else if !by_label.contains_key(label) {
                    bail!("no proof for step `{label}`: expected {}", path.display());
                }
            }
            println!("{}", consolidate(&ast, &by_label)?.source);
        }
    }
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(Config::default()),
    }
}

fn clock(fixed: Option<u64>) -> Box<dyn Clock> {
    match fixed {
        Some(ms) => Box::new(FixedClock(ms)),
        None => Box::new(SystemClock),
    }
}

fn prove(args: ProveArgs) -> Result<ExitCode> {
    let mut config = load_config(args.config.as_deref())?;
    args.budget.apply(&mut config.budget);
    config.validate()?;
    let mode = args.mode.unwrap_or(config.run.mode);

    let src = read(&args.statement)?;
    let entry = convert_lean_file(&src, &[])
        .into_iter()
        .next()
        .with_context(|| format!("no theorem statement in {}", args.statement.display()))?;
    let problem = entry.into_problem()?;

    let runtime = Runtime::from_config(&config)?;
    let clock = clock(args.fixed_clock);
    let outcome = prove_with_mode(&problem.instance(), &config.budget, mode, &runtime.backends(clock.as_ref()));
    if let Some(path) = &args.transcript {
        let mut out = create(path)?;
        outcome.transcript.write_jsonl(&mut out)?;
        out.flush()?;
    }
    let summary = serde_json::json!({
        "id": problem.id,
        "status": outcome.status,
        "path": outcome.path,
        "proof": outcome.proof.as_ref().map(|p| &p.source),
        "abort_reason": outcome.abort_reason,
        "ledger": outcome.ledger,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(match outcome.status {
        ProveStatus::Proved => ExitCode::SUCCESS,
        ProveStatus::Failed => ExitCode::from(1),
        ProveStatus::Aborted => ExitCode::from(3),
    })
}

fn select(problems: Vec<BenchmarkProblem>, tag: Option<&str>) -> Vec<BenchmarkProblem> {
    match tag {
        Some(t) => problems.into_iter().filter(|p| p.has_tag(t)).collect(),
        None => problems,
    }
}

fn parse_pair(s: &str) -> Result<(u32, u32)> {
    let (m, n) = s.trim().split_once(['x', 'X']).with_context(|| format!("pair `{s}` is not MxN"))?;
    Ok((m.parse().with_context(|| format!("pair `{s}`"))?, n.parse().with_context(|| format!("pair `{s}`"))?))
}

fn bench(cmd: BenchCommand) -> Result<()> {
    match cmd {
        BenchCommand::Run { benchmark, config, output, mode, workers, tag, no_resume, fixed_clock } => {
            let config = load_config(Some(&config))?;
            let problems = select(load_benchmark(&benchmark)?, tag.as_deref());
            let runtime = Runtime::from_config(&config)?;
            let clock = clock(fixed_clock);
            let opts = SuiteOptions {
                mode: mode.unwrap_or(config.run.mode),
                workers: workers.unwrap_or(config.run.workers),
                resume: !no_resume,
                fault_hook: None,
            };
            let records =
                run_suite(&problems, &config.budget, &runtime.backends(clock.as_ref()), &RunDir::new(&output), &opts)?;
            println!("{}", serde_json::to_string_pretty(&compute_metrics(&records))?);
        }
        BenchCommand::Metrics { rundir } => {
            let records = RunDir::new(rundir).read_records()?;
            println!("{}", serde_json::to_string_pretty(&compute_metrics(&records))?);
        }
        BenchCommand::Curve { rundir, output } => {
            let records = RunDir::new(rundir).read_records()?;
            emit_scaling_curve(&records, create(&output)?)?;
        }
        BenchCommand::Ablate { benchmark, config, budget, pairs, output, mode, tag } => {
            let config = load_config(Some(&config))?;
            let problems = select(load_benchmark(&benchmark)?, tag.as_deref());
            let pairs = pairs.iter().map(|p| parse_pair(p)).collect::<Result<Vec<_>>>()?;
            check_pairs(budget, &pairs)?;
            let clock = SystemClock;
            // Backends are rebuilt for each pair so scripted mocks start fresh.
            let mut current: Option<(BudgetConfig, Runtime)> = None;
            let mut failure: Option<anyhow::Error> = None;
            let rows = ablation_grid(&problems, budget, &pairs, &config.budget, |p, cfg| {
                if current.as_ref().map(|(c, _)| c) != Some(cfg) {
                    match Runtime::from_config(&config) {
                        Ok(rt) => current = Some((*cfg, rt)),
                        Err(e) => {
                            failure.get_or_insert(e.into());
                            return ProveStatus::Aborted;
                        }
                    }
                }
                let (_, rt) = current.as_ref().expect("runtime built above");
                prove_with_mode(&p.instance(), cfg, mode, &rt.backends(&clock)).status
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
            let mut out = create(&output)?;
            write_ablation_csv(&rows, &mut out)?;
            out.flush()?;
            for r in &rows {
                println!("m={} n={} accuracy={} ({}/{})", r.m, r.n, r.accuracy, r.proved, r.total);
            }
        }
        BenchCommand::Convert { lean_file, output, tag } => {
            let entries: Vec<BenchmarkEntry> = convert_lean_file(&read(&lean_file)?, &tag);
            let mut out = create(&output)?;
            for e in &entries {
                serde_json::to_writer(&mut out, e)?;
                writeln!(out)?;
            }
            out.flush()?;
            eprintln!("{} problems written to {}", entries.len(), output.display());
        }
    }
    Ok(())
}
