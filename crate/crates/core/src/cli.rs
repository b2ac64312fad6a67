//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 validation failure (bad arguments, schema or
//! consistency errors, refused inputs), 2 I/O or provider failure.

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::Utc;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{load_verdicts, AnalysisError, FlagThresholds};
use crate::benchmark::{
    classify_pool, ingest_questions, stratified_sample, validate_benchmark, BenchmarkError, BenchmarkSet, ChatLabeler,
};
use crate::bundle::BundleError;
use crate::config::{ConfigError, ConfigFile};
use crate::harness::{
    load_roster, run_collection, ChatProvider, ErrorPolicy, HarnessError, HttpProvider, InferenceConfig,
    JournalHeader, RunJournal, SimulatedProvider, BASE_URL_ENV, TOKEN_ENV,
};
use crate::irt::{FitSettings, IrtError};
use crate::pipeline::{build_bundle, fit_topics, FitsFile, PipelineError};
use crate::report::render_report;
use crate::serve::{self, ServeError, ServeState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;

/// Error reported to the user, with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Display) -> Self {
        Failure { code: EXIT_VALIDATION, message: message.to_string() }
    }

    pub fn io(message: impl Display) -> Self {
        Failure { code: EXIT_IO, message: message.to_string() }
    }
}

impl From<BenchmarkError> for Failure {
    fn from(e: BenchmarkError) -> Self {
        match e {
            BenchmarkError::Io { .. } | BenchmarkError::Labeler(_) => Failure::io(e),
            _ => Failure::validation(e),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Io { .. } => Failure::io(e),
            _ => Failure::validation(e),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Io { .. } => Failure::io(e),
            _ => Failure::validation(e),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Harness(e) => e.into(),
            PipelineError::Analysis(e) => e.into(),
            PipelineError::Io { .. } => Failure::io(e),
            _ => Failure::validation(e),
        }
    }
}

impl From<BundleError> for Failure {
    fn from(e: BundleError) -> Self {
        match e {
            BundleError::Io { .. } => Failure::io(e),
            _ => Failure::validation(e),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::io(e),
            _ => Failure::validation(e),
        }
    }
}

impl From<ServeError> for Failure {
    fn from(e: ServeError) -> Self {
        match e {
            ServeError::Verdicts(e) => e.into(),
            ServeError::UnknownItem(_) => Failure::validation(e),
            ServeError::Bind { .. } | ServeError::Io(_) => Failure::io(e),
        }
    }
}

impl From<IrtError> for Failure {
    fn from(e: IrtError) -> Self {
        Failure::validation(e)
    }
}

type CliResult<T = ()> = Result<T, Failure>;

#[derive(Debug, Parser)]
#[command(name = "topicirt", version, about = "Per-topic IRT evaluation of language models on multiple-choice benchmarks")]
struct Cli {
    /// Flat key = value file supplying defaults for any flag.
    #[arg(long, global = true, env = "TOPICIRT_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ingest question pools and draw a stratified benchmark.
    Build(BuildArgs),
    /// Query every roster model on every benchmark question.
    Collect(CollectArgs),
    /// Fit one 2PL model per topic from a journal.
    Fit(FitArgs),
    /// Compose rankings, efficiency and audits into a result bundle.
    Report(ReportArgs),
    /// Serve a result bundle and accept audit verdicts.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct BuildArgs {
    /// Line-delimited question files, read in order.
    #[arg(long = "input", num_args = 1..)]
    inputs: Vec<PathBuf>,
    #[arg(long, env = "TOPICIRT_PER_TOPIC")]
    per_topic: Option<usize>,
    #[arg(long, env = "TOPICIRT_SEED")]
    seed: Option<u64>,
    /// Benchmark questions file; the manifest is written beside it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write rejected input records.
    #[arg(long)]
    rejects: Option<PathBuf>,
    /// Chat model that labels questions arriving without a topic.
    #[arg(long)]
    label_model: Option<String>,
    #[arg(long)]
    label_concurrency: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProviderKind {
    Simulated,
    Http,
}

impl std::str::FromStr for ProviderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <ProviderKind as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Args)]
struct CollectArgs {
    #[arg(long, env = "TOPICIRT_BENCHMARK")]
    benchmark: Option<PathBuf>,
    #[arg(long, env = "TOPICIRT_ROSTER")]
    roster: Option<PathBuf>,
    #[arg(long, env = "TOPICIRT_JOURNAL")]
    journal: Option<PathBuf>,
    #[arg(long, env = "TOPICIRT_PARALLELISM")]
    parallelism: Option<usize>,
    #[arg(long, value_enum, env = "TOPICIRT_PROVIDER")]
    provider: Option<ProviderKind>,
    /// Seed for the simulated provider.
    #[arg(long)]
    sim_seed: Option<u64>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_tokens: Option<u32>,
    #[arg(long)]
    reasoning_effort: Option<String>,
    #[arg(long)]
    max_attempts: Option<u32>,
    #[arg(long)]
    attempt_timeout_secs: Option<f64>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long, env = "TOPICIRT_BENCHMARK")]
    benchmark: Option<PathBuf>,
    #[arg(long, env = "TOPICIRT_JOURNAL")]
    journal: Option<PathBuf>,
    #[arg(long, env = "TOPICIRT_ROSTER")]
    roster: Option<PathBuf>,
    #[arg(long, env = "TOPICIRT_GRID_NODES")]
    grid_nodes: Option<usize>,
    #[arg(long)]
    grid_half_span: Option<f64>,
    #[arg(long, env = "TOPICIRT_TOL")]
    tol: Option<f64>,
    #[arg(long, env = "TOPICIRT_MAX_CYCLES")]
    max_cycles: Option<usize>,
    /// Treat residual provider errors and timeouts as missing, not incorrect.
    #[arg(long)]
    errors_as_missing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long, env = "TOPICIRT_FITS")]
    fits: Option<PathBuf>,
    #[arg(long, env = "TOPICIRT_BENCHMARK")]
    benchmark: Option<PathBuf>,
    #[arg(long, env = "TOPICIRT_JOURNAL")]
    journal: Option<PathBuf>,
    #[arg(long, env = "TOPICIRT_ROSTER")]
    roster: Option<PathBuf>,
    /// Verdict file to apply to the audit worklist.
    #[arg(long, env = "TOPICIRT_VERDICTS")]
    verdicts: Option<PathBuf>,
    #[arg(long)]
    extreme_b: Option<f64>,
    #[arg(long)]
    near_zero_a: Option<f64>,
    /// Bundle file to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, env = "TOPICIRT_BUNDLE")]
    bundle: Option<PathBuf>,
    #[arg(long, env = "TOPICIRT_ADDRESS")]
    address: Option<String>,
    #[arg(long, env = "TOPICIRT_VERDICTS")]
    verdicts: Option<PathBuf>,
    /// Directory of built explorer assets served at `/`.
    #[arg(long, env = "TOPICIRT_ASSETS")]
    assets: Option<PathBuf>,
}

fn required<T>(value: Option<T>, key: &str) -> CliResult<T> {
    value.ok_or_else(|| Failure::validation(format!("--{} is required (flag, environment or config)", key.replace('_', "-"))))
}

fn runtime() -> CliResult<tokio::runtime::Runtime> {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(Failure::io)
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: Cli) -> CliResult {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Build(a) => cmd_build(a, &file),
        Command::Collect(a) => cmd_collect(a, &file),
        Command::Fit(a) => cmd_fit(a, &file),
        Command::Report(a) => cmd_report(a, &file),
        Command::Serve(a) => cmd_serve(a, &file),
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))
}

fn cmd_build(a: BuildArgs, file: &ConfigFile) -> CliResult {
    let inputs = if a.inputs.is_empty() {
        file.raw("input").map(|v| v.split(',').map(|p| PathBuf::from(p.trim())).collect()).unwrap_or_default()
    } else {
        a.inputs
    };
    if inputs.is_empty() {
        return Err(Failure::validation("--input is required (flag or config)"));
    }
    let per_topic = file.resolve(a.per_topic, "per_topic", 100)?;
    let seed = required(file.resolve_opt(a.seed, "seed")?, "seed")?;
    let out = required(a.out, "out")?;
    let rejects_path = file.resolve_opt(a.rejects, "rejects")?;
    let label_model = file.resolve_opt(a.label_model, "label_model")?;
    let concurrency = file.resolve(a.label_concurrency, "label_concurrency", 8)?;
    if per_topic == 0 {
        return Err(Failure::validation("--per-topic must be positive"));
    }

    let outcome = ingest_questions(&inputs)?;
    eprintln!("ingested {} questions, rejected {}", outcome.pool.len(), outcome.rejects.len());
    if let Some(path) = &rejects_path {
        let lines: String =
            outcome.rejects.iter().map(|r| serde_json::to_string(r).expect("reject serializes") + "\n").collect();
        write_file(path, &lines)?;
    }

    let mut pool = outcome.pool;
    let unlabeled = pool.iter().filter(|q| q.topic.is_none()).count();
    if unlabeled > 0 {
        match label_model {
            Some(model) => {
                let provider = HttpProvider::from_env()
                    .ok_or_else(|| Failure::validation(format!("labeling needs {BASE_URL_ENV} (and {TOKEN_ENV})")))?;
                let labeler = ChatLabeler::new(Arc::new(provider), model, InferenceConfig::default());
                pool = runtime()?.block_on(classify_pool(pool, &labeler, concurrency));
                let still = pool.iter().filter(|q| q.topic.is_none()).count();
                eprintln!("labeled {} of {unlabeled} unlabeled questions", unlabeled - still);
            }
            None => eprintln!("{unlabeled} questions have no topic and are skipped"),
        }
    }

    let set = stratified_sample(&pool, per_topic, seed)?;
    set.save(&out)?;
    let report = validate_benchmark(&set);
    for f in &report.findings {
        eprintln!("finding: {}", serde_json::to_string(f).expect("finding serializes"));
    }
    println!("wrote {} questions to {} (sha256 {})", set.questions.len(), out.display(), set.hash());
    Ok(())
}

fn inference_config(a: &CollectArgs, file: &ConfigFile) -> CliResult<InferenceConfig> {
    let d = InferenceConfig::default();
    let config = InferenceConfig {
        temperature: file.resolve(a.temperature, "temperature", d.temperature)?,
        max_tokens: file.resolve(a.max_tokens, "max_tokens", d.max_tokens)?,
        reasoning_effort: file.resolve(a.reasoning_effort.clone(), "reasoning_effort", d.reasoning_effort)?,
        max_attempts: file.resolve(a.max_attempts, "max_attempts", d.max_attempts)?,
        attempt_timeout_secs: file.resolve(a.attempt_timeout_secs, "attempt_timeout_secs", d.attempt_timeout_secs)?,
        ..d
    };
    config.validate()?;
    Ok(config)
}

fn cmd_collect(a: CollectArgs, file: &ConfigFile) -> CliResult {
    let config = inference_config(&a, file)?;
    let benchmark_path = required(file.resolve_opt(a.benchmark, "benchmark")?, "benchmark")?;
    let roster_path = required(file.resolve_opt(a.roster, "roster")?, "roster")?;
    let journal_path = required(file.resolve_opt(a.journal, "journal")?, "journal")?;
    let parallelism = file.resolve(a.parallelism, "parallelism", 8)?;
    let kind = file.resolve(a.provider, "provider", ProviderKind::Http)?;
    let sim_seed = file.resolve(a.sim_seed, "sim_seed", 0)?;
    if parallelism == 0 {
        return Err(Failure::validation("--parallelism must be positive"));
    }

    let benchmark = BenchmarkSet::load(&benchmark_path)?;
    let roster = load_roster(&roster_path)?;
    let provider: Box<dyn ChatProvider> = match kind {
        ProviderKind::Simulated => Box::new(SimulatedProvider::new(&benchmark.questions, &roster, sim_seed)),
        ProviderKind::Http => Box::new(
            HttpProvider::from_env().ok_or_else(|| Failure::validation(format!("the http provider needs {BASE_URL_ENV}")))?,
        ),
    };
    let header = JournalHeader::new(benchmark.hash(), config.clone(), Utc::now());
    let mut journal = RunJournal::open_or_create(&journal_path, header)?;

    let total = roster.len() * benchmark.questions.len();
    let mut done = journal.len();
    let mut failed = 0usize;
    let rt = runtime()?;
    let outcome = rt.block_on(async {
        let work = run_collection(&benchmark, &roster, provider.as_ref(), &mut journal, &config, parallelism, |r| {
            done += 1;
            if r.final_status.is_error() {
                failed += 1;
            }
            if done % 100 == 0 || done == total {
                eprintln!("collected {done}/{total}");
            }
        });
        tokio::select! {
            r = work => Some(r),
            _ = tokio::signal::ctrl_c() => None,
        }
    });
    let summary = match outcome {
        Some(r) => r?,
        None => return Err(Failure::io("interrupted; rerun the same command to resume")),
    };
    println!(
        "queried {} pairs, {} already journaled, {} ended in provider errors or timeouts",
        summary.executed, summary.skipped, failed
    );
    if summary.executed > 0 && failed == summary.executed {
        return Err(Failure::io("every request failed; check the provider"));
    }
    Ok(())
}

fn cmd_fit(a: FitArgs, file: &ConfigFile) -> CliResult {
    let d = FitSettings::default();
    let settings = FitSettings {
        grid_nodes: file.resolve(a.grid_nodes, "grid_nodes", d.grid_nodes)?,
        grid_half_span: file.resolve(a.grid_half_span, "grid_half_span", d.grid_half_span)?,
        tol: file.resolve(a.tol, "tol", d.tol)?,
        max_cycles: file.resolve(a.max_cycles, "max_cycles", d.max_cycles)?,
        ..d
    };
    settings.validate()?;
    let errors_as_missing = a.errors_as_missing || file.get::<bool>("errors_as_missing")?.unwrap_or(false);
    let policy = if errors_as_missing { ErrorPolicy::Missing } else { ErrorPolicy::Incorrect };
    let benchmark = BenchmarkSet::load(&required(file.resolve_opt(a.benchmark, "benchmark")?, "benchmark")?)?;
    let journal = RunJournal::open(&required(file.resolve_opt(a.journal, "journal")?, "journal")?)?;
    let roster = load_roster(&required(file.resolve_opt(a.roster, "roster")?, "roster")?)?;
    let out = required(a.out, "out")?;

    let (fits, _) = fit_topics(&journal, &benchmark, &roster, &settings, policy)?;
    for e in fits.eligibility.iter().filter(|e| !e.reasons.is_empty()) {
        eprintln!("{}: {:?} ({})", e.model_id, e.status, e.reasons.join("; "));
    }
    for f in &fits.fits {
        let rel = f.reliability.map_or_else(|| "n/a".into(), |r| format!("{r:.3}"));
        let conv = if f.converged { "" } else { ", not converged" };
        println!(
            "{}: {} items ({} excluded), reliability {rel}, {} cycles{conv}",
            f.topic,
            f.fitted_items().count(),
            f.exclusions.excluded.len(),
            f.em_cycles
        );
    }
    fits.save(&out)?;
    Ok(())
}

fn cmd_report(a: ReportArgs, file: &ConfigFile) -> CliResult {
    let d = FlagThresholds::default();
    let thresholds = FlagThresholds {
        extreme_b: file.resolve(a.extreme_b, "extreme_b", d.extreme_b)?,
        near_zero_a: file.resolve(a.near_zero_a, "near_zero_a", d.near_zero_a)?,
    };
    let fits = FitsFile::load(&required(file.resolve_opt(a.fits, "fits")?, "fits")?)?;
    let benchmark = BenchmarkSet::load(&required(file.resolve_opt(a.benchmark, "benchmark")?, "benchmark")?)?;
    let journal = RunJournal::open(&required(file.resolve_opt(a.journal, "journal")?, "journal")?)?;
    let roster = load_roster(&required(file.resolve_opt(a.roster, "roster")?, "roster")?)?;
    let verdicts = match file.resolve_opt(a.verdicts, "verdicts")? {
        Some(path) => load_verdicts(&path)?,
        None => Vec::new(),
    };
    let out = required(a.out, "out")?;

    let bundle = build_bundle(&fits, &journal, &benchmark, &roster, &thresholds, &verdicts)?;
    bundle.validate()?;
    bundle.save(&out)?;
    print!("{}", render_report(&bundle));
    Ok(())
}

fn cmd_serve(a: ServeArgs, file: &ConfigFile) -> CliResult {
    let bundle_path = required(file.resolve_opt(a.bundle, "bundle")?, "bundle")?;
    let address = file.resolve(a.address, "address", "127.0.0.1:8080".to_string())?;
    let verdicts = file.resolve(a.verdicts, "verdicts", bundle_path.with_extension("verdicts.jsonl"))?;
    let assets = file.resolve_opt(a.assets, "assets")?;
    if let Some(dir) = &assets {
        if !dir.is_dir() {
            return Err(Failure::io(format!("assets directory {} does not exist", dir.display())));
        }
    }
    let bundle = crate::bundle::ResultBundle::load(&bundle_path)?;
    let state = Arc::new(ServeState::new(bundle, &verdicts)?);

    runtime()?.block_on(async {
        let listener = serve::bind(&address).await?;
        if let Some(addr) = serve::local_addr(&listener) {
            println!("serving {} on http://{addr}", bundle_path.display());
        }
        let app = serve::router(state, assets.as_deref());
        serve::serve(listener, app, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
    })?;
    Ok(())
}
