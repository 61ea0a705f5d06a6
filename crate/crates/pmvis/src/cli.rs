//! The `pmvis` command line: parse, exec, chart, gen, run and eval.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pmvis_core::agent::{run_session, IntentMode, SessionTranscript, ValidateConfig};
use pmvis_core::exec::emit_chart_spec;
use pmvis_core::llm::{LlmClient, ScriptEntry, ScriptedMock};
use pmvis_core::metrics::{aggregate, score_pair, PairScore};
use pmvis_core::trajectory::{generate_trajectory, Trajectory, TrajectoryConfig, TrajectoryError};
use pmvis_core::{execute, parse, ClauseSet, Database};

use crate::clock::SystemClock;
use crate::formats::{read_script, read_trajectories, read_transcripts, write_jsonl};
use crate::http::HttpClient;
use crate::load::{load_database, load_from_root};

/// Exit code for success.
pub const EXIT_OK: i32 = 0;
/// Exit code for failures while running a valid command.
pub const EXIT_RUNTIME: i32 = 1;
/// Exit code for bad usage or an unparseable query.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "pmvis",
    version,
    about = "Progressive multi-turn text-to-visualization toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the clauses of a VQL query.
    Parse { vql: String },
    /// Run a query and print the result as CSV.
    Exec {
        #[arg(long)]
        db: PathBuf,
        vql: String,
    },
    /// Write the chart document of a query.
    Chart {
        #[arg(long)]
        db: PathBuf,
        vql: String,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Generate progressive trajectories from source queries.
    Gen(GenArgs),
    /// Run sessions through the agents and write transcripts.
    Run(RunArgs),
    /// Score transcripts against gold trajectories.
    Eval {
        #[arg(long)]
        transcripts: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long = "db-root")]
        db_root: PathBuf,
    },
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    db: PathBuf,
    /// One source query per line; blank lines and `#` comments are skipped.
    #[arg(long = "vql-file")]
    vql_file: PathBuf,
    /// Seed of the first query; query `i` uses `seed + i`.
    #[arg(long)]
    seed: u64,
    #[arg(long = "min-rounds", default_value_t = 2)]
    min_rounds: usize,
    #[arg(long = "max-rounds", default_value_t = 6)]
    max_rounds: usize,
    /// Ask the model for the questions instead of using templates.
    #[arg(long)]
    llm: bool,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IntentArg {
    Heuristic,
    Llm,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long = "db-root")]
    db_root: PathBuf,
    #[arg(long)]
    sessions: PathBuf,
    /// Scripted replies (JSONL).
    #[arg(long, conflicts_with = "llm_url", required_unless_present = "llm_url")]
    script: Option<PathBuf>,
    /// Chat-completions endpoint.
    #[arg(long = "llm-url")]
    llm_url: Option<String>,
    /// Validation step budget per round.
    #[arg(short = 'm', default_value_t = 10)]
    m: usize,
    #[arg(long, value_enum, default_value_t = IntentArg::Heuristic)]
    intent: IntentArg,
    /// Sessions processed in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn parse_query(vql: &str) -> Result<ClauseSet, CliError> {
    parse(vql).map_err(|e| CliError::Usage(e.to_string()))
}

fn open_output(
    path: &Option<PathBuf>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut file = std::io::BufWriter::new(
                std::fs::File::create(p).map_err(|e| runtime(format!("{}: {e}", p.display())))?,
            );
            f(&mut file).and_then(|_| file.flush()).map_err(runtime)
        }
        None => f(stdout).map_err(runtime),
    }
}

fn cmd_parse(vql: &str, out: &mut dyn Write) -> Result<(), CliError> {
    let cs = parse_query(vql)?;
    for clause in cs.clauses() {
        writeln!(out, "{clause}").map_err(runtime)?;
    }
    Ok(())
}

fn cmd_exec(db: &Path, vql: &str, out: &mut dyn Write) -> Result<(), CliError> {
    let cs = parse_query(vql)?;
    let db = load_database(db).map_err(runtime)?;
    let table = execute(&cs, &db).map_err(runtime)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(table.columns.iter().map(|c| c.label.as_str()))
        .map_err(runtime)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.render()))
            .map_err(runtime)?;
    }
    w.flush().map_err(runtime)
}

fn cmd_chart(
    db: &Path,
    vql: &str,
    output: &Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let cs = parse_query(vql)?;
    let db = load_database(db).map_err(runtime)?;
    let table = execute(&cs, &db).map_err(runtime)?;
    let doc = emit_chart_spec(&cs, &table).map_err(runtime)?;
    open_output(output, out, |w| {
        serde_json::to_writer_pretty(&mut *w, &doc)?;
        w.write_all(b"\n")
    })
}

fn read_sources(path: &Path) -> Result<Vec<String>, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

fn cmd_gen(args: &GenArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let db = load_database(&args.db).map_err(runtime)?;
    let sources = read_sources(&args.vql_file)?;
    let cfg = TrajectoryConfig {
        min_rounds: args.min_rounds,
        max_rounds: args.max_rounds,
        ..TrajectoryConfig::default()
    };
    let mut llm = if args.llm {
        Some(HttpClient::from_env(None).ok_or_else(|| {
            CliError::Usage(format!("--llm needs {} to be set", crate::http::URL_VAR))
        })?)
    } else {
        None
    };
    let mut trajectories: Vec<Trajectory> = Vec::new();
    for (i, v) in sources.iter().enumerate() {
        let client = llm.as_mut().map(|c| c as &mut dyn LlmClient);
        match generate_trajectory(v, &db, args.seed + i as u64, &cfg, client) {
            Ok(t) => trajectories.push(t),
            Err(TrajectoryError::Llm(e)) => return Err(runtime(e)),
            Err(e) => {
                writeln!(err, "skipping query {}: {e}", i + 1).map_err(runtime)?;
            }
        }
    }
    open_output(&args.output, out, |w| write_jsonl(w, &trajectories))
}

enum ClientSource {
    Script(Vec<ScriptEntry>),
    Http(Option<String>),
}

impl ClientSource {
    fn client(&self) -> Result<Box<dyn LlmClient + Send>, CliError> {
        match self {
            ClientSource::Script(entries) => Ok(Box::new(ScriptedMock::new(entries.clone()))),
            ClientSource::Http(url) => HttpClient::from_env(url.clone())
                .map(|c| Box::new(c) as Box<dyn LlmClient + Send>)
                .ok_or_else(|| CliError::Usage("no LLM endpoint given".into())),
        }
    }
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.m == 0 {
        return Err(CliError::Usage("-m must be at least 1".into()));
    }
    let sessions = read_trajectories(&args.sessions).map_err(runtime)?;
    let source = match &args.script {
        Some(p) => ClientSource::Script(read_script(p).map_err(runtime)?),
        None => ClientSource::Http(args.llm_url.clone()),
    };
    let mut dbs: BTreeMap<String, Database> = BTreeMap::new();
    for s in &sessions {
        if !dbs.contains_key(&s.db_id) {
            let db = load_from_root(&args.db_root, &s.db_id).map_err(runtime)?;
            dbs.insert(s.db_id.clone(), db);
        }
    }
    let cfg = ValidateConfig {
        max_steps: args.m,
        intent_mode: match args.intent {
            IntentArg::Heuristic => IntentMode::Heuristic,
            IntentArg::Llm => IntentMode::Llm,
        },
    };
    let clock = SystemClock::new();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<SessionTranscript>>> = Mutex::new(vec![None; sessions.len()]);
    let failure: Mutex<Option<CliError>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for _ in 0..args.jobs.max(1).min(sessions.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(traj) = sessions.get(i) else { break };
                // One client per session so scripted replies never bleed
                // across sessions.
                let mut client = match source.client() {
                    Ok(c) => c,
                    Err(e) => {
                        *failure.lock().unwrap() = Some(e);
                        break;
                    }
                };
                let t = run_session(traj, &dbs[&traj.db_id], &mut *client, &cfg, &clock);
                results.lock().unwrap()[i] = Some(t);
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let transcripts: Vec<SessionTranscript> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .flatten()
        .collect();
    open_output(&args.output, out, |w| write_jsonl(w, &transcripts))
}

/// Scores every gold round against the matching transcript round; missing
/// rounds score as misses.
fn cmd_eval(
    transcripts: &Path,
    gold: &Path,
    db_root: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let transcripts = read_transcripts(transcripts).map_err(runtime)?;
    let gold = read_trajectories(gold).map_err(runtime)?;
    let by_id: BTreeMap<&str, &SessionTranscript> = transcripts
        .iter()
        .map(|t| (t.session_id.as_str(), t))
        .collect();
    let mut dbs: BTreeMap<String, Database> = BTreeMap::new();
    let mut scores: Vec<PairScore> = Vec::new();
    for g in &gold {
        if !dbs.contains_key(&g.db_id) {
            dbs.insert(
                g.db_id.clone(),
                load_from_root(db_root, &g.db_id).map_err(runtime)?,
            );
        }
        let db = &dbs[&g.db_id];
        let predicted = by_id.get(g.session_id.as_str());
        for (i, round) in g.rounds.iter().enumerate() {
            let pred = predicted
                .and_then(|t| t.rounds.get(i))
                .map_or("", |r| r.v_cla.as_str());
            scores.push(score_pair(pred, &round.vql, db).map_err(runtime)?);
        }
    }
    let matched: Vec<SessionTranscript> = gold
        .iter()
        .filter_map(|g| by_id.get(g.session_id.as_str()).map(|t| (*t).clone()))
        .collect();
    let report = aggregate(&scores, &matched).map_err(runtime)?;
    serde_json::to_writer_pretty(&mut *out, &report).map_err(runtime)?;
    writeln!(out).map_err(runtime)
}

/// Runs the command line with explicit streams and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Parse { vql } => cmd_parse(vql, out),
        Command::Exec { db, vql } => cmd_exec(db, vql, out),
        Command::Chart { db, vql, output } => cmd_chart(db, vql, output, out),
        Command::Gen(args) => cmd_gen(args, out, err),
        Command::Run(args) => cmd_run(args, out),
        Command::Eval {
            transcripts,
            gold,
            db_root,
        } => cmd_eval(transcripts, gold, db_root, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}
