//! Acceptance suite. Prints one line per criterion and exits non-zero if
//! any of them fails.

mod oracle;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pmvis::formats::{read_script, read_trajectories};
use pmvis::http::HttpClient;
use pmvis::load::load_from_root;
use pmvis_core::agent::{leaks, Action};
use pmvis_core::agent::{
    run_session, user_clarify, ClarificationKind, ClarificationReply, ClarificationRequest,
    DialogueHistory, IntentMode, NullClock, SessionTranscript, ToolId, ValidateConfig,
};
use pmvis_core::exec::execute;
use pmvis_core::llm::ScriptedMock;
use pmvis_core::metrics::{aggregate, score_pair};
use pmvis_core::store::ColumnType;
use pmvis_core::trajectory::{generate_trajectory, Trajectory, TrajectoryConfig};
use pmvis_core::vql::{AggArg, ChartType, SelectItem, SortExpr};
use pmvis_core::{parse, ClauseSet, Database, Value};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use oracle::{check_bound, evaluate, same_rows, same_value, OracleTable};
use policy::{AlwaysTool, GoldPolicy, RandomPolicy};
use querygen::QueryGen;

const DB_IDS: [&str; 4] = ["protein_institute", "college", "sales", "sports"];
const MAX_STEPS: usize = 10;

struct Fixtures {
    dbs: BTreeMap<String, Database>,
    /// (database, source query) in file order.
    corpus: Vec<(String, String)>,
    table3: Vec<String>,
}

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn query_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

impl Fixtures {
    fn load() -> Self {
        let root = fixtures_dir();
        let mut dbs = BTreeMap::new();
        let mut corpus = Vec::new();
        for id in DB_IDS {
            dbs.insert(
                id.to_string(),
                load_from_root(&root, id).expect("fixture database"),
            );
            for q in query_lines(&root.join("corpus").join(format!("{id}.vql"))) {
                corpus.push((id.to_string(), q));
            }
        }
        let table3 = query_lines(&root.join("corpus/table3.vql"));
        Fixtures {
            dbs,
            corpus,
            table3,
        }
    }

    fn db(&self, id: &str) -> &Database {
        &self.dbs[id]
    }

    fn trajectory(&self, index: usize, seed: u64, cfg: &TrajectoryConfig) -> Trajectory {
        let (db, v) = &self.corpus[index];
        generate_trajectory(v, self.db(db), seed, cfg, None)
            .unwrap_or_else(|e| panic!("{db} query {}: {e}", index + 1))
    }

    /// Every corpus query under 20 seeds, with the index of its source.
    fn thousand_trajectories(&self) -> Vec<(usize, Trajectory)> {
        let cfg = TrajectoryConfig {
            min_rounds: 1,
            ..TrajectoryConfig::default()
        };
        (0..self.corpus.len())
            .flat_map(|i| (0..20).map(move |s| (i, s)))
            .map(|(i, s)| (i, self.trajectory(i, s * 7919 + i as u64, &cfg)))
            .collect()
    }
}

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Verdict {
            passed,
            detail: detail.into(),
        }
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

// Criterion 1.
fn parser_round_trip(fx: &Fixtures) -> Verdict {
    let started = Instant::now();
    let mut corpus: Vec<&str> = fx.corpus.iter().map(|(_, v)| v.as_str()).collect();
    let table3: Vec<&str> = fx
        .table3
        .iter()
        .map(String::as_str)
        .filter(|v| parse(v).is_ok())
        .collect();
    corpus.extend(&table3);
    let mut failures = Vec::new();
    for v in &corpus {
        let cs = parse(v).expect("corpus parses");
        let text = cs.assemble();
        match parse(&text) {
            Ok(again) if again == cs && again.assemble() == text => {}
            Ok(_) => failures.push(format!("not a fixed point: {v}")),
            Err(e) => failures.push(format!("{v}: {e}")),
        }
    }
    let elapsed = started.elapsed();
    Verdict::new(
        corpus.len() >= 50 && failures.is_empty() && within(elapsed, Duration::from_secs(1)),
        format!(
            "{}/{} round-trip ({} reference rows), {:.3}s{}",
            corpus.len() - failures.len(),
            corpus.len(),
            table3.len(),
            elapsed.as_secs_f64(),
            failures
                .first()
                .map(|f| format!("; first failure: {f}"))
                .unwrap_or_default()
        ),
    )
}

fn agrees(cs: &ClauseSet, db: &Database) -> Result<bool, String> {
    match (execute(cs, db), evaluate(cs, db)) {
        (
            Ok(engine),
            Ok(OracleTable {
                types,
                rows,
                ordered,
            }),
        ) => {
            let engine_types: Vec<ColumnType> = engine.columns.iter().map(|c| c.ty).collect();
            Ok(engine_types == types
                && engine.ordered == ordered
                && same_rows(&engine.rows, &rows, ordered))
        }
        (Err(_), Err(_)) => Err("both rejected".into()),
        (Ok(_), Err(e)) => Err(format!("oracle rejected: {e}")),
        (Err(e), Ok(_)) => Err(format!("engine rejected: {e}")),
    }
}

// Criterion 2.
fn executor_oracle(fx: &Fixtures) -> Verdict {
    let started = Instant::now();
    let mut mismatches = Vec::new();
    let mut both_rejected = 0;
    let mut non_empty = 0;
    let total = 1000;
    for n in 0..total {
        let rng_seed = n as u64;
        let id = DB_IDS[n % DB_IDS.len()];
        let db = fx.db(id);
        let mut generator = QueryGen::new(db, ChaCha8Rng::seed_from_u64(rng_seed));
        let v = generator.query();
        let cs = match parse(&v) {
            Ok(cs) => cs,
            Err(e) => {
                mismatches.push(format!("unparseable {v}: {e}"));
                continue;
            }
        };
        match agrees(&cs, db) {
            Ok(true) => {
                non_empty += usize::from(execute(&cs, db).is_ok_and(|r| !r.is_empty()));
            }
            Ok(false) => mismatches.push(format!("[{id}] {v}")),
            Err(e) if e == "both rejected" => both_rejected += 1,
            Err(e) => mismatches.push(format!("[{id}] {v}: {e}")),
        }
    }
    let elapsed = started.elapsed();
    Verdict::new(
        mismatches.is_empty() && within(elapsed, Duration::from_secs(30)),
        format!(
            "{}/{total} agree ({non_empty} non-empty, {both_rejected} rejected by both), {:.2}s{}",
            total - mismatches.len(),
            elapsed.as_secs_f64(),
            mismatches
                .first()
                .map(|m| format!("; first mismatch: {m}"))
                .unwrap_or_default()
        ),
    )
}

fn renderable(cs: &ClauseSet, result: &OracleTable) -> bool {
    let Some(chart) = cs.visualize() else {
        return true;
    };
    if result.types.len() != 2 {
        return false;
    }
    let numeric = |t: ColumnType| matches!(t, ColumnType::Integer | ColumnType::Real);
    let (x, y) = (result.types[0], result.types[1]);
    if !numeric(y) {
        return false;
    }
    let x_ok = match chart {
        ChartType::Bar | ChartType::Pie => x != ColumnType::Real,
        ChartType::Line => true,
        ChartType::Scatter => numeric(x),
    };
    if !x_ok {
        return false;
    }
    if chart == ChartType::Pie {
        let negative = result.rows.iter().any(|r| match &r[1] {
            Value::Integer(i) => *i < 0,
            Value::Real(f) => *f < 0.0,
            _ => false,
        });
        let labels: Vec<&Value> = result.rows.iter().map(|r| &r[0]).collect();
        let duplicate = labels
            .iter()
            .enumerate()
            .any(|(i, a)| labels[i + 1..].iter().any(|b| same_value(a, b)));
        return !negative && !duplicate;
    }
    true
}

fn has_aggregate_sort(cs: &ClauseSet) -> bool {
    cs.order_by()
        .unwrap_or_default()
        .iter()
        .any(|k| matches!(k.expr, SortExpr::Aggregate(_)))
}

/// Re-checks one intermediate clause set against every masking rule.
fn mask_rules(cs: &ClauseSet, source: &ClauseSet, db: &Database) -> Result<(), String> {
    if cs.select().is_empty() {
        return Err("MC1: SELECT missing".into());
    }
    if cs.from().name != source.from().name {
        return Err("MC1: FROM changed".into());
    }
    if cs.visualize() != source.visualize() {
        return Err("MC1: VISUALIZE changed".into());
    }
    let grouped = cs.group_by().is_some();
    if cs.having().is_some() && !grouped {
        return Err("MC2: HAVING without GROUP BY".into());
    }
    if has_aggregate_sort(cs) && !grouped {
        return Err("MC2: aggregate ORDER BY without GROUP BY".into());
    }
    check_bound(cs, db).map_err(|e| format!("MC3: {e}"))?;
    let result = evaluate(cs, db).map_err(|e| format!("VF2: {e}"))?;
    if !renderable(cs, &result) {
        return Err("VF1: not renderable".into());
    }
    if result.rows.is_empty() {
        return Err("VF2: empty".into());
    }
    Ok(())
}

// Criterion 3.
fn masking_soundness(fx: &Fixtures, trajectories: &[(usize, Trajectory)]) -> Verdict {
    let mut violations = Vec::new();
    let mut rounds = 0;
    for (source_index, t) in trajectories {
        let db = fx.db(&t.db_id);
        let source = parse(&fx.corpus[*source_index].1).expect("corpus parses");
        let last = &t.rounds[t.rounds.len() - 1];
        if last.clause_set != source {
            violations.push(format!(
                "{}: terminal round differs from source",
                t.session_id
            ));
        }
        for (i, r) in t.rounds.iter().enumerate() {
            rounds += 1;
            if parse(&r.vql).ok().as_ref() != Some(&r.clause_set) {
                violations.push(format!(
                    "{} round {}: text and clause set disagree",
                    t.session_id,
                    i + 1
                ));
            }
            if let Err(e) = mask_rules(&r.clause_set, &source, db) {
                violations.push(format!("{} round {}: {e}", t.session_id, i + 1));
            }
            if i > 0 {
                let prev = &t.rounds[i - 1].clause_set;
                let prev_clauses = prev.clauses();
                let next_clauses = r.clause_set.clauses();
                let contained = prev_clauses.iter().all(|c| next_clauses.contains(c));
                if !contained || next_clauses.len() != prev_clauses.len() + 1 {
                    violations.push(format!(
                        "{} round {}: not a one-clause extension",
                        t.session_id,
                        i + 1
                    ));
                }
            }
        }
    }
    Verdict::new(
        violations.is_empty() && trajectories.len() == 1000,
        format!(
            "{} trajectories, {rounds} rounds, {} violations{}",
            trajectories.len(),
            violations.len(),
            violations
                .first()
                .map(|v| format!("; first: {v}"))
                .unwrap_or_default()
        ),
    )
}

struct FuzzRun {
    transcripts: Vec<SessionTranscript>,
    /// Dialogue sections of every translate prompt, per session.
    dialogues: Vec<Vec<String>>,
}

fn dialogue_section(prompt: &str) -> Option<String> {
    let start = prompt.find("### Natural Language Question\n")?;
    let rest = &prompt[start..];
    let end = rest.find("### Output")?;
    Some(rest[..end].to_string())
}

fn fuzz(fx: &Fixtures, trajectories: &[(usize, Trajectory)]) -> FuzzRun {
    let mut run = FuzzRun {
        transcripts: Vec::new(),
        dialogues: Vec::new(),
    };
    for (i, (_, t)) in trajectories.iter().enumerate() {
        let gold: Vec<String> = t.rounds.iter().map(|r| r.vql.clone()).collect();
        let mut policy = RandomPolicy::new(ChaCha8Rng::seed_from_u64(10_000 + i as u64), gold);
        let cfg = ValidateConfig {
            max_steps: MAX_STEPS,
            intent_mode: if i % 2 == 0 {
                IntentMode::Heuristic
            } else {
                IntentMode::Llm
            },
        };
        let transcript = run_session(t, fx.db(&t.db_id), &mut policy, &cfg, &NullClock);
        run.dialogues.push(
            policy
                .translate_prompts
                .iter()
                .filter_map(|p| dialogue_section(p))
                .collect(),
        );
        run.transcripts.push(transcript);
    }
    run
}

#[derive(Default)]
struct GateReplay {
    steps: usize,
    forbidden: usize,
    blocked: usize,
    inconsistencies: Vec<String>,
}

/// Walks every trace with a fresh model of the gate.
fn replay_gate(transcripts: &[SessionTranscript]) -> GateReplay {
    let mut out = GateReplay::default();
    for t in transcripts {
        for r in &t.rounds {
            let mut candidate = r.v_gen.clone();
            let mut syntax = false;
            let mut schema = false;
            for s in &r.trace {
                out.steps += 1;
                let at = format!("{} round {} step {}", t.session_id, r.round, s.step);
                if s.candidate != candidate {
                    out.inconsistencies.push(format!("{at}: candidate drifted"));
                }
                let permitted = |tool: ToolId| match tool {
                    ToolId::Syntax => true,
                    ToolId::Schema | ToolId::Intent => syntax,
                    ToolId::Exec => syntax && schema,
                };
                match s.requested {
                    Some(Action::Tool(tool)) if !permitted(tool) => {
                        out.blocked += 1;
                        if s.blocked_by.is_none() || s.executed != Some(ToolId::Syntax) {
                            out.inconsistencies
                                .push(format!("{at}: {tool} ran unblocked"));
                        }
                    }
                    Some(Action::Tool(tool)) => {
                        if s.blocked_by.is_some() || s.executed != Some(tool) {
                            out.inconsistencies
                                .push(format!("{at}: permitted {tool} not run"));
                        }
                    }
                    _ => {
                        if s.executed.is_some() {
                            out.inconsistencies
                                .push(format!("{at}: tool ran without a request"));
                        }
                    }
                }
                if let Some(tool) = s.executed {
                    if !permitted(tool) {
                        out.forbidden += 1;
                    }
                    let passed = s.verdict.as_ref().is_some_and(|v| v.passed);
                    match tool {
                        ToolId::Syntax => {
                            if passed != parse(&s.candidate).is_ok() {
                                out.inconsistencies
                                    .push(format!("{at}: syntax verdict wrong"));
                            }
                            syntax = passed;
                        }
                        ToolId::Schema => schema = passed,
                        _ => {}
                    }
                }
                if let Some(next) = &s.update {
                    if *next != candidate {
                        candidate = next.clone();
                        syntax = false;
                        schema = false;
                    }
                }
            }
            if candidate != r.v_cla {
                out.inconsistencies.push(format!(
                    "{} round {}: v_cla is not the last candidate",
                    t.session_id, r.round
                ));
            }
        }
    }
    out
}

// Criterion 4.
fn gate_fuzz(run: &FuzzRun) -> Verdict {
    let replay = replay_gate(&run.transcripts);
    let logged: usize = run.transcripts.iter().map(|t| t.policy_violations).sum();
    let contract: usize = run
        .transcripts
        .iter()
        .map(|t| t.contract_violations)
        .sum::<usize>()
        + run
            .transcripts
            .iter()
            .filter(|t| t.error.as_deref().is_some_and(|e| e.contains("contract")))
            .count();
    let gate_flags = run.transcripts.iter().filter(|t| !t.gate_ok).count();
    Verdict::new(
        replay.steps >= 10_000
            && replay.forbidden == 0
            && contract == 0
            && gate_flags == 0
            && logged == replay.blocked
            && replay.inconsistencies.is_empty(),
        format!(
            "{} steps over {} sessions, {} forbidden executions, {contract} contract violations, {logged} logged vs {} blocked{}",
            replay.steps,
            run.transcripts.len(),
            replay.forbidden,
            replay.blocked,
            replay
                .inconsistencies
                .first()
                .map(|i| format!("; first inconsistency: {i}"))
                .unwrap_or_default()
        ),
    )
}

fn recount_tool_calls(t: &SessionTranscript) -> usize {
    t.rounds
        .iter()
        .flat_map(|r| &r.trace)
        .filter(|s| s.executed.is_some())
        .count()
}

// Criterion 5.
fn step_budget(fx: &Fixtures, run: &FuzzRun, trajectories: &[(usize, Trajectory)]) -> Verdict {
    let mut over = 0;
    let mut miscounted = 0;
    for t in &run.transcripts {
        let calls = recount_tool_calls(t);
        miscounted += usize::from(calls != t.totals.tool_calls);
        over += usize::from(calls > t.rounds.len() * MAX_STEPS || !t.budget_ok);
    }
    let Some((_, five)) = trajectories.iter().find(|(_, t)| t.len() == 5) else {
        return Verdict::new(false, "no five-round trajectory to build the worst case");
    };
    let mut always = AlwaysTool {
        gold: five.rounds.iter().map(|r| r.vql.clone()).collect(),
    };
    let worst = run_session(
        five,
        fx.db(&five.db_id),
        &mut always,
        &ValidateConfig::default(),
        &NullClock,
    );
    let worst_calls = recount_tool_calls(&worst);
    Verdict::new(
        over == 0 && miscounted == 0 && worst_calls == 50 && worst.totals.tool_calls == 50 && worst.budget_ok,
        format!(
            "{} transcripts within n*{MAX_STEPS} ({over} over, {miscounted} miscounted); worst case n=5 used {worst_calls}",
            run.transcripts.len()
        ),
    )
}

fn probe_corpus() -> Vec<String> {
    let phrases = [
        "exact VQL",
        "ground truth",
        "exact SQL",
        "the answer query",
        "Ground Truth",
    ];
    let frames = [
        "What is the {}?",
        "Could you give me the {} for this chart?",
        "Please paste {} so I can compare.",
        "I need {} before going on.",
        "Tell me {}, word for word.",
        "Is there a {} I should match?",
        "Share {} now.",
        "Before I fix this, what is {} you expect?",
        "{} please",
        "Can I see {}?",
    ];
    frames
        .iter()
        .flat_map(|f| phrases.iter().map(move |p| f.replace("{}", p)))
        .collect()
}

fn three_gram_leak(reply: &str, gold: &str) -> bool {
    let gold: Vec<String> = gold.split_whitespace().map(|w| w.to_lowercase()).collect();
    let reply: Vec<String> = reply.split_whitespace().map(|w| w.to_lowercase()).collect();
    let joined = format!(" {} ", reply.join(" "));
    gold.windows(3).any(|w| {
        let needle = w.join(" ");
        joined.contains(&needle)
    })
}

fn disambiguation_questions(cs: &ClauseSet) -> Vec<String> {
    let mut out = vec![
        "Which chart type do you want?".to_string(),
        "Do you want a bar chart or a pie chart?".to_string(),
    ];
    for item in cs.select() {
        let (name, aggregated) = match item {
            SelectItem::Column(c) => (c.name.clone(), false),
            SelectItem::Aggregate(a) => match &a.arg {
                AggArg::Column(c) => (c.name.clone(), true),
                AggArg::Star => continue,
            },
            SelectItem::Star => continue,
        };
        let words = name.replace('_', " ").to_lowercase();
        out.push(format!("Which column did you mean by {words}?"));
        out.push(format!(
            "Should {words} be shown as raw values or aggregated?"
        ));
        if aggregated {
            out.push(format!("Do you want the raw {words} or a total?"));
        }
    }
    out
}

// Criterion 6.
fn user_agent_audits(
    fx: &Fixtures,
    run: &FuzzRun,
    trajectories: &[(usize, Trajectory)],
) -> Verdict {
    let probes = probe_corpus();
    let gold = "VISUALIZE BAR SELECT Street_address, Floors FROM building ORDER BY Floors ASC";
    let db = fx.db("protein_institute");
    let refused = probes
        .iter()
        .filter(|q| {
            let req = ClarificationRequest::new(1, q.as_str());
            req.kind() == ClarificationKind::GroundTruthProbe
                && user_clarify(&req, &DialogueHistory::new(), gold, db)
                    == ClarificationReply::Refuse
        })
        .count();

    let mut answers = 0;
    let mut core_leaks = 0;
    let mut gram_leaks = 0;
    let mut check = |reply: &ClarificationReply, gold: &str| {
        if let ClarificationReply::Answer(text) = reply {
            answers += 1;
            core_leaks += usize::from(leaks(text, gold));
            gram_leaks += usize::from(three_gram_leak(text, gold));
        }
    };
    for (_, t) in trajectories {
        let db = fx.db(&t.db_id);
        for r in &t.rounds {
            for q in disambiguation_questions(&r.clause_set) {
                let req = ClarificationRequest::new(1, q);
                check(
                    &user_clarify(&req, &DialogueHistory::new(), &r.vql, db),
                    &r.vql,
                );
            }
        }
    }
    for t in &run.transcripts {
        for r in &t.rounds {
            for c in &r.clarifications {
                if c.request.kind() == ClarificationKind::Disambiguation {
                    check(&c.reply, &r.gold_vql);
                }
            }
        }
    }

    let mut contaminated = 0;
    let mut first = None;
    for (t, dialogues) in run.transcripts.iter().zip(&run.dialogues) {
        let mut forbidden: Vec<String> = Vec::new();
        for r in &t.rounds {
            for s in &r.trace {
                if let Some(v) = &s.verdict {
                    forbidden.push(v.diagnostic.clone());
                }
            }
            for c in &r.clarifications {
                forbidden.push(c.request.question.clone());
                forbidden.push(c.reply.text().to_string());
            }
        }
        forbidden.retain(|f| f.len() >= 6);
        for d in dialogues {
            if let Some(f) = forbidden.iter().find(|f| d.contains(f.as_str())) {
                contaminated += 1;
                first.get_or_insert_with(|| format!("{}: {f:?}", t.session_id));
            }
        }
    }
    Verdict::new(
        refused == probes.len() && core_leaks == 0 && gram_leaks == 0 && contaminated == 0 && run.transcripts.len() >= 1000,
        format!(
            "{refused}/{} probes refused; {answers} answers, {core_leaks}+{gram_leaks} leaks; {contaminated} contaminated prompts over {} sessions{}",
            probes.len(),
            run.transcripts.len(),
            first.map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

// Criterion 7.
fn golden_session(fx: &Fixtures) -> Verdict {
    let dir = fixtures_dir().join("golden");
    let trajectories = read_trajectories(&dir.join("session.jsonl")).expect("golden session");
    let script = read_script(&dir.join("script.jsonl")).expect("golden script");
    let t = &trajectories[0];
    let db = fx.db(&t.db_id);
    let mut mock = ScriptedMock::new(script);
    let transcript = run_session(t, db, &mut mock, &ValidateConfig::default(), &NullClock);
    let target = "VISUALIZE BAR SELECT Street_address, Floors FROM building ORDER BY Floors ASC";

    let Some(round) = transcript.rounds.get(1) else {
        return Verdict::new(
            false,
            format!("second round missing: {:?}", transcript.error),
        );
    };
    let mut story = Vec::new();
    for s in &round.trace {
        if let Some(v) = &s.verdict {
            if v.tool == ToolId::Schema && !v.passed && v.diagnostic.contains("Street_address") {
                story.push("schema");
            }
        }
        if let Some(u) = &s.update {
            if u.contains("Street_address")
                && u.contains("COUNT")
                && story.last() == Some(&"schema")
            {
                story.push("rename");
            }
            if u == target && story.last() == Some(&"clarify") {
                story.push("drop count");
            }
        }
        if let Some(c) = &s.clarification {
            if c.request.question.contains("aggregated") && c.reply.text().contains("raw") {
                story.push("clarify");
            }
        }
    }
    let narrative = story == ["schema", "rename", "clarify", "drop count"];
    let starts_wrong = round.v_gen.contains("Address") && !round.v_gen.contains("Street_address");
    let scores: Vec<_> = transcript
        .rounds
        .iter()
        .map(|r| score_pair(&r.v_cla, &r.gold_vql, db).expect("gold runs"))
        .collect();
    let all_true = scores
        .iter()
        .all(|s| s.vis() && s.axis() && s.data() && s.overall() && s.exec());
    Verdict::new(
        narrative && starts_wrong && round.v_cla == target && all_true && transcript.complete,
        format!(
            "narrative {:?}, final {:?}, scores all true: {all_true}",
            story, round.v_cla
        ),
    )
}

/// The 200-session corpus: every source under four base seeds, line `i`
/// seeded with base + i.
fn regenerated_corpus(fx: &Fixtures) -> Vec<Trajectory> {
    let cfg = TrajectoryConfig::default();
    let mut out = Vec::new();
    for base in [0u64, 100, 200, 300] {
        for id in DB_IDS {
            for (i, (_, v)) in fx.corpus.iter().filter(|(d, _)| d == id).enumerate() {
                if let Ok(t) = generate_trajectory(v, fx.db(id), base + i as u64, &cfg, None) {
                    out.push(t);
                }
            }
        }
    }
    out
}

fn gold_transcripts(fx: &Fixtures, trajectories: &[Trajectory]) -> Vec<SessionTranscript> {
    trajectories
        .iter()
        .map(|t| {
            let mut gold = GoldPolicy {
                gold: t.rounds.iter().map(|r| r.vql.clone()).collect(),
            };
            run_session(
                t,
                fx.db(&t.db_id),
                &mut gold,
                &ValidateConfig::default(),
                &NullClock,
            )
        })
        .collect()
}

// Criterion 8.
fn metric_reflexivity(
    fx: &Fixtures,
    corpus: &[Trajectory],
    transcripts: &[SessionTranscript],
) -> Verdict {
    let mut scores = Vec::new();
    for t in corpus {
        let db = fx.db(&t.db_id);
        for r in &t.rounds {
            scores.push(score_pair(&r.vql, &r.vql, db).expect("gold runs"));
        }
    }
    let report = aggregate(&scores, transcripts).expect("scores");
    let exact = [
        report.vis_acc,
        report.axis_acc,
        report.data_acc,
        report.overall_acc,
        report.exec_acc,
    ]
    .iter()
    .all(|a| *a == 1.0);
    Verdict::new(
        exact,
        format!(
            "n={} vis={} axis={} data={} overall={} exec={}",
            report.n,
            report.vis_acc,
            report.axis_acc,
            report.data_acc,
            report.overall_acc,
            report.exec_acc
        ),
    )
}

// Criterion 9.
fn mean_rounds(fx: &Fixtures, corpus: &[Trajectory], transcripts: &[SessionTranscript]) -> Verdict {
    let mut scores = Vec::new();
    for t in transcripts {
        for r in &t.rounds {
            scores.push(score_pair(&r.v_cla, &r.gold_vql, fx.db(&t.db_id)).expect("gold runs"));
        }
    }
    let report = aggregate(&scores, transcripts).expect("scores");
    let mean = report.rounds_mean;
    let complete = transcripts.iter().filter(|t| t.complete).count();
    Verdict::new(
        corpus.len() == 200 && complete == 200 && (3.2..=4.2).contains(&mean),
        format!(
            "{} sessions ({complete} complete), mean {mean:.2} rounds (target 3.7 +/- 0.5), exec acc {}, {} tool calls, {:.0} tokens/round",
            corpus.len(),
            report.exec_acc,
            report.tool_calls_total,
            report.tokens_per_round
        ),
    )
}

fn live_smoke(fx: &Fixtures) -> Option<Verdict> {
    let url = std::env::var("PMVIS_LLM_URL").ok()?;
    let mut client = HttpClient::from_env(Some(url))?;
    let dir = fixtures_dir().join("golden");
    let t = read_trajectories(&dir.join("session.jsonl"))
        .expect("golden session")
        .remove(0);
    let transcript = run_session(
        &t,
        fx.db(&t.db_id),
        &mut client,
        &ValidateConfig::default(),
        &NullClock,
    );
    let json = serde_json::to_string(&transcript).expect("serializes");
    let back: SessionTranscript = serde_json::from_str(&json).expect("reads back");
    let well_formed = back == transcript
        && transcript.gate_ok
        && transcript.budget_ok
        && transcript.rounds.iter().all(|r| r.tool_calls <= MAX_STEPS)
        && (transcript.complete || transcript.error.is_some());
    Some(Verdict::new(
        well_formed,
        format!(
            "{} rounds, error {:?}",
            transcript.rounds.len(),
            transcript.error
        ),
    ))
}

fn main() -> ExitCode {
    let fx = Fixtures::load();
    let mut results: Vec<(&str, Verdict)> = Vec::new();
    let mut report = |name: &'static str, v: Verdict| {
        println!(
            "[{}] {name}: {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
        results.push((name, v));
    };

    report("C1 parser round trip", parser_round_trip(&fx));
    report("C2 executor matches oracle", executor_oracle(&fx));
    let trajectories = fx.thousand_trajectories();
    report(
        "C3 masking soundness",
        masking_soundness(&fx, &trajectories),
    );
    let run = fuzz(&fx, &trajectories);
    report("C4 permission gate under fuzz", gate_fuzz(&run));
    report("C5 step budget", step_budget(&fx, &run, &trajectories));
    report(
        "C6 user agent audits",
        user_agent_audits(&fx, &run, &trajectories),
    );
    report("C7 golden session", golden_session(&fx));
    let corpus = regenerated_corpus(&fx);
    let transcripts = gold_transcripts(&fx, &corpus);
    report(
        "C8 metric reflexivity",
        metric_reflexivity(&fx, &corpus, &transcripts),
    );
    report("C9 mean rounds", mean_rounds(&fx, &corpus, &transcripts));
    match live_smoke(&fx) {
        Some(v) => report("live model smoke", v),
        None => println!("[SKIP] live model smoke: PMVIS_LLM_URL not set"),
    }

    let failed = results.iter().filter(|(_, v)| !v.passed).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
