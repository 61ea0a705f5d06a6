//! The four validators the validation agent can call.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::system::{dialogue_prompt, schema_prompt};
use super::user::{ClarificationRequest, DialogueStatus};
use crate::exec::{execute, ExecError, GroundingError, ResultTable};
use crate::llm::{LlmClient, LlmError, LlmReply, LlmRequest, Message, Purpose};
use crate::store::Database;
use crate::text::{edit_distance, ident_key, words};
use crate::vql::{
    parse, referenced_columns, referenced_tables, AggArg, ChartType, ClauseSet, SelectItem,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToolId {
    Syntax,
    Schema,
    Exec,
    Intent,
}

impl ToolId {
    pub const ALL: [ToolId; 4] = [ToolId::Syntax, ToolId::Schema, ToolId::Exec, ToolId::Intent];

    pub fn name(self) -> &'static str {
        match self {
            ToolId::Syntax => "syntax",
            ToolId::Schema => "schema",
            ToolId::Exec => "exec",
            ToolId::Intent => "intent",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for ToolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolVerdict {
    pub tool: ToolId,
    pub passed: bool,
    pub diagnostic: String,
    /// Rows produced by the exec tool.
    #[serde(skip)]
    pub result: Option<ResultTable>,
}

impl ToolVerdict {
    fn new(tool: ToolId, passed: bool, diagnostic: impl Into<String>) -> Self {
        ToolVerdict {
            tool,
            passed,
            diagnostic: diagnostic.into(),
            result: None,
        }
    }
}

pub fn tool_syntax(candidate: &str) -> ToolVerdict {
    match parse(candidate) {
        Ok(_) => ToolVerdict::new(ToolId::Syntax, true, "valid VQL"),
        Err(e) => ToolVerdict::new(ToolId::Syntax, false, e.to_string()),
    }
}

/// Closest schema column to an unknown name: edit distance at most 2, or a
/// column whose name contains the unknown name as a whole word.
pub fn suggest_column<'a>(db: &'a Database, table: Option<&str>, unknown: &str) -> Option<&'a str> {
    let want = ident_key(unknown);
    db.all_columns()
        .filter(|c| table.is_none_or(|t| ident_key(&c.table) == ident_key(t)))
        .filter_map(|c| {
            let key = ident_key(&c.name);
            let dist = edit_distance(&want, &key);
            let contains = key.split('_').any(|w| w == want);
            (dist <= 2 || contains).then_some((dist, c.name.as_str()))
        })
        .min_by_key(|(d, _)| *d)
        .map(|(_, name)| name)
}

fn suggest_table<'a>(db: &'a Database, unknown: &str) -> Option<&'a str> {
    let want = ident_key(unknown);
    db.tables()
        .iter()
        .map(|t| (edit_distance(&want, &ident_key(&t.name)), t.name.as_str()))
        .filter(|(d, _)| *d <= 2)
        .min_by_key(|(d, _)| *d)
        .map(|(_, n)| n)
}

/// Tables and columns must exist in the schema.
pub fn tool_schema(candidate: &str, db: &Database) -> ToolVerdict {
    let cs = match parse(candidate) {
        Ok(cs) => cs,
        Err(e) => return ToolVerdict::new(ToolId::Schema, false, e.to_string()),
    };
    let mut problems: Vec<String> = Vec::new();
    let tables = db.table_names();
    for t in referenced_tables(&cs)
        .iter()
        .filter(|t| !tables.contains(*t))
    {
        problems.push(match suggest_table(db, t) {
            Some(s) => format!("no such table: {t} (did you mean {s}?)"),
            None => format!("no such table: {t}"),
        });
    }
    let columns = db.column_names();
    match referenced_columns(&cs, db) {
        Ok(used) => {
            for key in used.iter().filter(|c| !columns.contains(*c)) {
                let (table, name) = key.split_once('.').unwrap_or(("", key));
                let table = tables.contains(table).then_some(table);
                problems.push(match suggest_column(db, table, name) {
                    Some(s) => format!("no such column: {key} (did you mean {s}?)"),
                    None => format!("no such column: {key}"),
                });
            }
        }
        Err(e) => problems.push(e.to_string()),
    }
    if problems.is_empty() {
        ToolVerdict::new(ToolId::Schema, true, "all tables and columns exist")
    } else {
        ToolVerdict::new(ToolId::Schema, false, problems.join("; "))
    }
}

/// Runs the candidate. Passes only with a non-empty result. A grounding
/// failure here means the schema gate was bypassed and is returned as an
/// error.
pub fn tool_exec(candidate: &str, db: &Database) -> Result<ToolVerdict, GroundingError> {
    let cs = match parse(candidate) {
        Ok(cs) => cs,
        Err(e) => return Ok(ToolVerdict::new(ToolId::Exec, false, e.to_string())),
    };
    match execute(&cs, db) {
        Ok(table) if table.is_empty() => Ok(ToolVerdict::new(ToolId::Exec, false, "empty result")),
        Ok(table) => {
            let n = table.len();
            let mut v = ToolVerdict::new(
                ToolId::Exec,
                true,
                format!("{n} row{}", if n == 1 { "" } else { "s" }),
            );
            v.result = Some(table);
            Ok(v)
        }
        Err(ExecError::ContractViolation(g)) => Err(g),
        Err(ExecError::Execution(e)) => Ok(ToolVerdict::new(ToolId::Exec, false, e.to_string())),
    }
}

/// How the intent tool decides.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntentMode {
    #[default]
    Heuristic,
    Llm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntentOutcome {
    pub verdict: ToolVerdict,
    pub request: Option<ClarificationRequest>,
    pub reply: Option<LlmReply>,
}

const STOPWORDS: [&str; 40] = [
    "the", "and", "for", "each", "from", "with", "show", "what", "which", "are", "all", "that",
    "this", "its", "their", "then", "also", "only", "now", "them", "chart", "bar", "pie", "line",
    "scatter", "order", "results", "result", "rows", "where", "records", "number", "count",
    "total", "average", "table", "group", "top", "compare", "keep",
];

fn column_words(name: &str) -> impl Iterator<Item = String> + '_ {
    ident_key(name)
        .split('_')
        .map(String::from)
        .collect::<Vec<_>>()
        .into_iter()
}

fn fuzzy_word_match(word: &str, column: &str) -> bool {
    let w = word.trim_end_matches('s');
    column_words(column).any(|part| {
        let p = part.trim_end_matches('s');
        part == word || (!p.is_empty() && p == w)
    })
}

fn chart_words(nlq: &str) -> Vec<ChartType> {
    let mut out: Vec<ChartType> = Vec::new();
    for w in words(nlq) {
        let chart = match w.as_str() {
            "bar" => ChartType::Bar,
            "pie" => ChartType::Pie,
            "line" => ChartType::Line,
            "scatter" => ChartType::Scatter,
            _ => continue,
        };
        if !out.contains(&chart) {
            out.push(chart);
        }
    }
    out
}

/// Rule (c): "compare the" or "show the", optionally "number of", then a
/// column the candidate aggregates.
fn aggregated_mention(nlq_words: &[String], cs: &ClauseSet) -> Option<String> {
    let aggregated: Vec<String> = cs
        .select()
        .iter()
        .filter_map(|i| match i {
            SelectItem::Aggregate(a) => match &a.arg {
                AggArg::Column(c) => Some(c.name.clone()),
                AggArg::Star => None,
            },
            _ => None,
        })
        .collect();
    for (i, pair) in nlq_words.windows(2).enumerate() {
        if !(pair[0] == "compare" || pair[0] == "show") || pair[1] != "the" {
            continue;
        }
        let mut at = i + 2;
        if nlq_words.get(at).map(String::as_str) == Some("number")
            && nlq_words.get(at + 1).map(String::as_str) == Some("of")
        {
            at += 2;
        }
        for len in 1..=3 {
            let Some(span) = nlq_words.get(at..at + len) else {
                break;
            };
            let joined = span.join("_");
            if let Some(c) = aggregated.iter().find(|c| {
                let key = ident_key(c);
                key == joined || key.trim_end_matches('s') == joined.trim_end_matches('s')
            }) {
                return Some(c.clone());
            }
        }
    }
    None
}

fn heuristic_intent(status: &DialogueStatus, cs: &ClauseSet, db: &Database) -> Option<String> {
    let nlq = status.current_nlq();
    let mentioned = chart_words(nlq);
    if !mentioned.is_empty() && cs.visualize().is_none_or(|v| !mentioned.contains(&v)) {
        let asked = mentioned[0].keyword().to_lowercase();
        let have = cs
            .visualize()
            .map(|v| format!("a {} chart", v.keyword().to_lowercase()))
            .unwrap_or_else(|| "no chart".into());
        return Some(format!(
            "Which chart type do you want: a {asked} chart, or {have} as in the query?"
        ));
    }

    let used: BTreeSet<String> = referenced_columns(cs, db).unwrap_or_default();
    let nlq_words = words(nlq);
    let tables = db.table_names();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for w in &nlq_words {
        if w.len() < 3
            || STOPWORDS.contains(&w.as_str())
            || tables.contains(w.as_str())
            || tables.contains(w.trim_end_matches('s'))
            || !seen.insert(w)
        {
            continue;
        }
        let matches: BTreeSet<String> = db
            .all_columns()
            .filter(|c| fuzzy_word_match(w, &c.name))
            .map(|c| format!("{}.{}", ident_key(&c.table), ident_key(&c.name)))
            .collect();
        if matches.len() >= 2 && matches.is_disjoint(&used) {
            return Some(format!("Which column did you mean by {w}?"));
        }
    }

    aggregated_mention(&nlq_words, cs).map(|c| {
        format!(
            "Should {} be shown as raw values or aggregated?",
            crate::text::humanize(&c)
        )
    })
}

fn intent_prompt(status: &DialogueStatus, candidate: &str, db: &Database) -> String {
    format!(
        "### Task\n\
         # Decide whether the latest question is ambiguous with respect to the candidate query. \
         Answer CLEAR, or AMBIGUOUS: followed by one short question for the user.\n\n\
         ### Database Schemas:\n{}\n\
         ### Natural Language Question\n{}\n\
         ### Candidate VQL\n{candidate}\n",
        schema_prompt(db),
        dialogue_prompt(status)
    )
}

/// Where an intent call sits, for keyed scripted replies.
#[derive(Debug, Clone, Copy)]
pub struct IntentContext<'a> {
    pub session: Option<&'a str>,
    pub step: usize,
}

/// Flags an NLQ/candidate mismatch and, if found, a question for the user.
pub fn tool_intent(
    status: &DialogueStatus,
    candidate: &str,
    db: &Database,
    mode: IntentMode,
    llm: Option<&mut dyn LlmClient>,
    ctx: IntentContext<'_>,
) -> Result<IntentOutcome, LlmError> {
    let cs = match parse(candidate) {
        Ok(cs) => cs,
        Err(e) => {
            return Ok(IntentOutcome {
                verdict: ToolVerdict::new(ToolId::Intent, false, e.to_string()),
                request: None,
                reply: None,
            })
        }
    };
    let (question, reply) = match (mode, llm) {
        (IntentMode::Llm, Some(llm)) => {
            let request = LlmRequest {
                purpose: Purpose::Intent,
                session: ctx.session.map(ToString::to_string),
                round: status.round(),
                step: ctx.step,
                messages: alloc::vec![Message::user(intent_prompt(status, candidate, db))],
            };
            let reply = llm.complete(&request)?;
            let text = reply.text.trim();
            let question = text
                .get(..9)
                .filter(|p| p.eq_ignore_ascii_case("ambiguous"))
                .map(|_| {
                    let q = text[9..].trim_start_matches(':').trim();
                    if q.is_empty() {
                        "Could you say more precisely what you want to see?".to_string()
                    } else {
                        q.to_string()
                    }
                });
            (question, Some(reply))
        }
        _ => (heuristic_intent(status, &cs, db), None),
    };
    Ok(match question {
        Some(q) => IntentOutcome {
            verdict: ToolVerdict::new(ToolId::Intent, false, format!("ambiguous: {q}")),
            request: Some(ClarificationRequest::new(status.round(), q)),
            reply,
        },
        None => IntentOutcome {
            verdict: ToolVerdict::new(ToolId::Intent, true, "matches the question"),
            request: None,
            reply,
        },
    })
}
