//! The simulated user: issues questions, keeps the dialogue history and
//! answers clarification requests without revealing the gold query.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::AgentError;
use crate::store::Database;
use crate::text::{humanize, ident_key, words};
use crate::trajectory::Trajectory;
use crate::vql::{parse, AggArg, ClauseSet, SelectItem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub nlq: String,
    pub clarified_vql: String,
}

/// Finished rounds only: each question with its clarified query. Nothing
/// else can be appended.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueHistory {
    entries: Vec<HistoryEntry>,
}

impl DialogueHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, nlq: impl Into<String>, clarified_vql: impl Into<String>) {
        self.entries.push(HistoryEntry {
            nlq: nlq.into(),
            clarified_vql: clarified_vql.into(),
        });
    }

    pub fn entries(&self) -> &[HistoryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// History plus the question of the round in progress.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DialogueStatus {
    history: DialogueHistory,
    current_nlq: String,
}

impl DialogueStatus {
    pub fn history(&self) -> &DialogueHistory {
        &self.history
    }

    pub fn current_nlq(&self) -> &str {
        &self.current_nlq
    }

    /// 1-based index of the round in progress.
    pub fn round(&self) -> usize {
        self.history.len() + 1
    }
}

pub fn build_status(history: &DialogueHistory, nlq: &str) -> DialogueStatus {
    DialogueStatus {
        history: history.clone(),
        current_nlq: nlq.into(),
    }
}

/// The `round`-th question of a trajectory (1-based), verbatim.
pub fn user_issue(traj: &Trajectory, round: usize) -> Result<&str, AgentError> {
    round
        .checked_sub(1)
        .and_then(|i| traj.rounds.get(i))
        .map(|r| r.nlq.as_str())
        .ok_or(AgentError::IndexOutOfRange {
            index: round,
            len: traj.rounds.len(),
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClarificationKind {
    Disambiguation,
    GroundTruthProbe,
}

const ASK_GT_LEXICON: [&str; 4] = ["exact vql", "ground truth", "exact sql", "the answer query"];

/// Whether a question asks for the gold query itself.
pub fn asks_ground_truth(question: &str) -> bool {
    let q = question.to_lowercase();
    ASK_GT_LEXICON.iter().any(|k| q.contains(k))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClarificationRequest {
    pub round: usize,
    pub question: String,
    kind: ClarificationKind,
}

impl ClarificationRequest {
    pub fn new(round: usize, question: impl Into<String>) -> Self {
        let question = question.into();
        let kind = if asks_ground_truth(&question) {
            ClarificationKind::GroundTruthProbe
        } else {
            ClarificationKind::Disambiguation
        };
        ClarificationRequest {
            round,
            question,
            kind,
        }
    }

    pub fn kind(&self) -> ClarificationKind {
        self.kind
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "text", rename_all = "snake_case")]
pub enum ClarificationReply {
    Answer(String),
    Refuse,
}

impl ClarificationReply {
    /// Text shown to the validation agent.
    pub fn text(&self) -> &str {
        match self {
            ClarificationReply::Answer(s) => s,
            ClarificationReply::Refuse => "I can't share that. Please work from my question.",
        }
    }
}

fn normalized_tokens(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_lowercase).collect()
}

/// True when `reply` contains any three consecutive whitespace tokens of
/// `gt_vql` (case-insensitive).
pub fn leaks(reply: &str, gt_vql: &str) -> bool {
    let gt = normalized_tokens(gt_vql);
    let hay = normalized_tokens(reply).join(" ");
    gt.windows(3).any(|w| hay.contains(&w.join(" ")))
}

/// The part of the gold query a question is about.
enum Facet {
    Chart,
    Column(String),
    Aggregation(String),
}

fn gold_columns(gt: &ClauseSet) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for clause in gt.clauses() {
        for c in crate::vql::visit::columns(&clause) {
            if !out.iter().any(|o| ident_key(o) == ident_key(&c.name)) {
                out.push(c.name.clone());
            }
        }
    }
    out
}

fn word_matches_column(word: &str, column: &str) -> bool {
    let w = word.trim_end_matches('s');
    !w.is_empty()
        && ident_key(column)
            .split('_')
            .any(|part| part == word || part.trim_end_matches('s') == w)
}

fn identify_facet(question: &str, gt: &ClauseSet) -> Option<Facet> {
    let q = question.to_lowercase();
    let cols = gold_columns(gt);
    let mentioned = || {
        let ws = words(&q);
        cols.iter()
            .find(|c| {
                let h = humanize(c);
                q.contains(&h) || ws.iter().any(|w| w.len() >= 3 && word_matches_column(w, c))
            })
            .cloned()
    };
    if q.contains("chart") {
        return Some(Facet::Chart);
    }
    if q.contains("aggregat") || q.contains("raw") {
        return mentioned().map(Facet::Aggregation);
    }
    if let Some(rest) = q.split(" by ").nth(1) {
        let target = rest.trim_matches(|c: char| !c.is_alphanumeric() && c != '_' && c != ' ');
        let target = target.trim();
        if let Some(c) = cols.iter().find(|c| {
            target
                .split_whitespace()
                .any(|w| w.len() >= 3 && word_matches_column(w, c))
        }) {
            return Some(Facet::Column(c.clone()));
        }
    }
    mentioned().map(Facet::Column)
}

fn display_name(db: &Database, name: &str) -> String {
    db.all_columns()
        .find(|c| ident_key(&c.name) == ident_key(name))
        .map(|c| c.name.clone())
        .unwrap_or_else(|| name.to_string())
}

fn draft_answer(facet: &Facet, gt: &ClauseSet, db: &Database) -> String {
    match facet {
        Facet::Chart => match gt.visualize() {
            Some(chart) => format!("I want a {} chart.", chart.keyword().to_lowercase()),
            None => "I only need the table, no chart.".into(),
        },
        Facet::Column(c) => format!("I meant the {} field.", humanize(&display_name(db, c))),
        Facet::Aggregation(c) => {
            let key = ident_key(c);
            let aggregated = gt.select().iter().find_map(|i| match i {
                SelectItem::Aggregate(a) => match &a.arg {
                    AggArg::Column(col) if ident_key(&col.name) == key => Some(a.func),
                    _ => None,
                },
                _ => None,
            });
            let name = humanize(&display_name(db, c));
            match aggregated {
                Some(f) => format!(
                    "Please use the {} of {name}.",
                    match f {
                        crate::vql::AggFunc::Count => "count",
                        crate::vql::AggFunc::Sum => "total",
                        crate::vql::AggFunc::Avg => "average",
                        crate::vql::AggFunc::Min => "minimum",
                        crate::vql::AggFunc::Max => "maximum",
                    }
                ),
                None => format!("Show the raw {name} values, without aggregation."),
            }
        }
    }
}

fn facet_name(facet: &Facet, db: &Database) -> String {
    match facet {
        Facet::Chart => "chart type".into(),
        Facet::Column(c) | Facet::Aggregation(c) => humanize(&display_name(db, c)),
    }
}

/// Answers a clarification request from the gold query. Requests for the
/// gold query itself are refused, and no answer repeats three consecutive
/// tokens of it.
pub fn user_clarify(
    req: &ClarificationRequest,
    _history: &DialogueHistory,
    gt_vql: &str,
    db: &Database,
) -> ClarificationReply {
    if req.kind == ClarificationKind::GroundTruthProbe {
        return ClarificationReply::Refuse;
    }
    let Ok(gt) = parse(gt_vql) else {
        return ClarificationReply::Answer("I'd rather keep my original wording.".into());
    };
    let canonical = gt.assemble();
    let Some(facet) = identify_facet(&req.question, &gt) else {
        return ClarificationReply::Answer("Please go with my original wording.".into());
    };
    let draft = draft_answer(&facet, &gt, db);
    if !leaks(&draft, &canonical) && !leaks(&draft, gt_vql) {
        return ClarificationReply::Answer(draft);
    }
    let redacted = format!("It is about the {}.", facet_name(&facet, db));
    if leaks(&redacted, &canonical) || leaks(&redacted, gt_vql) {
        ClarificationReply::Refuse
    } else {
        ClarificationReply::Answer(redacted)
    }
}
