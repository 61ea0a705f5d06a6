//! Accuracy and cost metrics: per-pair component and execution matches,
//! mergeable tallies and the summary report.

use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};

use crate::agent::SessionTranscript;
use crate::exec::{execute, same_rows, ResultTable};
use crate::store::Database;
use crate::text::ident_key;
use crate::vql::visit::columns_mut;
use crate::vql::{components, parse, Clause, ClauseSet, VqlComponents};

/// Execution match. Labels are ignored; the column count must agree. Rows
/// compare as sequences when either side is ordered, as multisets
/// otherwise. Integer and Real compare numerically.
pub fn compare_exec(pred: &ResultTable, gold: &ResultTable) -> bool {
    pred.columns.len() == gold.columns.len()
        && same_rows(&pred.rows, &gold.rows, pred.ordered || gold.ordered)
}

/// Components with identifiers lowercased; literals keep their case.
fn normalized_components(cs: &ClauseSet) -> VqlComponents {
    let mut comps = components(cs);
    let mut lower = |c: &mut crate::vql::ColumnRef| {
        c.name = ident_key(&c.name);
        if let Some(q) = &mut c.qualifier {
            *q = ident_key(q);
        }
    };
    let mut select = Clause::Select(core::mem::take(&mut comps.axis));
    columns_mut(&mut select, &mut lower);
    if let Clause::Select(items) = select {
        comps.axis = items;
    }
    for clause in &mut comps.data {
        columns_mut(clause, &mut lower);
        let table = match clause {
            Clause::From(t) => Some(t),
            Clause::Join(j) => Some(&mut j.table),
            _ => None,
        };
        if let Some(t) = table {
            t.name = ident_key(&t.name);
            if let Some(a) = &mut t.alias {
                *a = ident_key(a);
            }
        }
    }
    comps
}

/// Five match bits for one prediction. `overall` is the conjunction of the
/// three component bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairScore {
    vis: bool,
    axis: bool,
    data: bool,
    overall: bool,
    exec: bool,
}

impl PairScore {
    pub fn new(vis: bool, axis: bool, data: bool, exec: bool) -> Self {
        PairScore {
            vis,
            axis,
            data,
            overall: vis && axis && data,
            exec,
        }
    }

    pub const MISS: PairScore = PairScore {
        vis: false,
        axis: false,
        data: false,
        overall: false,
        exec: false,
    };

    pub fn vis(&self) -> bool {
        self.vis
    }
    pub fn axis(&self) -> bool {
        self.axis
    }
    pub fn data(&self) -> bool {
        self.data
    }
    pub fn overall(&self) -> bool {
        self.overall
    }
    pub fn exec(&self) -> bool {
        self.exec
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("gold query is invalid: {0}")]
    GoldInvalid(String),
    #[error("no scores to aggregate")]
    NoScores,
}

/// Scores `pred` against `gold` on `db`. An unparseable prediction misses
/// everything; one that parses but fails to ground or execute still gets
/// component bits and misses only `exec`.
pub fn score_pair(pred: &str, gold: &str, db: &Database) -> Result<PairScore, MetricsError> {
    let gold_cs = parse(gold).map_err(|e| MetricsError::GoldInvalid(e.to_string()))?;
    let gold_rows = execute(&gold_cs, db).map_err(|e| MetricsError::GoldInvalid(e.to_string()))?;
    let Ok(pred_cs) = parse(pred) else {
        return Ok(PairScore::MISS);
    };
    let p = normalized_components(&pred_cs);
    let g = normalized_components(&gold_cs);
    let exec = execute(&pred_cs, db).is_ok_and(|rows| compare_exec(&rows, &gold_rows));
    Ok(PairScore::new(
        p.vis == g.vis,
        p.axis == g.axis,
        p.data == g.data,
        exec,
    ))
}

/// Match counts; shards merge by addition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreTally {
    pub n: u64,
    pub vis: u64,
    pub axis: u64,
    pub data: u64,
    pub overall: u64,
    pub exec: u64,
}

impl ScoreTally {
    pub fn add(&mut self, s: &PairScore) {
        self.n += 1;
        self.vis += u64::from(s.vis);
        self.axis += u64::from(s.axis);
        self.data += u64::from(s.data);
        self.overall += u64::from(s.overall);
        self.exec += u64::from(s.exec);
    }

    pub fn merge(&mut self, other: &ScoreTally) {
        self.n += other.n;
        self.vis += other.vis;
        self.axis += other.axis;
        self.data += other.data;
        self.overall += other.overall;
        self.exec += other.exec;
    }
}

impl<'a> FromIterator<&'a PairScore> for ScoreTally {
    fn from_iter<I: IntoIterator<Item = &'a PairScore>>(iter: I) -> Self {
        let mut t = ScoreTally::default();
        iter.into_iter().for_each(|s| t.add(s));
        t
    }
}

/// Cost sums over session transcripts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostTally {
    pub sessions: u64,
    pub rounds: u64,
    pub tokens: u64,
    pub tool_calls: u64,
    pub wall_time_s: f64,
    pub budget_ok: bool,
}

impl Default for CostTally {
    fn default() -> Self {
        CostTally {
            sessions: 0,
            rounds: 0,
            tokens: 0,
            tool_calls: 0,
            wall_time_s: 0.0,
            budget_ok: true,
        }
    }
}

impl CostTally {
    pub fn add(&mut self, t: &SessionTranscript) {
        self.sessions += 1;
        self.rounds += t.totals.rounds as u64;
        self.tokens += t.totals.prompt_tokens + t.totals.completion_tokens;
        self.tool_calls += t.totals.tool_calls as u64;
        self.wall_time_s += t.totals.wall_time_s;
        self.budget_ok &= t.budget_ok;
    }

    pub fn merge(&mut self, other: &CostTally) {
        self.sessions += other.sessions;
        self.rounds += other.rounds;
        self.tokens += other.tokens;
        self.tool_calls += other.tool_calls;
        self.wall_time_s += other.wall_time_s;
        self.budget_ok &= other.budget_ok;
    }
}

impl<'a> FromIterator<&'a SessionTranscript> for CostTally {
    fn from_iter<I: IntoIterator<Item = &'a SessionTranscript>>(iter: I) -> Self {
        let mut t = CostTally::default();
        iter.into_iter().for_each(|s| t.add(s));
        t
    }
}

fn ratio(count: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub n: u64,
    pub vis_acc: f64,
    pub axis_acc: f64,
    pub data_acc: f64,
    pub overall_acc: f64,
    pub exec_acc: f64,
    pub rounds_mean: f64,
    pub tokens_per_round: f64,
    pub latency_s_per_round: f64,
    pub tool_calls_total: u64,
    /// Every session kept its tool calls within rounds times the step budget.
    pub budget_ok: bool,
}

impl Report {
    pub fn from_tallies(scores: &ScoreTally, costs: &CostTally) -> Self {
        let n = scores.n;
        Report {
            n,
            vis_acc: ratio(scores.vis, n),
            axis_acc: ratio(scores.axis, n),
            data_acc: ratio(scores.data, n),
            overall_acc: ratio(scores.overall, n),
            exec_acc: ratio(scores.exec, n),
            rounds_mean: ratio(costs.rounds, costs.sessions),
            tokens_per_round: ratio(costs.tokens, costs.rounds),
            latency_s_per_round: if costs.rounds == 0 {
                0.0
            } else {
                costs.wall_time_s / costs.rounds as f64
            },
            tool_calls_total: costs.tool_calls,
            budget_ok: costs.budget_ok,
        }
    }
}

pub fn aggregate(
    scores: &[PairScore],
    transcripts: &[SessionTranscript],
) -> Result<Report, MetricsError> {
    if scores.is_empty() {
        return Err(MetricsError::NoScores);
    }
    Ok(Report::from_tallies(
        &scores.iter().collect(),
        &transcripts.iter().collect(),
    ))
}
