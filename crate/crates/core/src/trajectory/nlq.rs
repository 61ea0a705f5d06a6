//! Natural-language questions for each round of a trajectory.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::llm::{LlmClient, LlmError, LlmRequest, Message, Purpose};
use crate::text::humanize;
use crate::vql::{
    AggArg, AggFunc, Aggregate, Clause, ClauseKind, ClauseSet, Direction, SelectItem, SortExpr,
};

fn join_phrases(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

fn aggregate_phrase(a: &Aggregate) -> String {
    let col = match &a.arg {
        AggArg::Star => return "the number of records".into(),
        AggArg::Column(c) => humanize(&c.name),
    };
    let word = match a.func {
        AggFunc::Count if a.distinct => return format!("the number of distinct {col}"),
        AggFunc::Count => "count",
        AggFunc::Sum => "total",
        AggFunc::Avg => "average",
        AggFunc::Min => "minimum",
        AggFunc::Max => "maximum",
    };
    if a.distinct {
        format!("the {word} of distinct {col}")
    } else if a.func == AggFunc::Count {
        format!("the count of {col}")
    } else {
        format!("the {word} {col}")
    }
}

fn item_phrase(item: &SelectItem) -> String {
    match item {
        SelectItem::Star => "all columns".into(),
        SelectItem::Column(c) => humanize(&c.name),
        SelectItem::Aggregate(a) => aggregate_phrase(a),
    }
}

fn sort_phrase(e: &SortExpr) -> String {
    match e {
        SortExpr::Column(c) => humanize(&c.name),
        SortExpr::Aggregate(a) => aggregate_phrase(a),
    }
}

/// Template sentence introducing one added clause.
pub fn clause_nlq(delta: &Clause) -> String {
    match delta {
        Clause::Visualize(chart) => {
            format!("Show it as a {} chart.", chart.keyword().to_lowercase())
        }
        Clause::Select(items) => {
            let items: Vec<String> = items.iter().map(item_phrase).collect();
            format!("Show {}.", join_phrases(&items))
        }
        Clause::From(t) => format!("Use the {} table.", humanize(&t.name)),
        Clause::Join(j) => format!("Combine it with the {} table.", humanize(&j.table.name)),
        Clause::Where(p) => format!("Now only include rows where {p}."),
        Clause::GroupBy(cols) => {
            let cols: Vec<String> = cols.iter().map(|c| humanize(&c.name)).collect();
            format!("Group the results by {}.", join_phrases(&cols))
        }
        Clause::Having(p) => format!("Only keep groups where {p}."),
        Clause::OrderBy(keys) => {
            let parts: Vec<String> = keys
                .iter()
                .map(|k| {
                    let dir = match k.direction {
                        Direction::Asc => "ascending",
                        Direction::Desc => "descending",
                    };
                    format!("{} in {dir} order", sort_phrase(&k.expr))
                })
                .collect();
            format!("Also order the results by {}.", parts.join(", then by "))
        }
        Clause::Limit(1) => "Only show the top result.".into(),
        Clause::Limit(n) => format!("Only show the top {n} results."),
        Clause::BinBy(b) => format!(
            "Bin {} by {}.",
            humanize(&b.column.name),
            b.interval.keyword().to_lowercase()
        ),
    }
}

/// Opening question for the simplest query of a chain. Clauses beyond
/// VISUALIZE, SELECT and FROM get one template sentence each.
pub fn base_nlq(cs: &ClauseSet) -> String {
    let table = humanize(&cs.from().name);
    let items: Vec<String> = cs.select().iter().map(item_phrase).collect();
    let mut out = match (cs.visualize(), items.as_slice()) {
        (Some(chart), [x, y]) => format!(
            "Show a {} chart of {y} for each {x} from {table}.",
            chart.keyword().to_lowercase()
        ),
        (Some(chart), _) => format!(
            "Show a {} chart of {} from {table}.",
            chart.keyword().to_lowercase(),
            join_phrases(&items)
        ),
        (None, _) => format!("Show {} from {table}.", join_phrases(&items)),
    };
    for c in cs.clauses() {
        if !matches!(
            c.kind(),
            ClauseKind::Visualize | ClauseKind::Select | ClauseKind::From
        ) {
            out.push(' ');
            out.push_str(&clause_nlq(&c));
        }
    }
    out
}

/// What changed in a round.
#[derive(Debug, Clone, Copy)]
pub enum RoundDelta<'a> {
    /// First round: the whole query.
    Initial(&'a ClauseSet),
    /// A later round: one added clause.
    Added(&'a Clause),
}

/// Where an NLQ request sits in a run, for keyed replies.
#[derive(Debug, Clone, Copy, Default)]
pub struct NlqContext<'a> {
    pub session: Option<&'a str>,
    /// 1-based round index.
    pub round: usize,
}

/// The NLQ for one round: a template, or the model's reply verbatim
/// when a client is supplied.
pub fn synthesize_nlq(
    delta: RoundDelta<'_>,
    history: &[(String, String)],
    llm: Option<&mut dyn LlmClient>,
    ctx: NlqContext<'_>,
) -> Result<String, LlmError> {
    let Some(llm) = llm else {
        return Ok(match delta {
            RoundDelta::Initial(cs) => base_nlq(cs),
            RoundDelta::Added(c) => clause_nlq(c),
        });
    };
    let mut prompt = String::from(
        "### Task\nWrite the next question a data analyst would type in a conversation \
         that builds a chart step by step. Return only the question.\n\n### Conversation so far\n",
    );
    if history.is_empty() {
        prompt.push_str("(none)\n");
    }
    for (i, (q, v)) in history.iter().enumerate() {
        prompt.push_str(&format!("## Round {}\n# User: {q}\n# VQL: {v}\n", i + 1));
    }
    prompt.push_str("\n### Change to express\n");
    match delta {
        RoundDelta::Initial(cs) => {
            prompt.push_str(&format!("Ask for this whole query: {cs}\n"));
        }
        RoundDelta::Added(c) => {
            prompt.push_str(&format!("Add this clause to the previous query: {c}\n"));
        }
    }
    let request = LlmRequest {
        purpose: Purpose::Nlq,
        session: ctx.session.map(ToString::to_string),
        round: ctx.round,
        step: 0,
        messages: alloc::vec![Message::user(prompt)],
    };
    Ok(llm.complete(&request)?.text)
}
