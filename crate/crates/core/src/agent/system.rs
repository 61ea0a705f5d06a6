//! The system agent: prompt construction, VQL extraction and translation.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::user::DialogueStatus;
use super::AgentError;
use crate::llm::{LlmClient, LlmReply, LlmRequest, Message, Purpose};
use crate::store::Database;
use crate::vql::parse;

/// Grammar reminders included in every translation prompt.
pub const FORMAT_GUIDELINES: &str = "\
1. Clause order: VISUALIZE <chart> SELECT ... FROM ... [JOIN ... ON ...] [WHERE ...] [GROUP BY ...] [HAVING ...] [ORDER BY ...] [LIMIT n] [BIN <column> BY <interval>].
2. <chart> is one of BAR, PIE, LINE, SCATTER. A chart selects exactly two items: the x value, then the y value.
3. Aggregates are COUNT, SUM, AVG, MIN and MAX. COUNT(*) counts rows. DISTINCT is allowed inside an aggregate.
4. Every selected column that is not aggregated must appear in GROUP BY when the query aggregates.
5. <interval> is one of YEAR, MONTH, DAY, WEEKDAY and the binned column must hold dates.
6. Use only tables and columns from the schema. Qualify a column with its table when two joined tables share the name.
7. Strings use single quotes. Write keywords in upper case.";

/// One line per table with typed columns, then foreign keys.
pub fn schema_prompt(db: &Database) -> String {
    let mut out = String::new();
    for t in db.tables() {
        let cols: Vec<String> = t
            .columns
            .iter()
            .map(|c| format!("{} ({})", c.name, c.declared_type.name()))
            .collect();
        out.push_str(&format!(
            "# Table: {}, columns = [{}]\n",
            t.name,
            cols.join(", ")
        ));
    }
    for fk in db.foreign_keys() {
        out.push_str(&format!(
            "# Foreign key: {}.{} = {}.{}\n",
            fk.from.table, fk.from.column, fk.to.table, fk.to.column
        ));
    }
    out
}

/// Dialogue section: finished rounds with their clarified queries, then the
/// current round awaiting output.
pub fn dialogue_prompt(status: &DialogueStatus) -> String {
    let mut out = String::new();
    for (i, e) in status.history().entries().iter().enumerate() {
        out.push_str(&format!(
            "## Round {}\n# User: {}\n# System: {}\n",
            i + 1,
            e.nlq,
            e.clarified_vql
        ));
    }
    out.push_str(&format!(
        "## Round {}\n# User: {}\n# System: [Output VQL]\n",
        status.round(),
        status.current_nlq()
    ));
    out
}

pub fn build_translate_prompt(status: &DialogueStatus, db: &Database) -> String {
    format!(
        "### Task\n\
         # Translate the user's latest question into one VQL query over the schema below. \
         Earlier rounds show how the conversation got here.\n\n\
         ### Database Schemas:\n{}\n\
         ### Please follow the VQL Format Guidelines\n{FORMAT_GUIDELINES}\n\n\
         ### Natural Language Question\n{}\n\
         ### Output\n\
         # Reply with the query only, inside a fenced block:\n\
         ```VQL\n<query>\n```\n",
        schema_prompt(db),
        dialogue_prompt(status)
    )
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no fenced VQL block in reply")]
pub struct ExtractionError;

/// Contents of the first ```VQL (or untagged ```) block, on one line.
pub fn extract_vql(reply: &str) -> Result<String, ExtractionError> {
    let mut rest = reply;
    while let Some(open) = rest.find("```") {
        let after = &rest[open + 3..];
        let line_end = after.find('\n').unwrap_or(after.len());
        let tag = after[..line_end].trim();
        let body = &after[line_end..];
        let Some(close) = body.find("```") else {
            return Err(ExtractionError);
        };
        if tag.is_empty() || tag.eq_ignore_ascii_case("vql") {
            let text = body[..close]
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ");
            if text.is_empty() {
                return Err(ExtractionError);
            }
            return Ok(text);
        }
        rest = &body[close + 3..];
    }
    Err(ExtractionError)
}

/// Canonical text when `v` parses, otherwise `v` unchanged.
pub fn canonicalize(v: &str) -> String {
    match parse(v) {
        Ok(cs) => cs.assemble(),
        Err(_) => v.trim().to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Translation {
    /// Extracted and canonicalized query, or the raw reply when no block
    /// was found.
    pub vql: String,
    pub reply: LlmReply,
    pub extraction_failed: bool,
}

/// One translation call for the round in `status`.
pub fn system_translate(
    status: &DialogueStatus,
    db: &Database,
    llm: &mut dyn LlmClient,
    session: Option<&str>,
) -> Result<Translation, AgentError> {
    let request = LlmRequest {
        purpose: Purpose::Translate,
        session: session.map(ToString::to_string),
        round: status.round(),
        step: 0,
        messages: alloc::vec![
            Message::system(build_translate_prompt(status, db)),
            Message::user(status.current_nlq().to_string()),
        ],
    };
    let reply = llm.complete(&request)?;
    let (vql, extraction_failed) = match extract_vql(&reply.text) {
        Ok(v) => (canonicalize(&v), false),
        Err(ExtractionError) => (reply.text.trim().to_string(), true),
    };
    Ok(Translation {
        vql,
        reply,
        extraction_failed,
    })
}
