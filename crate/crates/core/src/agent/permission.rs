//! The tool permission gate. Schema, exec and intent need a passing
//! syntax check of the current candidate; exec also needs a passing schema
//! check. Editing the candidate discards every verdict.

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::tools::ToolId;

/// What the validation agent asked to do in one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Tool(ToolId),
    /// Only update the candidate.
    None,
    Finalize,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Tool(t) => t.fmt(f),
            Action::None => f.write_str("none"),
            Action::Finalize => f.write_str("FINAL"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockingRule {
    /// Syntax has not passed on the current candidate.
    #[serde(rename = "VA2")]
    SyntaxFirst,
    /// Schema has not passed on the current candidate.
    #[serde(rename = "VA3")]
    SchemaBeforeExec,
}

impl BlockingRule {
    pub fn code(self) -> &'static str {
        match self {
            BlockingRule::SyntaxFirst => "VA2",
            BlockingRule::SchemaBeforeExec => "VA3",
        }
    }
}

impl fmt::Display for BlockingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockingRule::SyntaxFirst => "syntax must pass on the current candidate first",
            BlockingRule::SchemaBeforeExec => "schema must pass on the current candidate first",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermissionDecision {
    pub action: Action,
    pub allowed: bool,
    pub blocking_rule: Option<BlockingRule>,
}

/// The candidate under validation with the verdicts issued for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationState {
    candidate: String,
    verdicts: BTreeMap<ToolId, bool>,
}

impl ValidationState {
    pub fn new(candidate: impl Into<String>) -> Self {
        ValidationState {
            candidate: candidate.into(),
            verdicts: BTreeMap::new(),
        }
    }

    pub fn candidate(&self) -> &str {
        &self.candidate
    }

    /// Replaces the candidate; any change discards all verdicts.
    pub fn set_candidate(&mut self, candidate: String) -> bool {
        if candidate == self.candidate {
            return false;
        }
        self.candidate = candidate;
        self.verdicts.clear();
        true
    }

    pub fn record(&mut self, tool: ToolId, passed: bool) {
        self.verdicts.insert(tool, passed);
    }

    /// Latest verdict of `tool` on the current candidate.
    pub fn verdict(&self, tool: ToolId) -> Option<bool> {
        self.verdicts.get(&tool).copied()
    }

    fn passed(&self, tool: ToolId) -> bool {
        self.verdict(tool) == Some(true)
    }
}

pub fn permission(state: &ValidationState, action: Action) -> PermissionDecision {
    let blocking_rule = match action {
        Action::Tool(ToolId::Syntax) | Action::None | Action::Finalize => None,
        Action::Tool(_) if !state.passed(ToolId::Syntax) => Some(BlockingRule::SyntaxFirst),
        Action::Tool(ToolId::Exec) if !state.passed(ToolId::Schema) => {
            Some(BlockingRule::SchemaBeforeExec)
        }
        Action::Tool(_) => None,
    };
    PermissionDecision {
        action,
        allowed: blocking_rule.is_none(),
        blocking_rule,
    }
}
