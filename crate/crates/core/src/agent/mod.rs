//! The three agents of a session. The user agent asks the trajectory's
//! questions and answers clarifications, the system agent translates each
//! round, and the validation agent checks and repairs the translation
//! through permission-gated tools.

mod permission;
mod session;
mod system;
mod tools;
mod user;
mod validate;

use alloc::string::String;

pub use permission::{permission, Action, BlockingRule, PermissionDecision, ValidationState};
pub use session::{run_session, Clock, NullClock, RoundRecord, SessionTranscript, Totals};
pub use system::{
    build_translate_prompt, canonicalize, dialogue_prompt, extract_vql, schema_prompt,
    system_translate, ExtractionError, Translation, FORMAT_GUIDELINES,
};
pub use tools::{
    suggest_column, tool_exec, tool_intent, tool_schema, tool_syntax, IntentContext, IntentMode,
    IntentOutcome, ToolId, ToolVerdict,
};
pub use user::{
    asks_ground_truth, build_status, leaks, user_clarify, user_issue, ClarificationKind,
    ClarificationReply, ClarificationRequest, DialogueHistory, DialogueStatus, HistoryEntry,
};
pub use validate::{
    audit_gate, build_validation_prompt, parse_step_reply, validate, ClarificationExchange,
    LlmCall, StepReply, TraceStep, ValidateConfig, ValidateInput, ValidationOutcome,
};

use crate::llm::LlmError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgentError {
    #[error("round {index} is out of range for a trajectory of {len} round(s)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Extraction(#[from] ExtractionError),
    /// A gated tool ran without its prerequisites.
    #[error("contract violation: {0}")]
    ContractViolation(String),
}
