//! The validation agent: a bounded think/act/observe loop that checks and
//! repairs a candidate query through the gated tools.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::permission::{permission, Action, BlockingRule, ValidationState};
use super::system::{canonicalize, dialogue_prompt, extract_vql, schema_prompt};
use super::tools::{
    tool_exec, tool_intent, tool_schema, tool_syntax, IntentContext, IntentMode, ToolId,
    ToolVerdict,
};
use super::user::{user_clarify, ClarificationReply, ClarificationRequest, DialogueStatus};
use super::AgentError;
use crate::llm::{LlmClient, LlmReply, LlmRequest, Message, Purpose};
use crate::store::Database;

/// One parsed reply of the validation model.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StepReply {
    pub thought: String,
    /// `None` when the reply names no recognizable action.
    pub action: Option<Action>,
    pub vql: Option<String>,
}

fn parse_action(word: &str) -> Option<Action> {
    let w = word
        .trim()
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_ascii_lowercase();
    match w.as_str() {
        "final" | "finalize" | "final answer" => Some(Action::Finalize),
        "none" => Some(Action::None),
        other => ToolId::from_name(other).map(Action::Tool),
    }
}

fn field<'a>(line: &'a str, name: &str) -> Option<&'a str> {
    let (head, rest) = line.split_once(':')?;
    head.trim().eq_ignore_ascii_case(name).then(|| rest.trim())
}

/// Reads `Thought:`, `Action:` and `VQL:` lines. A fenced VQL block also
/// counts as the update.
pub fn parse_step_reply(text: &str) -> StepReply {
    let mut out = StepReply::default();
    for line in text.lines() {
        if let Some(t) = field(line, "thought") {
            if out.thought.is_empty() {
                out.thought = t.to_string();
            }
        } else if let Some(a) = field(line, "action") {
            if out.action.is_none() {
                out.action = parse_action(a);
            }
        } else if let Some(v) = field(line, "vql") {
            if out.vql.is_none() && !v.is_empty() && !v.starts_with("```") {
                out.vql = Some(v.to_string());
            }
        }
    }
    if out.vql.is_none() {
        out.vql = extract_vql(text).ok();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClarificationExchange {
    pub request: ClarificationRequest,
    pub reply: ClarificationReply,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    pub thought: String,
    /// What the model asked for; `None` for an unreadable reply.
    pub requested: Option<Action>,
    /// The tool that actually ran.
    pub executed: Option<ToolId>,
    /// Set when the gate blocked the requested tool.
    pub blocked_by: Option<BlockingRule>,
    /// The candidate the tool ran on.
    pub candidate: String,
    pub verdict: Option<ToolVerdict>,
    pub clarification: Option<ClarificationExchange>,
    /// New candidate after this step, if it changed.
    pub update: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmCall {
    pub purpose: crate::llm::Purpose,
    pub step: usize,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl LlmCall {
    pub fn new(purpose: Purpose, step: usize, reply: &LlmReply) -> Self {
        LlmCall {
            purpose,
            step,
            prompt_tokens: reply.prompt_tokens,
            completion_tokens: reply.completion_tokens,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidateConfig {
    /// Step budget per round.
    pub max_steps: usize,
    pub intent_mode: IntentMode,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig {
            max_steps: 10,
            intent_mode: IntentMode::Heuristic,
        }
    }
}

/// Everything the loop needs besides the model.
#[derive(Debug, Clone, Copy)]
pub struct ValidateInput<'a> {
    pub candidate: &'a str,
    pub status: &'a DialogueStatus,
    pub db: &'a Database,
    /// Gold query the simulated user answers from.
    pub gt_vql: &'a str,
    pub session: Option<&'a str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOutcome {
    pub v_cla: String,
    pub trace: Vec<TraceStep>,
    pub clarifications: Vec<ClarificationExchange>,
    pub llm_calls: Vec<LlmCall>,
    pub tool_calls: usize,
    pub policy_violations: usize,
    pub finalized: bool,
    /// Set when the loop stopped early on an error.
    pub error: Option<AgentError>,
}

const TOOL_HELP: &str = "\
syntax: checks the candidate against the VQL grammar.
schema: checks that every table and column exists. Needs syntax to pass first.
exec: runs the candidate and reports the row count. Needs syntax and schema to pass first.
intent: checks the candidate against the question and may ask the user. Needs syntax to pass first.
none: run nothing, only update the candidate.
FINAL: stop and return the candidate.";

fn observation(step: &TraceStep) -> String {
    let mut out = String::new();
    if let (Some(requested), Some(rule)) = (step.requested, step.blocked_by) {
        out.push_str(&format!(
            "{requested} was blocked ({rule}); ran syntax instead. "
        ));
    }
    if let Some(v) = &step.verdict {
        out.push_str(&format!(
            "{}: {} ({})",
            v.tool,
            if v.passed { "passed" } else { "failed" },
            v.diagnostic
        ));
    }
    if let Some(c) = &step.clarification {
        out.push_str(&format!(" User: {}", c.reply.text()));
    }
    if step.requested.is_none() {
        out.push_str("Reply not understood. Use the Thought/Action/VQL format.");
    }
    if out.is_empty() {
        out.push_str("candidate updated");
    }
    out
}

pub fn build_validation_prompt(
    input: &ValidateInput<'_>,
    candidate: &str,
    trace: &[TraceStep],
) -> String {
    let mut steps = String::new();
    for s in trace {
        steps.push_str(&format!(
            "Step {}\nThought: {}\nAction: {}\nObservation: {}\n",
            s.step,
            s.thought,
            s.requested
                .map(|a| a.to_string())
                .unwrap_or_else(|| "?".into()),
            observation(s)
        ));
    }
    if steps.is_empty() {
        steps.push_str("(none)\n");
    }
    format!(
        "### Task\n\
         # Check the candidate VQL for the latest question and repair it if needed. \
         Use one tool per step and finish with FINAL.\n\n\
         ### Database Schemas:\n{}\n\
         ### Natural Language Question\n{}\n\
         ### Candidate VQL\n{candidate}\n\n\
         ### Tools\n{TOOL_HELP}\n\n\
         ### Previous steps\n{steps}\n\
         ### Reply format\n\
         Thought: <one line>\n\
         Action: syntax | schema | exec | intent | none | FINAL\n\
         VQL: <revised candidate, optional>\n",
        schema_prompt(input.db),
        dialogue_prompt(input.status)
    )
}

/// Runs a permitted tool. Refuses anything the gate would block.
fn dispatch(
    state: &ValidationState,
    tool: ToolId,
    input: &ValidateInput<'_>,
    cfg: &ValidateConfig,
    llm: &mut dyn LlmClient,
    step: usize,
    calls: &mut Vec<LlmCall>,
) -> Result<(ToolVerdict, Option<ClarificationRequest>), AgentError> {
    let decision = permission(state, Action::Tool(tool));
    if !decision.allowed {
        return Err(AgentError::ContractViolation(format!(
            "{tool} dispatched while blocked by {}",
            decision.blocking_rule.map(|r| r.code()).unwrap_or("?")
        )));
    }
    let candidate = state.candidate();
    Ok(match tool {
        ToolId::Syntax => (tool_syntax(candidate), None),
        ToolId::Schema => (tool_schema(candidate, input.db), None),
        ToolId::Exec => (
            tool_exec(candidate, input.db)
                .map_err(|g| AgentError::ContractViolation(g.to_string()))?,
            None,
        ),
        ToolId::Intent => {
            let ctx = IntentContext {
                session: input.session,
                step,
            };
            let client: Option<&mut dyn LlmClient> = match cfg.intent_mode {
                IntentMode::Llm => Some(llm),
                IntentMode::Heuristic => None,
            };
            let outcome = tool_intent(
                input.status,
                candidate,
                input.db,
                cfg.intent_mode,
                client,
                ctx,
            )?;
            if let Some(reply) = &outcome.reply {
                calls.push(LlmCall::new(Purpose::Intent, step, reply));
            }
            (outcome.verdict, outcome.request)
        }
    })
}

/// Validates and repairs `input.candidate` within `cfg.max_steps` steps.
///
/// Each step asks the model for a thought, an action and an optional
/// revised query. The requested tool runs on the current candidate (a
/// blocked tool is replaced by syntax), then the revision, if any, becomes
/// the new candidate. FINAL returns at once.
pub fn validate(
    input: ValidateInput<'_>,
    llm: &mut dyn LlmClient,
    cfg: &ValidateConfig,
) -> ValidationOutcome {
    let mut state = ValidationState::new(input.candidate);
    let mut out = ValidationOutcome {
        v_cla: input.candidate.to_string(),
        trace: Vec::new(),
        clarifications: Vec::new(),
        llm_calls: Vec::new(),
        tool_calls: 0,
        policy_violations: 0,
        finalized: false,
        error: None,
    };
    for step in 1..=cfg.max_steps {
        let request = LlmRequest {
            purpose: Purpose::Validate,
            session: input.session.map(ToString::to_string),
            round: input.status.round(),
            step,
            messages: alloc::vec![
                Message::system(build_validation_prompt(
                    &input,
                    state.candidate(),
                    &out.trace
                )),
                Message::user(input.status.current_nlq().to_string()),
            ],
        };
        let reply = match llm.complete(&request) {
            Ok(r) => r,
            Err(e) => {
                out.error = Some(e.into());
                break;
            }
        };
        out.llm_calls
            .push(LlmCall::new(Purpose::Validate, step, &reply));
        let parsed = parse_step_reply(&reply.text);
        let mut record = TraceStep {
            step,
            thought: parsed.thought.clone(),
            requested: parsed.action,
            executed: None,
            blocked_by: None,
            candidate: state.candidate().to_string(),
            verdict: None,
            clarification: None,
            update: None,
        };

        if parsed.action == Some(Action::Finalize) {
            if let Some(v) = &parsed.vql {
                let v = canonicalize(v);
                if state.set_candidate(v.clone()) {
                    record.update = Some(v);
                }
            }
            out.trace.push(record);
            out.finalized = true;
            break;
        }

        if let Some(Action::Tool(requested)) = parsed.action {
            let decision = permission(&state, Action::Tool(requested));
            let tool = if decision.allowed {
                requested
            } else {
                out.policy_violations += 1;
                record.blocked_by = decision.blocking_rule;
                ToolId::Syntax
            };
            match dispatch(&state, tool, &input, cfg, llm, step, &mut out.llm_calls) {
                Ok((verdict, request)) => {
                    out.tool_calls += 1;
                    record.executed = Some(tool);
                    state.record(tool, verdict.passed);
                    if let Some(req) = request {
                        let reply =
                            user_clarify(&req, input.status.history(), input.gt_vql, input.db);
                        let exchange = ClarificationExchange {
                            request: req,
                            reply,
                        };
                        out.clarifications.push(exchange.clone());
                        record.clarification = Some(exchange);
                    }
                    record.verdict = Some(verdict);
                }
                Err(e) => {
                    out.error = Some(e);
                    out.trace.push(record);
                    break;
                }
            }
        }

        if let Some(v) = &parsed.vql {
            let v = canonicalize(v);
            if state.set_candidate(v.clone()) {
                record.update = Some(v);
            }
        }
        out.trace.push(record);
    }
    out.v_cla = state.candidate().to_string();
    out
}

/// Replays a trace and checks that schema, exec and intent only ran after
/// syntax passed on the same unchanged candidate, and exec only after
/// schema passed as well.
pub fn audit_gate(initial: &str, trace: &[TraceStep]) -> bool {
    let mut candidate = initial.to_string();
    let mut syntax_ok = false;
    let mut schema_ok = false;
    for s in trace {
        if s.candidate != candidate {
            return false;
        }
        if let Some(tool) = s.executed {
            let passed = s
                .verdict
                .as_ref()
                .is_some_and(|v| v.passed && v.tool == tool);
            match tool {
                ToolId::Syntax => syntax_ok = passed,
                ToolId::Schema => {
                    if !syntax_ok {
                        return false;
                    }
                    schema_ok = passed;
                }
                ToolId::Exec => {
                    if !(syntax_ok && schema_ok) {
                        return false;
                    }
                }
                ToolId::Intent => {
                    if !syntax_ok {
                        return false;
                    }
                }
            }
        }
        if let Some(next) = &s.update {
            if *next != candidate {
                candidate = next.clone();
                syntax_ok = false;
                schema_ok = false;
            }
        }
    }
    true
}
