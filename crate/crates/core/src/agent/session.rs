//! Multi-round sessions: translate, validate, record.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::system::system_translate;
use super::user::{build_status, user_issue, DialogueHistory};
use super::validate::{
    audit_gate, validate, ClarificationExchange, LlmCall, TraceStep, ValidateConfig, ValidateInput,
};
use super::AgentError;
use crate::llm::{LlmClient, Purpose};
use crate::store::Database;
use crate::trajectory::Trajectory;

/// Wall-clock source in seconds. The core has no clock of its own.
pub trait Clock {
    fn now(&self) -> f64;
}

/// Always zero, for reproducible transcripts.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub nlq: String,
    pub gold_vql: String,
    pub v_gen: String,
    pub v_cla: String,
    /// The translation reply had no fenced block; `v_gen` is the raw reply.
    pub extraction_failed: bool,
    pub trace: Vec<TraceStep>,
    pub clarifications: Vec<ClarificationExchange>,
    pub llm_calls: Vec<LlmCall>,
    pub tool_calls: usize,
    pub policy_violations: usize,
    pub finalized: bool,
    pub wall_time_s: f64,
}

impl RoundRecord {
    pub fn prompt_tokens(&self) -> u64 {
        self.llm_calls.iter().map(|c| c.prompt_tokens).sum()
    }

    pub fn completion_tokens(&self) -> u64 {
        self.llm_calls.iter().map(|c| c.completion_tokens).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub rounds: usize,
    pub llm_calls: usize,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub tool_calls: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub session_id: String,
    pub db_id: String,
    pub max_steps: usize,
    pub rounds: Vec<RoundRecord>,
    pub totals: Totals,
    pub policy_violations: usize,
    pub contract_violations: usize,
    /// Every gated tool ran only after its prerequisites passed.
    pub gate_ok: bool,
    /// Tool calls stayed within rounds times the step budget.
    pub budget_ok: bool,
    pub complete: bool,
    pub error: Option<String>,
}

/// Runs every round of `traj`: the user asks, the system translates, the
/// validation agent repairs, and the clarified query joins the history.
pub fn run_session(
    traj: &Trajectory,
    db: &Database,
    llm: &mut dyn LlmClient,
    cfg: &ValidateConfig,
    clock: &dyn Clock,
) -> SessionTranscript {
    let mut history = DialogueHistory::new();
    let mut rounds: Vec<RoundRecord> = Vec::with_capacity(traj.len());
    let mut error: Option<AgentError> = None;
    let session = Some(traj.session_id.as_str());

    for i in 1..=traj.len() {
        let started = clock.now();
        let nlq = match user_issue(traj, i) {
            Ok(q) => q.to_string(),
            Err(e) => {
                error = Some(e);
                break;
            }
        };
        let gold = &traj.rounds[i - 1].vql;
        let status = build_status(&history, &nlq);
        let translation = match system_translate(&status, db, llm, session) {
            Ok(t) => t,
            Err(e) => {
                error = Some(e);
                break;
            }
        };
        let outcome = validate(
            ValidateInput {
                candidate: &translation.vql,
                status: &status,
                db,
                gt_vql: gold,
                session,
            },
            llm,
            cfg,
        );
        let mut llm_calls = alloc::vec![LlmCall::new(Purpose::Translate, 0, &translation.reply)];
        llm_calls.extend(outcome.llm_calls);
        rounds.push(RoundRecord {
            round: i,
            nlq: nlq.clone(),
            gold_vql: gold.clone(),
            v_gen: translation.vql,
            v_cla: outcome.v_cla.clone(),
            extraction_failed: translation.extraction_failed,
            trace: outcome.trace,
            clarifications: outcome.clarifications,
            llm_calls,
            tool_calls: outcome.tool_calls,
            policy_violations: outcome.policy_violations,
            finalized: outcome.finalized,
            wall_time_s: (clock.now() - started).max(0.0),
        });
        if let Some(e) = outcome.error {
            error = Some(e);
            break;
        }
        history.push(nlq, outcome.v_cla);
    }

    let totals = Totals {
        rounds: rounds.len(),
        llm_calls: rounds.iter().map(|r| r.llm_calls.len()).sum(),
        prompt_tokens: rounds.iter().map(RoundRecord::prompt_tokens).sum(),
        completion_tokens: rounds.iter().map(RoundRecord::completion_tokens).sum(),
        tool_calls: rounds.iter().map(|r| r.tool_calls).sum(),
        wall_time_s: rounds.iter().map(|r| r.wall_time_s).sum(),
    };
    let gate_ok = rounds.iter().all(|r| audit_gate(&r.v_gen, &r.trace));
    let budget_ok = totals.tool_calls <= rounds.len() * cfg.max_steps;
    let contract_violations = usize::from(matches!(error, Some(AgentError::ContractViolation(_))));
    SessionTranscript {
        session_id: traj.session_id.clone(),
        db_id: traj.db_id.clone(),
        max_steps: cfg.max_steps,
        policy_violations: rounds.iter().map(|r| r.policy_violations).sum(),
        contract_violations,
        gate_ok,
        budget_ok,
        complete: error.is_none() && rounds.len() == traj.len(),
        error: error.map(|e| e.to_string()),
        rounds,
        totals,
    }
}
