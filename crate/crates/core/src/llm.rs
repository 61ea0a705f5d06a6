//! The language-model boundary: a request/reply trait plus a scripted
//! implementation for deterministic runs.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::text::whitespace_tokens;

/// What a request is for; scripts may key replies on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Translate,
    Validate,
    Intent,
    Nlq,
}

impl fmt::Display for Purpose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Purpose::Translate => "translate",
            Purpose::Validate => "validate",
            Purpose::Intent => "intent",
            Purpose::Nlq => "nlq",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Message {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Message {
            role: Role::User,
            content: content.into(),
        }
    }
}

/// One completion request. `session`, `round` and `step` locate the call
/// inside a run; step 0 is the translation call of a round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LlmRequest {
    pub purpose: Purpose,
    pub session: Option<String>,
    pub round: usize,
    pub step: usize,
    pub messages: Vec<Message>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LlmReply {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LlmError {
    #[error("no scripted reply for {purpose} at round {round}, step {step}")]
    NoScriptedReply {
        purpose: Purpose,
        round: usize,
        step: usize,
    },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    BadResponse(String),
}

pub trait LlmClient {
    fn complete(&mut self, request: &LlmRequest) -> Result<LlmReply, LlmError>;
}

impl<T: LlmClient + ?Sized> LlmClient for &mut T {
    fn complete(&mut self, request: &LlmRequest) -> Result<LlmReply, LlmError> {
        (**self).complete(request)
    }
}

/// One line of a reply script. Unset `session_id` or `purpose` match any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    pub round: usize,
    pub step: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purpose: Option<Purpose>,
    pub reply: String,
}

impl ScriptEntry {
    fn matches(&self, req: &LlmRequest) -> Option<usize> {
        if self.round != req.round || self.step != req.step {
            return None;
        }
        let mut specificity = 0;
        if let Some(s) = &self.session_id {
            if req.session.as_deref() != Some(s.as_str()) {
                return None;
            }
            specificity += 2;
        }
        if let Some(p) = self.purpose {
            if p != req.purpose {
                return None;
            }
            specificity += 1;
        }
        Some(specificity)
    }
}

/// Replays a fixed script. Token counts are whitespace-token counts of
/// the prompt and the reply.
#[derive(Debug, Clone, Default)]
pub struct ScriptedMock {
    entries: Vec<ScriptEntry>,
    calls: usize,
}

impl ScriptedMock {
    pub fn new(entries: Vec<ScriptEntry>) -> Self {
        ScriptedMock { entries, calls: 0 }
    }

    pub fn entries(&self) -> &[ScriptEntry] {
        &self.entries
    }

    /// Number of completed calls.
    pub fn calls(&self) -> usize {
        self.calls
    }
}

impl LlmClient for ScriptedMock {
    fn complete(&mut self, request: &LlmRequest) -> Result<LlmReply, LlmError> {
        // Most specific entry wins; ties go to the earliest line.
        let mut best: Option<(usize, &ScriptEntry)> = None;
        for e in &self.entries {
            if let Some(s) = e.matches(request) {
                if best.is_none_or(|(b, _)| s > b) {
                    best = Some((s, e));
                }
            }
        }
        let (_, entry) = best.ok_or(LlmError::NoScriptedReply {
            purpose: request.purpose,
            round: request.round,
            step: request.step,
        })?;
        self.calls += 1;
        Ok(LlmReply {
            text: entry.reply.clone(),
            prompt_tokens: request
                .messages
                .iter()
                .map(|m| whitespace_tokens(&m.content))
                .sum(),
            completion_tokens: whitespace_tokens(&entry.reply),
        })
    }
}
