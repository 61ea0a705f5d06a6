//! Chat-completions client over HTTP.

use std::time::Duration;

use pmvis_core::llm::{LlmClient, LlmError, LlmReply, LlmRequest};
use pmvis_core::text::whitespace_tokens;
use serde_json::{json, Value as Json};

pub const URL_VAR: &str = "PMVIS_LLM_URL";
pub const KEY_VAR: &str = "PMVIS_LLM_KEY";
pub const MODEL_VAR: &str = "PMVIS_LLM_MODEL";
const DEFAULT_MODEL: &str = "gpt-4o-mini";

/// POSTs `{model, messages, temperature: 0}` and reads
/// `choices[0].message.content`. Token counts come from `usage` when the
/// server reports it.
pub struct HttpClient {
    url: String,
    key: Option<String>,
    model: String,
    agent: ureq::Agent,
}

impl HttpClient {
    pub fn new(url: impl Into<String>, key: Option<String>, model: impl Into<String>) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .http_status_as_error(false)
            .build();
        HttpClient {
            url: url.into(),
            key,
            model: model.into(),
            agent: config.into(),
        }
    }

    /// Endpoint from `url` or the environment; key and model from the
    /// environment.
    pub fn from_env(url: Option<String>) -> Option<Self> {
        let url = url.or_else(|| std::env::var(URL_VAR).ok())?;
        let key = std::env::var(KEY_VAR).ok().filter(|k| !k.is_empty());
        let model = std::env::var(MODEL_VAR).unwrap_or_else(|_| DEFAULT_MODEL.into());
        Some(HttpClient::new(url, key, model))
    }
}

fn parse_reply(body: &Json, request: &LlmRequest) -> Result<LlmReply, LlmError> {
    let text = body
        .pointer("/choices/0/message/content")
        .and_then(Json::as_str)
        .ok_or_else(|| LlmError::BadResponse("missing choices[0].message.content".into()))?
        .to_string();
    let prompt_tokens = body
        .pointer("/usage/prompt_tokens")
        .and_then(Json::as_u64)
        .unwrap_or_else(|| {
            request
                .messages
                .iter()
                .map(|m| whitespace_tokens(&m.content))
                .sum()
        });
    let completion_tokens = body
        .pointer("/usage/completion_tokens")
        .and_then(Json::as_u64)
        .unwrap_or_else(|| whitespace_tokens(&text));
    Ok(LlmReply {
        text,
        prompt_tokens,
        completion_tokens,
    })
}

impl LlmClient for HttpClient {
    fn complete(&mut self, request: &LlmRequest) -> Result<LlmReply, LlmError> {
        let payload = json!({
            "model": self.model,
            "messages": request.messages,
            "temperature": 0,
        });
        let mut call = self
            .agent
            .post(&self.url)
            .header("Content-Type", "application/json");
        if let Some(key) = &self.key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = call
            .send(payload.to_string().as_bytes())
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        let status = response.status();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(LlmError::Transport(format!("HTTP {status}: {body}")));
        }
        let json: Json =
            serde_json::from_str(&body).map_err(|e| LlmError::BadResponse(e.to_string()))?;
        parse_reply(&json, request)
    }
}
