//! Chat-completion providers: a blocking HTTP client and a scripted replay.

use std::fmt;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CopilotError, Result, EMPTY_BODY};

pub const API_KEY_VAR: &str = "FTA_COPILOT_API_KEY";
pub const ENDPOINT_VAR: &str = "FTA_COPILOT_ENDPOINT";
pub const MODEL_VAR: &str = "FTA_COPILOT_MODEL";
pub const DEFAULT_ENDPOINT: &str = "http://localhost:8080/v1/chat/completions";
pub const DEFAULT_MODEL: &str = "default";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }
}

/// Something that answers a conversation with one reply.
///
/// Implementations take `&self` so a provider can be shared between
/// sessions; stateful ones lock internally.
pub trait ChatProvider {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String>;

    /// Secret values that must never appear in recorded artifacts.
    fn secrets(&self) -> Vec<String> {
        Vec::new()
    }
}

impl<P: ChatProvider + ?Sized> ChatProvider for &P {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String> {
        (**self).complete(messages)
    }

    fn secrets(&self) -> Vec<String> {
        (**self).secrets()
    }
}

/// Posts `{"model", "messages"}` and reads `choices[0].message.content`.
#[derive(Clone)]
pub struct HttpChatProvider {
    pub endpoint: String,
    pub model: String,
    credential: Option<String>,
    pub timeout: Duration,
}

impl fmt::Debug for HttpChatProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpChatProvider")
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .field("credential", &self.credential.as_ref().map(|_| "<redacted>"))
            .field("timeout", &self.timeout)
            .finish()
    }
}

impl HttpChatProvider {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, credential: Option<String>) -> Self {
        HttpChatProvider {
            endpoint: endpoint.into(),
            model: model.into(),
            credential: credential.filter(|c| !c.is_empty()),
            timeout: DEFAULT_TIMEOUT,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Reads endpoint, model and credential through `lookup` (normally
    /// `std::env::var`), falling back to the defaults for the first two.
    pub fn from_env(lookup: impl Fn(&str) -> Option<String>) -> Self {
        HttpChatProvider::new(
            lookup(ENDPOINT_VAR).unwrap_or_else(|| DEFAULT_ENDPOINT.to_string()),
            lookup(MODEL_VAR).unwrap_or_else(|| DEFAULT_MODEL.to_string()),
            lookup(API_KEY_VAR),
        )
    }

    pub fn has_credential(&self) -> bool {
        self.credential.is_some()
    }
}

fn map_transport(err: ureq::Error) -> CopilotError {
    match err {
        ureq::Error::Timeout(_) => CopilotError::Timeout,
        ureq::Error::Io(e) if e.kind() == std::io::ErrorKind::TimedOut => CopilotError::Timeout,
        other => CopilotError::ProviderUnreachable(other.to_string()),
    }
}

/// Pulls the reply text out of a chat-completion response body.
pub fn parse_completion(status: u16, body: &str) -> Result<String> {
    if body.trim().is_empty() {
        return Err(CopilotError::ProviderError {
            status,
            body: EMPTY_BODY.to_string(),
        });
    }
    if !(200..300).contains(&status) {
        return Err(CopilotError::ProviderError {
            status,
            body: body.to_string(),
        });
    }
    let value: Value = serde_json::from_str(body).map_err(|_| CopilotError::ProviderError {
        status,
        body: body.to_string(),
    })?;
    match value.pointer("/choices/0/message/content").and_then(Value::as_str) {
        Some(content) if !content.trim().is_empty() => Ok(content.to_string()),
        Some(_) => Err(CopilotError::ProviderError {
            status,
            body: EMPTY_BODY.to_string(),
        }),
        None => Err(CopilotError::ProviderError {
            status,
            body: body.to_string(),
        }),
    }
}

impl ChatProvider for HttpChatProvider {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut request = agent.post(&self.endpoint).header("Content-Type", "application/json");
        if let Some(key) = &self.credential {
            request = request.header("Authorization", format!("Bearer {key}"));
        }
        let response = request
            .send_json(json!({ "model": self.model, "messages": messages }))
            .map_err(map_transport)?;
        let status = response.status().as_u16();
        let body = response.into_body().read_to_string().map_err(map_transport)?;
        parse_completion(status, &body)
    }

    fn secrets(&self) -> Vec<String> {
        self.credential.iter().cloned().collect()
    }
}

/// Replays fixed responses in order and remembers what it was asked.
#[derive(Debug, Default)]
pub struct ScriptedProvider {
    responses: Vec<String>,
    requests: Mutex<Vec<Vec<ChatMessage>>>,
}

impl ScriptedProvider {
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedProvider {
            responses: responses.into_iter().map(Into::into).collect(),
            requests: Mutex::new(Vec::new()),
        }
    }

    /// Every conversation received so far, in call order.
    pub fn requests(&self) -> Vec<Vec<ChatMessage>> {
        self.requests.lock().expect("request log").clone()
    }

    pub fn calls(&self) -> usize {
        self.requests.lock().expect("request log").len()
    }

    pub fn responses(&self) -> &[String] {
        &self.responses
    }
}

impl ChatProvider for ScriptedProvider {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String> {
        let mut log = self.requests.lock().expect("request log");
        let calls = log.len();
        let reply = self
            .responses
            .get(calls)
            .cloned()
            .ok_or(CopilotError::ExhaustedScript { calls })?;
        log.push(messages.to_vec());
        Ok(reply)
    }
}
