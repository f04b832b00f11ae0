//! JSON transcripts of repair sessions, and replay from them.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CopilotError, Result};
use crate::provider::ScriptedProvider;
use crate::session::{RepairSession, Round};

pub const REDACTED: &str = "<redacted>";

/// Object keys that look like they hold a secret. Transcripts carrying any
/// of them are refused.
const SECRET_KEYS: [&str; 6] = ["credential", "api_key", "apikey", "authorization", "token", "secret"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transcript {
    pub component: String,
    pub max_repairs: usize,
    pub outcome: String,
    pub rounds: Vec<Round>,
}

impl Transcript {
    /// Captures a session, replacing every occurrence of each secret.
    pub fn from_session(session: &RepairSession, secrets: &[String]) -> Self {
        let scrub = |s: &str| {
            secrets
                .iter()
                .filter(|k| !k.is_empty())
                .fold(s.to_string(), |acc, k| acc.replace(k.as_str(), REDACTED))
        };
        Transcript {
            component: scrub(&session.component),
            max_repairs: session.max_repairs,
            outcome: session.outcome.name().to_string(),
            rounds: session
                .rounds
                .iter()
                .map(|r| Round {
                    prompt: scrub(&r.prompt),
                    response: scrub(&r.response),
                    diagnostics: r
                        .diagnostics
                        .iter()
                        .cloned()
                        .map(|mut d| {
                            d.message = scrub(&d.message);
                            if let fta_core::Location::Line { text, .. } = &mut d.location {
                                *text = scrub(text);
                            }
                            d
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("transcript serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| CopilotError::MalformedTranscript(e.to_string()))?;
        if let Some(key) = secret_key(&value) {
            return Err(CopilotError::MalformedTranscript(format!("field `{key}` may hold a credential")));
        }
        let transcript: Transcript =
            serde_json::from_value(value).map_err(|e| CopilotError::MalformedTranscript(e.to_string()))?;
        if !matches!(transcript.outcome.as_str(), "success" | "exhausted") {
            return Err(CopilotError::MalformedTranscript(format!(
                "unknown outcome `{}`",
                transcript.outcome
            )));
        }
        Ok(transcript)
    }

    /// A provider answering with the recorded responses in order.
    pub fn provider(&self) -> ScriptedProvider {
        ScriptedProvider::new(self.rounds.iter().map(|r| r.response.clone()))
    }
}

fn secret_key(value: &Value) -> Option<String> {
    match value {
        Value::Object(map) => map.iter().find_map(|(k, v)| {
            let lower = k.to_ascii_lowercase();
            if SECRET_KEYS.iter().any(|s| lower.contains(s)) {
                Some(k.clone())
            } else {
                secret_key(v)
            }
        }),
        Value::Array(items) => items.iter().find_map(secret_key),
        _ => None,
    }
}

/// Writes a session as JSON with the given secrets redacted.
pub fn record_session(session: &RepairSession, path: &Path, secrets: &[String]) -> Result<()> {
    fs::write(path, Transcript::from_session(session, secrets).to_json())
        .map_err(|e| CopilotError::Io(format!("{}: {e}", path.display())))
}

pub fn load_transcript(path: &Path) -> Result<Transcript> {
    let text = fs::read_to_string(path).map_err(|e| CopilotError::Io(format!("{}: {e}", path.display())))?;
    Transcript::from_json(&text)
}

/// Loads a transcript and returns a provider that replays it.
pub fn replay_session(path: &Path) -> Result<ScriptedProvider> {
    Ok(load_transcript(path)?.provider())
}
