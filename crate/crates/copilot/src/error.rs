use thiserror::Error;

/// Marker used as the body of a [`CopilotError::ProviderError`] when the
/// provider answered without any content.
pub const EMPTY_BODY: &str = "<empty body>";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CopilotError {
    #[error("provider unreachable: {0}")]
    ProviderUnreachable(String),
    #[error("provider returned status {status}: {body}")]
    ProviderError { status: u16, body: String },
    #[error("provider timed out")]
    Timeout,
    #[error("scripted provider has no response left after {calls} calls")]
    ExhaustedScript { calls: usize },
    #[error("malformed transcript: {0}")]
    MalformedTranscript(String),
    #[error("template {template} has no value for placeholder {{{placeholder}}}")]
    UnresolvedPlaceholder { template: String, placeholder: String },
    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = CopilotError> = std::result::Result<T, E>;
