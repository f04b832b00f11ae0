//! Drafts fault trees with a chat model and repairs them by feeding the
//! validator's diagnostics back, round by round.

pub mod error;
pub mod prompts;
pub mod provider;
pub mod session;
pub mod transcript;

use std::path::{Path, PathBuf};

pub use error::{CopilotError, Result, EMPTY_BODY};
pub use prompts::{PromptName, PromptSet, PromptTemplate};
pub use provider::{ChatMessage, ChatProvider, HttpChatProvider, Role, ScriptedProvider, API_KEY_VAR};
pub use session::{generate_candidate, run_repair_loop, Outcome, RepairLoop, RepairSession, Round, DEFAULT_MAX_REPAIRS};
pub use transcript::{load_transcript, record_session, replay_session, Transcript, REDACTED};

/// Component description used for the bundled LiDAR session.
pub const LIDAR_COMPONENT: &str = "Lidar sensor in Autonomy";

/// The eight scripted replies behind the bundled LiDAR session: seven
/// faulty drafts, then the final listing.
pub const LIDAR_MOCK_RESPONSES: [&str; 8] = [
    include_str!("../data/lidar_mock/response_1.md"),
    include_str!("../data/lidar_mock/response_2.md"),
    include_str!("../data/lidar_mock/response_3.md"),
    include_str!("../data/lidar_mock/response_4.md"),
    include_str!("../data/lidar_mock/response_5.md"),
    include_str!("../data/lidar_mock/response_6.md"),
    include_str!("../data/lidar_mock/response_7.md"),
    include_str!("../data/lidar_mock/response_8.md"),
];

/// The recorded eight-round LiDAR transcript.
pub const LIDAR_TRANSCRIPT: &str = include_str!("../data/lidar_repair_transcript.json");

pub fn lidar_transcript_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/lidar_repair_transcript.json")
}
