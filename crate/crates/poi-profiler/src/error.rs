use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the pipeline library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path} is not decodable as UTF-8")]
    Encoding { path: PathBuf },

    #[error(
        "format-mismatch in {path}: {parsed} parseable of {total} rows ({malformed} malformed)"
    )]
    FormatMismatch {
        path: PathBuf,
        parsed: usize,
        total: usize,
        malformed: usize,
    },

    #[error("invalid boundary polygon: {0}")]
    InvalidPolygon(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("too few trajectories to split: {0} (need at least 10)")]
    TooFewTrajectories(usize),

    #[error("empty check-in history for user {0}")]
    EmptyHistory(u64),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("hallucination-exhausted after {attempts} attempts: {last_error}")]
    HallucinationExhausted { attempts: u32, last_error: String },

    #[error(transparent)]
    Backend(#[from] BackendError),

    #[error("invalid system prompt config: {0}")]
    InvalidPromptConfig(String),

    #[error("trajectory {0} too short for an example (needs at least 2 check-ins)")]
    TrajectoryTooShort(u64),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("empty category name")]
    EmptyCategory,

    #[error("missing prerequisite artifact {path} (produced by the `{stage}` stage)")]
    MissingArtifact { path: PathBuf, stage: &'static str },

    #[error("prediction lists do not cover the same example ids")]
    ExampleIdMismatch,

    #[error("user {0} is not covered by the activity grouping")]
    UnmappedUser(u64),

    #[error("stale profile version for user {user_id}: expected {expected}, current {current}")]
    StaleVersion {
        user_id: u64,
        expected: u32,
        current: u32,
    },

    #[error("unknown user {0}")]
    UnknownUser(u64),

    #[error("unknown trajectory {0}")]
    UnknownTrajectory(u64),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("profiles belong to different users ({0} vs {1})")]
    UserMismatch(u64, u64),
}

/// Errors from chat or embedding backends.
#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend transport error: {0}")]
    Transport(String),

    #[error("backend returned HTTP {status}: {body}")]
    Status { status: u16, body: String },

    #[error("malformed backend response: {0}")]
    MalformedResponse(String),

    #[error("scripted backend exhausted after {0} responses")]
    ScriptExhausted(usize),

    #[error("missing API key environment variable {0}")]
    MissingApiKey(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
