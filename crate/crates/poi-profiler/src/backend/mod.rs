//! Chat and embedding backends.
//!
//! Profile generation, judging, and prediction all speak through the
//! [`ChatBackend`] trait; the update policy embeds summaries through
//! [`EmbeddingBackend`]. Two families implement them: seeded mocks
//! (deterministic, offline, used by tests and golden runs) and HTTP clients
//! for chat-completion style serving endpoints.
//!
//! Backends are synchronous. Callers that need concurrency fan out across
//! users with a bounded thread pool; the HTTP service wraps calls in
//! blocking tasks.

pub mod http;
pub mod mock;

pub use http::{HttpChatBackend, HttpEmbeddingBackend};
pub use mock::{MockChatBackend, MockEmbeddingBackend, ScriptedChatBackend, MOCK_EMBEDDING_DIM};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{BackendError, Result};

/// One chat turn. `role` is `system` or `user` here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> ChatMessage {
        ChatMessage {
            role: "system".into(),
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> ChatMessage {
        ChatMessage {
            role: "user".into(),
            content: content.into(),
        }
    }
}

/// A full completion request. Mocks hash the entire request, so identical
/// requests always produce identical responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub json_mode: bool,
}

impl ChatRequest {
    /// Single user turn with default decoding options (temperature 0,
    /// JSON mode off).
    pub fn from_user(content: impl Into<String>) -> ChatRequest {
        ChatRequest {
            messages: vec![ChatMessage::user(content)],
            temperature: 0.0,
            max_tokens: 1024,
            json_mode: false,
        }
    }

    /// System plus user turn.
    pub fn with_system(system: impl Into<String>, user: impl Into<String>) -> ChatRequest {
        ChatRequest {
            messages: vec![ChatMessage::system(system), ChatMessage::user(user)],
            temperature: 0.0,
            max_tokens: 1024,
            json_mode: false,
        }
    }

    pub fn json_mode(mut self, on: bool) -> ChatRequest {
        self.json_mode = on;
        self
    }

    pub fn content_of(&self, role: &str) -> Option<&str> {
        self.messages
            .iter()
            .find(|m| m.role == role)
            .map(|m| m.content.as_str())
    }
}

/// Synchronous chat completion. Responses are untrusted text; parsing and
/// validation happen in the callers.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, req: &ChatRequest) -> std::result::Result<String, BackendError>;
    fn model(&self) -> &str;
}

/// Synchronous text embedding.
pub trait EmbeddingBackend: Send + Sync {
    fn embed(&self, text: &str) -> std::result::Result<Vec<f64>, BackendError>;
    fn model(&self) -> &str;
}

/// Declarative backend selection for config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendConfig {
    Mock {
        seed: u64,
        #[serde(default)]
        model: Option<String>,
    },
    Http {
        base_url: String,
        model: String,
        /// Name of the environment variable holding the API key. Secrets
        /// never appear in config files.
        #[serde(default)]
        api_key_env: Option<String>,
        #[serde(default)]
        timeout_secs: Option<u64>,
    },
}

/// Instantiate a chat backend from config.
pub fn build_chat_backend(cfg: &BackendConfig) -> Result<Arc<dyn ChatBackend>> {
    match cfg {
        BackendConfig::Mock { seed, model } => {
            let mut backend = mock::MockChatBackend::new(*seed);
            if let Some(m) = model {
                backend = backend.with_model(m);
            }
            Ok(Arc::new(backend))
        }
        BackendConfig::Http {
            base_url,
            model,
            api_key_env,
            timeout_secs,
        } => Ok(Arc::new(http::HttpChatBackend::new(
            base_url,
            model,
            api_key_env.as_deref(),
            timeout_secs.unwrap_or(60),
        )?)),
    }
}

/// Instantiate an embedding backend from config. The mock embedder derives
/// vectors from token hashes, so its seed is informational only.
pub fn build_embedding_backend(cfg: &BackendConfig) -> Result<Arc<dyn EmbeddingBackend>> {
    match cfg {
        BackendConfig::Mock { model, .. } => {
            let mut backend = mock::MockEmbeddingBackend::new();
            if let Some(m) = model {
                backend = backend.with_model(m);
            }
            Ok(Arc::new(backend))
        }
        BackendConfig::Http {
            base_url,
            model,
            api_key_env,
            timeout_secs,
        } => Ok(Arc::new(http::HttpEmbeddingBackend::new(
            base_url,
            model,
            api_key_env.as_deref(),
            timeout_secs.unwrap_or(60),
        )?)),
    }
}

/// FNV-1a 64-bit. Used instead of the std hasher because the latter is
/// randomized per process, which would break cross-run mock determinism.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Mix a request (and the serving model name) into a single seed lane.
pub(crate) fn request_fingerprint(model: &str, req: &ChatRequest) -> u64 {
    let mut buf = Vec::new();
    buf.extend_from_slice(model.as_bytes());
    buf.push(0xff);
    for m in &req.messages {
        buf.extend_from_slice(m.role.as_bytes());
        buf.push(0xfe);
        buf.extend_from_slice(m.content.as_bytes());
        buf.push(0xfd);
    }
    buf.extend_from_slice(&req.temperature.to_bits().to_le_bytes());
    buf.extend_from_slice(&req.max_tokens.to_le_bytes());
    buf.push(req.json_mode as u8);
    fnv1a64(&buf)
}
