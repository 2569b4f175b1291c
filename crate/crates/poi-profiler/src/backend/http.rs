//! HTTP clients for chat-completion and embeddings endpoints.
//!
//! The wire format is the common one: `POST {base}/chat/completions` with a
//! model name, message list, temperature, and optional JSON response mode;
//! `POST {base}/embeddings` with a model name and input text. API keys are
//! read from an environment variable named in the config, never from the
//! config file itself.

use std::time::Duration;

use serde_json::{json, Value};

use super::{ChatBackend, ChatRequest, EmbeddingBackend};
use crate::error::BackendError;

fn build_client(timeout_secs: u64) -> Result<reqwest::blocking::Client, BackendError> {
    reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(timeout_secs))
        .build()
        .map_err(|e| BackendError::Transport(e.to_string()))
}

fn resolve_key(api_key_env: Option<&str>) -> Result<Option<String>, BackendError> {
    match api_key_env {
        None => Ok(None),
        Some(name) => std::env::var(name)
            .map(Some)
            .map_err(|_| BackendError::MissingApiKey(name.to_string())),
    }
}

fn post_json(
    client: &reqwest::blocking::Client,
    url: &str,
    api_key: Option<&str>,
    body: &Value,
) -> Result<Value, BackendError> {
    let mut req = client.post(url).json(body);
    if let Some(key) = api_key {
        req = req.bearer_auth(key);
    }
    let resp = req
        .send()
        .map_err(|e| BackendError::Transport(e.to_string()))?;
    let status = resp.status().as_u16();
    let text = resp
        .text()
        .map_err(|e| BackendError::Transport(e.to_string()))?;
    if !(200..300).contains(&status) {
        let mut body = text;
        body.truncate(500);
        return Err(BackendError::Status { status, body });
    }
    serde_json::from_str(&text).map_err(|e| BackendError::MalformedResponse(e.to_string()))
}

/// Chat-completion client.
#[derive(Debug)]
pub struct HttpChatBackend {
    client: reqwest::blocking::Client,
    base_url: String,
    model: String,
    api_key: Option<String>,
}

impl HttpChatBackend {
    pub fn new(
        base_url: &str,
        model: &str,
        api_key_env: Option<&str>,
        timeout_secs: u64,
    ) -> Result<HttpChatBackend, BackendError> {
        Ok(HttpChatBackend {
            client: build_client(timeout_secs)?,
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.to_string(),
            api_key: resolve_key(api_key_env)?,
        })
    }
}

impl ChatBackend for HttpChatBackend {
    fn complete(&self, req: &ChatRequest) -> Result<String, BackendError> {
        let mut body = json!({
            "model": self.model,
            "messages": req.messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        });
        if req.json_mode {
            body["response_format"] = json!({"type": "json_object"});
        }
        let url = format!("{}/chat/completions", self.base_url);
        let resp = post_json(&self.client, &url, self.api_key.as_deref(), &body)?;
        resp["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| {
                BackendError::MalformedResponse(
                    "missing choices[0].message.content".to_string(),
                )
            })
    }

    fn model(&self) -> &str {
        &self.model
    }
}

/// Embeddings client.
#[derive(Debug)]
pub struct HttpEmbeddingBackend {
    client: reqwest::blocking::Client,
    base_url: String,
    model: String,
    api_key: Option<String>,
}

impl HttpEmbeddingBackend {
    pub fn new(
        base_url: &str,
        model: &str,
        api_key_env: Option<&str>,
        timeout_secs: u64,
    ) -> Result<HttpEmbeddingBackend, BackendError> {
        Ok(HttpEmbeddingBackend {
            client: build_client(timeout_secs)?,
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.to_string(),
            api_key: resolve_key(api_key_env)?,
        })
    }
}

impl EmbeddingBackend for HttpEmbeddingBackend {
    fn embed(&self, text: &str) -> Result<Vec<f64>, BackendError> {
        let body = json!({"model": self.model, "input": text});
        let url = format!("{}/embeddings", self.base_url);
        let resp = post_json(&self.client, &url, self.api_key.as_deref(), &body)?;
        resp["data"][0]["embedding"]
            .as_array()
            .map(|arr| arr.iter().filter_map(Value::as_f64).collect())
            .ok_or_else(|| {
                BackendError::MalformedResponse("missing data[0].embedding".to_string())
            })
    }

    fn model(&self) -> &str {
        &self.model
    }
}
