//! Backend for an OpenAI-compatible `/chat/completions` endpoint.

use std::time::Duration;

use serde_json::{json, Value};

use super::backend::{BackendError, LmBackend, Prompt, Role};

pub const ENV_ENDPOINT: &str = "TASKLEARN_LM_ENDPOINT";
pub const ENV_MODEL: &str = "TASKLEARN_LM_MODEL";
pub const ENV_API_KEY: &str = "TASKLEARN_LM_API_KEY";

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    /// Base URL; `/chat/completions` is appended.
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
}

impl RemoteConfig {
    /// Reads the endpoint, model and key from the environment.
    pub fn from_env() -> Result<Self, String> {
        let endpoint =
            std::env::var(ENV_ENDPOINT).map_err(|_| format!("{ENV_ENDPOINT} is not set"))?;
        let model = std::env::var(ENV_MODEL).unwrap_or_else(|_| "gpt-4".to_string());
        Ok(Self {
            endpoint,
            model,
            api_key: std::env::var(ENV_API_KEY).ok(),
            timeout: Duration::from_secs(60),
        })
    }
}

pub struct RemoteBackend {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(Self { config, client })
    }

    fn body(&self, prompt: &Prompt) -> Value {
        let messages: Vec<Value> = prompt
            .messages
            .iter()
            .map(|m| {
                let role = match m.role {
                    Role::System => "system",
                    Role::User => "user",
                    Role::Assistant => "assistant",
                };
                json!({"role": role, "content": m.content})
            })
            .collect();
        json!({"model": self.config.model, "messages": messages, "temperature": 0})
    }
}

impl LmBackend for RemoteBackend {
    fn kind(&self) -> &str {
        "remote"
    }

    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError> {
        let url = format!("{}/chat/completions", self.config.endpoint.trim_end_matches('/'));
        let mut req = self.client.post(url).json(&self.body(prompt));
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() {
                BackendError::Timeout
            } else {
                BackendError::Transport(e.to_string())
            }
        })?;
        let status = resp.status();
        if !status.is_success() {
            return Err(BackendError::Transport(format!("HTTP {status}")));
        }
        let body: Value = resp
            .json()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        body.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| BackendError::Transport("response has no message content".into()))
    }
}
