use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::InferenceConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reasoning {
    pub effort: String,
}

/// Body of a chat-completions request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub reasoning: Reasoning,
}

impl ChatRequest {
    /// A single user turn carrying `prompt`.
    pub fn new(model: &str, prompt: String, config: &InferenceConfig) -> Self {
        ChatRequest {
            model: model.to_string(),
            messages: vec![ChatMessage { role: "user".into(), content: prompt }],
            temperature: config.temperature,
            max_tokens: config.max_tokens,
            reasoning: Reasoning { effort: config.reasoning_effort.clone() },
        }
    }

    pub fn prompt(&self) -> &str {
        self.messages.last().map_or("", |m| m.content.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatReply {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("empty response body")]
    EmptyBody,
    #[error("unreadable response: {0}")]
    Malformed(String),
}

impl ProviderError {
    pub fn is_retryable(&self) -> bool {
        match self {
            ProviderError::Transport(_) | ProviderError::EmptyBody => true,
            ProviderError::Status { status, .. } => *status == 429 || (500..600).contains(status),
            ProviderError::Malformed(_) => false,
        }
    }
}

/// One attempt against a chat endpoint. Retries and timeouts belong to the
/// caller.
#[async_trait]
pub trait ChatProvider: Send + Sync {
    async fn complete(&self, request: &ChatRequest) -> Result<ChatReply, ProviderError>;
}

/// OpenAI-compatible `POST {base}/chat/completions` with a bearer token.
#[derive(Debug, Clone)]
pub struct HttpProvider {
    client: reqwest::Client,
    endpoint: String,
    token: Option<String>,
}

pub const BASE_URL_ENV: &str = "TOPICIRT_BASE_URL";
pub const TOKEN_ENV: &str = "TOPICIRT_API_KEY";

impl HttpProvider {
    pub fn new(base_url: &str, token: Option<String>) -> Self {
        HttpProvider {
            client: reqwest::Client::new(),
            endpoint: format!("{}/chat/completions", base_url.trim_end_matches('/')),
            token,
        }
    }

    /// Reads the base URL and token from the environment.
    pub fn from_env() -> Option<Self> {
        let base = std::env::var(BASE_URL_ENV).ok()?;
        Some(HttpProvider::new(&base, std::env::var(TOKEN_ENV).ok()))
    }
}

#[derive(Deserialize)]
struct WireResponse {
    #[serde(default)]
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

/// Parses a chat-completions response body. A missing or empty message is
/// [`ProviderError::EmptyBody`].
pub(crate) fn parse_completion(body: &str) -> Result<ChatReply, ProviderError> {
    if body.trim().is_empty() {
        return Err(ProviderError::EmptyBody);
    }
    let wire: WireResponse = serde_json::from_str(body).map_err(|e| ProviderError::Malformed(e.to_string()))?;
    let text = wire.choices.into_iter().next().and_then(|c| c.message.content).unwrap_or_default();
    if text.is_empty() {
        return Err(ProviderError::EmptyBody);
    }
    let usage = wire.usage.unwrap_or(WireUsage { prompt_tokens: 0, completion_tokens: 0 });
    Ok(ChatReply { text, prompt_tokens: usage.prompt_tokens, completion_tokens: usage.completion_tokens })
}

#[async_trait]
impl ChatProvider for HttpProvider {
    async fn complete(&self, request: &ChatRequest) -> Result<ChatReply, ProviderError> {
        let mut req = self.client.post(&self.endpoint).json(request);
        if let Some(token) = &self.token {
            req = req.bearer_auth(token);
        }
        let resp = req.send().await.map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = resp.status();
        let body = resp.text().await.map_err(|e| ProviderError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(ProviderError::Status { status: status.as_u16(), body });
        }
        parse_completion(&body)
    }
}
