use std::time::Duration;

use rand::Rng;
use tokio::time::Instant;

use super::config::InferenceConfig;
use super::provider::{ChatProvider, ChatReply, ChatRequest};
use super::record::FinalStatus;
use super::roster::ModelSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct QueryOutcome {
    /// Present only when `status` is answered.
    pub reply: Option<ChatReply>,
    pub attempts: u32,
    /// Wall-clock seconds of the final attempt.
    pub latency_secs: f64,
    /// [`FinalStatus::Answered`], [`FinalStatus::ProviderError`] or [`FinalStatus::Timeout`].
    pub status: FinalStatus,
    pub error: Option<String>,
}

/// Full-jitter wait before retry number `retry` (1 for the first retry),
/// given a uniform draw `u` in [0, 1).
pub fn backoff_delay(config: &InferenceConfig, retry: u32, u: f64) -> Duration {
    let cap = config.backoff_base_secs * config.backoff_factor.powi(retry.saturating_sub(1) as i32);
    Duration::from_secs_f64((u * cap).max(0.0))
}

/// Sends `prompt` to `model`, retrying transport errors, 429/5xx, empty
/// bodies and per-attempt timeouts up to `max_attempts` in total.
pub async fn query_model(
    provider: &dyn ChatProvider,
    model: &ModelSpec,
    prompt: String,
    config: &InferenceConfig,
) -> QueryOutcome {
    let request = ChatRequest::new(&model.model_id, prompt, config);
    let mut attempts = 0;
    loop {
        attempts += 1;
        let start = Instant::now();
        let result = tokio::time::timeout(config.attempt_timeout(), provider.complete(&request)).await;
        let latency_secs = start.elapsed().as_secs_f64();
        let (status, error, retryable) = match result {
            Ok(Ok(reply)) => {
                return QueryOutcome {
                    reply: Some(reply),
                    attempts,
                    latency_secs,
                    status: FinalStatus::Answered,
                    error: None,
                }
            }
            Ok(Err(e)) => (FinalStatus::ProviderError, e.to_string(), e.is_retryable()),
            Err(_) => (FinalStatus::Timeout, format!("no reply within {:?}", config.attempt_timeout()), true),
        };
        if !retryable || attempts >= config.max_attempts {
            return QueryOutcome { reply: None, attempts, latency_secs, status, error: Some(error) };
        }
        let u: f64 = rand::rng().random();
        tokio::time::sleep(backoff_delay(config, attempts, u)).await;
    }
}
