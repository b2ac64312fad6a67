use serde::{Deserialize, Serialize};

use super::cost::{compute_cost, NanoUsd};
use super::prompt::{parse_answer, FailureKind, ParsedAnswer};
use super::query::QueryOutcome;
use super::roster::ModelSpec;
use super::Result;
use crate::benchmark::QuestionRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalStatus {
    Answered,
    ParseFailure,
    ProviderError,
    Timeout,
}

impl FinalStatus {
    /// Provider errors and timeouts; parse failures are answers.
    pub fn is_error(self) -> bool {
        matches!(self, FinalStatus::ProviderError | FinalStatus::Timeout)
    }
}

/// Final outcome of one (model, question) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub model_id: String,
    pub question_id: String,
    pub raw_text: Option<String>,
    pub parsed: ParsedAnswer,
    pub correct: bool,
    pub latency_secs: f64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub cost_nano_usd: NanoUsd,
    pub attempts: u32,
    pub final_status: FinalStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResponseRecord {
    pub fn key(&self) -> (&str, &str) {
        (&self.model_id, &self.question_id)
    }
}

/// Parses and prices a query outcome. Usage and cost are those of the final
/// attempt.
pub fn score_response(question: &QuestionRecord, model: &ModelSpec, outcome: QueryOutcome) -> Result<ResponseRecord> {
    let base = ResponseRecord {
        model_id: model.model_id.clone(),
        question_id: question.id.clone(),
        raw_text: None,
        parsed: ParsedAnswer::Failure(FailureKind::NoResponse),
        correct: false,
        latency_secs: outcome.latency_secs,
        prompt_tokens: 0,
        completion_tokens: 0,
        cost_nano_usd: NanoUsd::ZERO,
        attempts: outcome.attempts,
        final_status: outcome.status,
        error: outcome.error,
    };
    let Some(reply) = outcome.reply else {
        return Ok(base);
    };
    let parsed = parse_answer(&reply.text, &question.allowed_letters());
    let correct = parsed.letter() == Some(question.answer_letter());
    let cost = compute_cost(reply.prompt_tokens as i64, reply.completion_tokens as i64, model)?;
    Ok(ResponseRecord {
        raw_text: Some(reply.text),
        parsed,
        correct,
        prompt_tokens: reply.prompt_tokens,
        completion_tokens: reply.completion_tokens,
        cost_nano_usd: cost,
        final_status: match parsed {
            ParsedAnswer::Letter(_) => FinalStatus::Answered,
            ParsedAnswer::Failure(_) => FinalStatus::ParseFailure,
        },
        ..base
    })
}
