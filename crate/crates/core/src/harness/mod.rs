//! Response collection under a fixed inference protocol.

mod collect;
mod config;
mod cost;
mod eligibility;
mod journal;
mod matrices;
mod prompt;
mod provider;
mod query;
mod record;
mod roster;
mod simulated;

pub use collect::{run_collection, CollectionSummary};
pub use config::InferenceConfig;
pub use cost::{compute_cost, NanoUsd};
pub use eligibility::{eligibility_check, Eligibility, EligibilityStatus};
pub use journal::{JournalHeader, RunJournal, JOURNAL_VERSION};
pub use matrices::{build_response_matrices, telemetry, AccuracyTable, ErrorPolicy, ResponseMatrices, Telemetry};
pub use prompt::{parse_answer, render_prompt, ParsedAnswer, FailureKind};
pub use provider::{
    ChatMessage, ChatProvider, ChatReply, ChatRequest, HttpProvider, ProviderError, Reasoning, BASE_URL_ENV, TOKEN_ENV,
};
pub use query::{backoff_delay, query_model, QueryOutcome};
pub use record::{score_response, FinalStatus, ResponseRecord};
pub use roster::{load_roster, ModelMetadata, ModelSpec, SimulationProfile};
pub use simulated::SimulatedProvider;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Malformed { path: PathBuf, line: usize, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported question {id}: {reason}")]
    UnsupportedQuestion { id: String, reason: String },
    #[error("journal was started for benchmark {journal}, not {benchmark}")]
    ManifestMismatch { journal: String, benchmark: String },
    #[error("journal was started with a different inference config")]
    ConfigMismatch,
    #[error("journal already holds a final record for ({model_id}, {question_id})")]
    DuplicateRecord { model_id: String, question_id: String },
    #[error("model {model_id} is missing {missing} of {expected} records")]
    MissingRecords { model_id: String, missing: usize, expected: usize },
    #[error("journal record references unknown question {0}")]
    UnknownQuestion(String),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
