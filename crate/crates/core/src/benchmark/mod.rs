//! Question pools, topic labeling and the stratified benchmark draw.

mod classify;
mod ingest;
mod question;
mod sample;
mod validate;

pub use classify::{classify_pool, classify_topic, classification_prompt, ChatLabeler, PassthroughLabeler, TopicLabeler};
pub use ingest::{ingest_questions, read_jsonl_questions, IngestOutcome, Reject};
pub use question::{option_letter, QuestionRecord, Source, MAX_OPTIONS};
pub use sample::{stratified_sample, BenchmarkManifest, BenchmarkSet};
pub use validate::{validate_benchmark, Finding, FindingKind, ValidationReport};

use std::path::PathBuf;

use thiserror::Error;

use crate::topic::Topic;

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("question id {id:?} appears in both {first} and {second}")]
    DuplicateId { id: String, first: String, second: String },
    #[error("topic {topic} has {available} labeled questions, {shortfall} short of {required}")]
    Shortfall { topic: Topic, available: usize, required: usize, shortfall: usize },
    #[error("invalid question {id:?}: {reason}")]
    InvalidQuestion { id: String, reason: String },
    #[error("malformed benchmark file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("benchmark manifest hash {expected} does not match questions ({actual})")]
    HashMismatch { expected: String, actual: String },
    #[error("labeler failed: {0}")]
    Labeler(String),
}

pub type Result<T, E = BenchmarkError> = std::result::Result<T, E>;
