use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::question::{QuestionLine, QuestionRecord};
use super::{BenchmarkError, Result};

/// A record that could not be normalized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestOutcome {
    /// Accepted records in file order, then line order.
    pub pool: Vec<QuestionRecord>,
    pub rejects: Vec<Reject>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| BenchmarkError::Io { path: path.to_path_buf(), source })
}

fn parse_line(line: &str) -> std::result::Result<QuestionRecord, Reject> {
    let value: serde_json::Value = serde_json::from_str(line)
        .map_err(|e| Reject { id: None, reason: format!("not valid JSON: {e}") })?;
    let id = value.get("id").and_then(|v| v.as_str()).map(str::to_owned);
    let parsed: QuestionLine = serde_json::from_value(value)
        .map_err(|e| Reject { id: id.clone(), reason: format!("schema: {e}") })?;
    QuestionRecord::try_from(parsed).map_err(|e| match e {
        BenchmarkError::InvalidQuestion { reason, .. } => Reject { id, reason },
        other => Reject { id, reason: other.to_string() },
    })
}

/// Reads line-delimited question files into one pool.
///
/// Blank lines are skipped. Records that fail the schema land in `rejects`;
/// an id seen twice, in the same or another file, aborts ingestion.
pub fn ingest_questions<P: AsRef<Path>>(paths: &[P]) -> Result<IngestOutcome> {
    let mut out = IngestOutcome::default();
    let mut seen: HashMap<String, PathBuf> = HashMap::new();
    for path in paths {
        let path = path.as_ref();
        for line in read(path)?.lines() {
            if line.trim().is_empty() {
                continue;
            }
            match parse_line(line) {
                Ok(q) => {
                    if let Some(first) = seen.get(&q.id) {
                        return Err(BenchmarkError::DuplicateId {
                            id: q.id,
                            first: first.display().to_string(),
                            second: path.display().to_string(),
                        });
                    }
                    seen.insert(q.id.clone(), path.to_path_buf());
                    out.pool.push(q);
                }
                Err(reject) => out.rejects.push(reject),
            }
        }
    }
    Ok(out)
}

/// Strict reader for files this crate wrote: any bad line is an error.
pub fn read_jsonl_questions(path: &Path) -> Result<Vec<QuestionRecord>> {
    let mut questions = Vec::new();
    for (n, line) in read(path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let q = parse_line(line).map_err(|r| BenchmarkError::Malformed {
            path: path.to_path_buf(),
            reason: format!("line {}: {}", n + 1, r.reason),
        })?;
        questions.push(q);
    }
    Ok(questions)
}
