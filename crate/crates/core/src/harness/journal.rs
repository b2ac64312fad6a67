use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::config::InferenceConfig;
use super::record::ResponseRecord;
use super::{HarnessError, Result};

pub const JOURNAL_VERSION: u32 = 1;

/// First line of every journal. Never rewritten.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalHeader {
    pub journal_version: u32,
    pub benchmark_sha256: String,
    pub config: InferenceConfig,
    /// Config fields that differ from the protocol defaults.
    pub overrides: Vec<String>,
    pub started_at: DateTime<Utc>,
}

impl JournalHeader {
    pub fn new(benchmark_sha256: &str, config: InferenceConfig, started_at: DateTime<Utc>) -> Self {
        JournalHeader {
            journal_version: JOURNAL_VERSION,
            benchmark_sha256: benchmark_sha256.to_string(),
            overrides: config.overrides().into_iter().map(String::from).collect(),
            config,
            started_at,
        }
    }
}

/// Append-only line-delimited log: a header line, then one
/// [`ResponseRecord`] per completed pair. Holds at most one record per
/// (model, question).
#[derive(Debug)]
pub struct RunJournal {
    path: PathBuf,
    header: JournalHeader,
    records: Vec<ResponseRecord>,
    index: HashMap<(String, String), usize>,
    file: File,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

impl RunJournal {
    /// Starts a new journal; fails if `path` already exists.
    pub fn create(path: &Path, header: JournalHeader) -> Result<Self> {
        let mut file = OpenOptions::new().write(true).create_new(true).open(path).map_err(io_err(path))?;
        let line = serde_json::to_string(&header).expect("header serializes") + "\n";
        file.write_all(line.as_bytes()).map_err(io_err(path))?;
        Ok(RunJournal { path: path.to_path_buf(), header, records: Vec::new(), index: HashMap::new(), file })
    }

    /// Reopens a journal for appending.
    ///
    /// An unterminated last line is a crash artifact: it is kept if it parses
    /// and cut off otherwise. Any other bad line is an error.
    pub fn open(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        let text = String::from_utf8_lossy(&bytes);
        let malformed = |line: usize, reason: String| HarnessError::Malformed { path: path.to_path_buf(), line, reason };

        let terminated = text.ends_with('\n');
        let mut lines: Vec<&str> = text.split('\n').collect();
        if terminated {
            lines.pop();
        }
        let header_line = lines.first().copied().unwrap_or("");
        let header: JournalHeader =
            serde_json::from_str(header_line).map_err(|e| malformed(1, format!("bad header: {e}")))?;
        if header.journal_version != JOURNAL_VERSION {
            return Err(malformed(1, format!("unsupported journal_version {}", header.journal_version)));
        }
        if lines.len() == 1 && !terminated {
            return Err(malformed(1, "header line is not terminated".into()));
        }

        let mut records = Vec::new();
        let mut index = HashMap::new();
        let mut keep_len = bytes.len();
        let mut offset = header_line.len() + 1;
        let body = &lines[1..];
        for (i, line) in body.iter().enumerate() {
            let last_unterminated = !terminated && i + 1 == body.len();
            if line.trim().is_empty() {
                offset += line.len() + 1;
                continue;
            }
            let rec: ResponseRecord = match serde_json::from_str(line) {
                Ok(r) => r,
                Err(_) if last_unterminated => {
                    keep_len = offset;
                    break;
                }
                Err(e) => return Err(malformed(i + 2, e.to_string())),
            };
            let key = (rec.model_id.clone(), rec.question_id.clone());
            if index.insert(key, records.len()).is_some() {
                return Err(HarnessError::DuplicateRecord { model_id: rec.model_id, question_id: rec.question_id });
            }
            records.push(rec);
            offset += line.len() + 1;
        }

        let file = OpenOptions::new().write(true).open(path).map_err(io_err(path))?;
        if keep_len < bytes.len() {
            file.set_len(keep_len as u64).map_err(io_err(path))?;
        }
        let mut file = OpenOptions::new().append(true).open(path).map_err(io_err(path))?;
        if !terminated && keep_len == bytes.len() {
            file.write_all(b"\n").map_err(io_err(path))?;
        }
        Ok(RunJournal { path: path.to_path_buf(), header, records, index, file })
    }

    /// Opens `path` if it exists, otherwise creates it with `header`.
    pub fn open_or_create(path: &Path, header: JournalHeader) -> Result<Self> {
        if path.exists() {
            Self::open(path)
        } else {
            Self::create(path, header)
        }
    }

    /// Writes one record as a single line. Refuses a second record for a pair.
    pub fn append(&mut self, record: ResponseRecord) -> Result<()> {
        let key = (record.model_id.clone(), record.question_id.clone());
        if self.index.contains_key(&key) {
            return Err(HarnessError::DuplicateRecord { model_id: key.0, question_id: key.1 });
        }
        let line = serde_json::to_string(&record).expect("record serializes") + "\n";
        self.file.write_all(line.as_bytes()).map_err(io_err(&self.path))?;
        self.index.insert(key, self.records.len());
        self.records.push(record);
        Ok(())
    }

    pub fn header(&self) -> &JournalHeader {
        &self.header
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn records(&self) -> &[ResponseRecord] {
        &self.records
    }

    pub fn get(&self, model_id: &str, question_id: &str) -> Option<&ResponseRecord> {
        self.index.get(&(model_id.to_string(), question_id.to_string())).map(|&i| &self.records[i])
    }

    pub fn contains(&self, model_id: &str, question_id: &str) -> bool {
        self.get(model_id, question_id).is_some()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
