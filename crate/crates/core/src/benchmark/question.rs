use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BenchmarkError, Result};
use crate::topic::Topic;

pub const MAX_OPTIONS: usize = 10;

/// Letter for a zero-based option index: 0 → 'A'.
pub fn option_letter(index: usize) -> char {
    (b'A' + index as u8) as char
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    MedQa,
    MedMcqa,
    MedXpertQa,
    Other(String),
}

impl Source {
    pub fn as_str(&self) -> &str {
        match self {
            Source::MedQa => "MedQA",
            Source::MedMcqa => "MedMCQA",
            Source::MedXpertQa => "MedXpertQA",
            Source::Other(name) => name,
        }
    }
}

impl From<&str> for Source {
    fn from(s: &str) -> Self {
        match s {
            "MedQA" => Source::MedQa,
            "MedMCQA" => Source::MedMcqa,
            "MedXpertQA" => Source::MedXpertQa,
            other => Source::Other(other.to_string()),
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Source {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Source {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Source::from(s.as_str()))
    }
}

/// One multiple-choice item.
///
/// On disk each record is a single JSON line with the fields
/// `{id, source, topic?, question, options, answer}` where `answer` is the
/// key's letter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "QuestionLine", into = "QuestionLine")]
pub struct QuestionRecord {
    pub id: String,
    pub source: Source,
    pub topic: Option<Topic>,
    pub stem: String,
    pub options: Vec<String>,
    /// Zero-based index into `options`.
    pub answer_key: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct QuestionLine {
    pub id: String,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<String>,
    pub question: String,
    pub options: Vec<String>,
    pub answer: String,
}

impl From<QuestionRecord> for QuestionLine {
    fn from(q: QuestionRecord) -> Self {
        QuestionLine {
            id: q.id,
            source: q.source,
            topic: q.topic.map(|t| t.abbr().to_string()),
            question: q.stem,
            answer: option_letter(q.answer_key).to_string(),
            options: q.options,
        }
    }
}

impl TryFrom<QuestionLine> for QuestionRecord {
    type Error = BenchmarkError;

    fn try_from(line: QuestionLine) -> Result<Self> {
        let fail = |reason: String| BenchmarkError::InvalidQuestion { id: line.id.clone(), reason };
        if line.id.trim().is_empty() {
            return Err(fail("blank id".into()));
        }
        if line.question.trim().is_empty() {
            return Err(fail("blank question text".into()));
        }
        if line.options.len() < 2 || line.options.len() > MAX_OPTIONS {
            return Err(fail(format!("{} options (need 2 to {MAX_OPTIONS})", line.options.len())));
        }
        if let Some(i) = line.options.iter().position(|o| o.trim().is_empty()) {
            return Err(fail(format!("option {} is blank", option_letter(i))));
        }
        let mut chars = line.answer.trim().chars();
        let key = match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_uppercase() => c as usize - 'A' as usize,
            _ => return Err(fail(format!("answer {:?} is not a single capital letter", line.answer))),
        };
        if key >= line.options.len() {
            return Err(fail("key out of range".into()));
        }
        let topic = match line.topic.as_deref() {
            None | Some("") => None,
            Some(label) => Some(label.parse::<Topic>().map_err(|e| fail(e.to_string()))?),
        };
        Ok(QuestionRecord {
            id: line.id,
            source: line.source,
            topic,
            stem: line.question,
            options: line.options,
            answer_key: key,
        })
    }
}

impl QuestionRecord {
    pub fn answer_letter(&self) -> char {
        option_letter(self.answer_key)
    }

    pub fn allowed_letters(&self) -> Vec<char> {
        (0..self.options.len()).map(option_letter).collect()
    }
}
