use serde::{Deserialize, Serialize};

use super::{HarnessError, Result};
use crate::benchmark::{option_letter, QuestionRecord, MAX_OPTIONS};

/// Builds the exam prompt. Lines are joined by `\n` and the text ends with
/// `Answer:` and no trailing newline.
pub fn render_prompt(question: &QuestionRecord) -> Result<String> {
    let n = question.options.len();
    if n > MAX_OPTIONS || n < 2 {
        return Err(HarnessError::UnsupportedQuestion {
            id: question.id.clone(),
            reason: format!("{n} options; the prompt supports 2 to {MAX_OPTIONS}"),
        });
    }
    let letters: Vec<String> = (0..n).map(|i| option_letter(i).to_string()).collect();
    let mut lines = vec![
        "You are taking a closed-book multiple-choice medical exam.".to_string(),
        format!("Answer with ONLY ONE LETTER from [{}] corresponding", letters.join(", ")),
        "to the single best option, and NOTHING ELSE.".to_string(),
        "Do not include any words, punctuation, or explanation.".to_string(),
        format!("Question: {}", question.stem),
        "Options:".to_string(),
    ];
    for (letter, option) in letters.iter().zip(&question.options) {
        lines.push(format!("{letter}. {option}"));
    }
    lines.push("Answer:".to_string());
    Ok(lines.join("\n"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// Text arrived but was not exactly one allowed letter.
    Deviation,
    /// No usable reply after every attempt.
    NoResponse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParsedAnswer {
    Letter(char),
    Failure(FailureKind),
}

impl ParsedAnswer {
    pub fn letter(self) -> Option<char> {
        match self {
            ParsedAnswer::Letter(c) => Some(c),
            ParsedAnswer::Failure(_) => None,
        }
    }
}

/// Strict extraction: after trimming, the reply must be a single character
/// matching an allowed letter in either case. The letter is uppercased.
pub fn parse_answer(raw: &str, allowed: &[char]) -> ParsedAnswer {
    let mut chars = raw.trim().chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        let upper = c.to_ascii_uppercase();
        if allowed.iter().any(|a| a.to_ascii_uppercase() == upper) {
            return ParsedAnswer::Letter(upper);
        }
    }
    ParsedAnswer::Failure(FailureKind::Deviation)
}
