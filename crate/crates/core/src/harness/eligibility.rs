use serde::{Deserialize, Serialize};

use super::journal::RunJournal;
use super::record::FinalStatus;
use crate::benchmark::BenchmarkSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EligibilityStatus {
    Include,
    Exclude,
    /// Some benchmark questions have no final record yet.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Eligibility {
    pub model_id: String,
    pub status: EligibilityStatus,
    pub questions: usize,
    pub recorded: usize,
    pub provider_errors: usize,
    pub timeouts: usize,
    pub parse_failures: usize,
    pub reasons: Vec<String>,
}

/// A model stays in the cohort while provider errors plus timeouts are
/// strictly under 5% of the benchmark. Parse failures are wrong answers and
/// do not count.
pub fn eligibility_check(journal: &RunJournal, benchmark: &BenchmarkSet, model_id: &str) -> Eligibility {
    let mut e = Eligibility {
        model_id: model_id.to_string(),
        status: EligibilityStatus::Include,
        questions: benchmark.questions.len(),
        recorded: 0,
        provider_errors: 0,
        timeouts: 0,
        parse_failures: 0,
        reasons: Vec::new(),
    };
    for q in &benchmark.questions {
        let Some(r) = journal.get(model_id, &q.id) else { continue };
        e.recorded += 1;
        match r.final_status {
            FinalStatus::ProviderError => e.provider_errors += 1,
            FinalStatus::Timeout => e.timeouts += 1,
            FinalStatus::ParseFailure => e.parse_failures += 1,
            FinalStatus::Answered => {}
        }
    }
    if e.recorded < e.questions {
        e.status = EligibilityStatus::Indeterminate;
        e.reasons.push(format!("{} of {} questions have no final record", e.questions - e.recorded, e.questions));
        return e;
    }
    let failed = e.provider_errors + e.timeouts;
    if failed * 20 >= e.questions {
        e.status = EligibilityStatus::Exclude;
        e.reasons.push(format!(
            "error rate {:.1}% ({} provider errors, {} timeouts) is not below 5%",
            100.0 * failed as f64 / e.questions as f64,
            e.provider_errors,
            e.timeouts
        ));
    }
    e
}
