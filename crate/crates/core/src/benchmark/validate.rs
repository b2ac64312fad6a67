use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::sample::BenchmarkSet;
use crate::topic::Topic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    Imbalance,
    DuplicateId,
    PossibleDuplicate,
    Unlabeled,
    KeyOutOfRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `"ok"` when there are no findings, else `"findings"`.
    pub status: String,
    pub findings: Vec<Finding>,
    pub topic_counts: BTreeMap<Topic, usize>,
    /// Number of questions by option count.
    pub option_histogram: BTreeMap<usize, usize>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has(&self, kind: FindingKind) -> bool {
        self.findings.iter().any(|f| f.kind == kind)
    }
}

fn normalize_stem(stem: &str) -> String {
    stem.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

/// Checks balance against the manifest's per-topic target, id and stem
/// uniqueness, labels and answer keys.
pub fn validate_benchmark(set: &BenchmarkSet) -> ValidationReport {
    let mut findings = Vec::new();
    let mut topic_counts: BTreeMap<Topic, usize> = Topic::ALL.iter().map(|t| (*t, 0)).collect();
    let mut option_histogram = BTreeMap::new();
    let mut by_id: BTreeMap<&str, usize> = BTreeMap::new();
    let mut by_stem: HashMap<String, Vec<String>> = HashMap::new();
    let mut unlabeled = Vec::new();
    let mut bad_keys = Vec::new();

    for q in &set.questions {
        match q.topic {
            Some(t) => *topic_counts.get_mut(&t).unwrap() += 1,
            None => unlabeled.push(q.id.clone()),
        }
        *option_histogram.entry(q.options.len()).or_insert(0) += 1;
        *by_id.entry(&q.id).or_insert(0) += 1;
        by_stem.entry(normalize_stem(&q.stem)).or_default().push(q.id.clone());
        if q.answer_key >= q.options.len() {
            bad_keys.push(q.id.clone());
        }
    }

    let target = set.manifest.per_topic;
    for (t, &n) in &topic_counts {
        if n != target {
            findings.push(Finding {
                kind: FindingKind::Imbalance,
                detail: format!("{t} has {n} questions, expected {target}"),
                ids: Vec::new(),
            });
        }
    }
    let dup_ids: Vec<String> = by_id.iter().filter(|(_, &n)| n > 1).map(|(id, _)| id.to_string()).collect();
    if !dup_ids.is_empty() {
        findings.push(Finding {
            kind: FindingKind::DuplicateId,
            detail: format!("{} ids occur more than once", dup_ids.len()),
            ids: dup_ids,
        });
    }
    let mut dup_stems: Vec<Vec<String>> = by_stem.into_values().filter(|ids| ids.len() > 1).collect();
    dup_stems.sort();
    for mut ids in dup_stems {
        ids.sort();
        ids.dedup();
        if ids.len() > 1 {
            findings.push(Finding {
                kind: FindingKind::PossibleDuplicate,
                detail: "identical stem text".into(),
                ids,
            });
        }
    }
    if !unlabeled.is_empty() {
        findings.push(Finding { kind: FindingKind::Unlabeled, detail: "questions without a topic".into(), ids: unlabeled });
    }
    if !bad_keys.is_empty() {
        findings.push(Finding { kind: FindingKind::KeyOutOfRange, detail: "answer key out of range".into(), ids: bad_keys });
    }

    let status = if findings.is_empty() { "ok" } else { "findings" }.to_string();
    ValidationReport { status, findings, topic_counts, option_histogram }
}
