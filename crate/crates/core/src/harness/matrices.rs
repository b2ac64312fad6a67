use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cost::NanoUsd;
use super::journal::RunJournal;
use super::{HarnessError, Result};
use crate::benchmark::BenchmarkSet;
use crate::irt::{Cell, ResponseMatrix};
use crate::topic::Topic;

/// What a provider error or timeout becomes in a response matrix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorPolicy {
    #[default]
    Incorrect,
    Missing,
}

/// Percent correct over observed cells.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub by_topic: BTreeMap<String, BTreeMap<Topic, f64>>,
    pub overall: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMatrices {
    /// Topics with at least one question; rows follow the `eligible` order,
    /// columns the benchmark order.
    pub by_topic: BTreeMap<Topic, ResponseMatrix>,
    pub accuracy: AccuracyTable,
    /// Provider errors and timeouts per model, whatever the policy made of them.
    pub error_cells: BTreeMap<String, usize>,
}

fn percent(correct: usize, observed: usize) -> f64 {
    if observed == 0 {
        0.0
    } else {
        100.0 * correct as f64 / observed as f64
    }
}

/// Partitions the journal into one model × item matrix per topic.
///
/// Every eligible model must have a final record for every question.
pub fn build_response_matrices(
    journal: &RunJournal,
    benchmark: &BenchmarkSet,
    eligible: &[String],
    policy: ErrorPolicy,
) -> Result<ResponseMatrices> {
    for m in eligible {
        let missing = benchmark.questions.iter().filter(|q| !journal.contains(m, &q.id)).count();
        if missing > 0 {
            return Err(HarnessError::MissingRecords {
                model_id: m.clone(),
                missing,
                expected: benchmark.questions.len(),
            });
        }
    }

    let mut by_topic = BTreeMap::new();
    let mut accuracy = AccuracyTable::default();
    let mut error_cells: BTreeMap<String, usize> = eligible.iter().map(|m| (m.clone(), 0)).collect();
    let mut totals: BTreeMap<&str, (usize, usize)> = BTreeMap::new();

    for topic in Topic::ALL {
        let questions: Vec<_> = benchmark.questions.iter().filter(|q| q.topic == Some(topic)).collect();
        if questions.is_empty() {
            continue;
        }
        let mut rows = Vec::with_capacity(eligible.len());
        for m in eligible {
            let mut row = Vec::with_capacity(questions.len());
            let (mut correct, mut observed) = (0, 0);
            for q in &questions {
                let r = journal.get(m, &q.id).expect("coverage checked above");
                let cell = if r.final_status.is_error() {
                    *error_cells.get_mut(m).unwrap() += 1;
                    match policy {
                        ErrorPolicy::Incorrect => Cell::Incorrect,
                        ErrorPolicy::Missing => Cell::Missing,
                    }
                } else {
                    Cell::from_correct(r.correct)
                };
                if cell.is_observed() {
                    observed += 1;
                    correct += usize::from(cell == Cell::Correct);
                }
                row.push(cell);
            }
            accuracy.by_topic.entry(m.clone()).or_default().insert(topic, percent(correct, observed));
            let t = totals.entry(m).or_default();
            t.0 += correct;
            t.1 += observed;
            rows.push(row);
        }
        let item_ids = questions.iter().map(|q| q.id.clone()).collect();
        let matrix = ResponseMatrix::from_rows(eligible.to_vec(), item_ids, rows)
            .map_err(|e| HarnessError::InvalidArgument(e.to_string()))?;
        by_topic.insert(topic, matrix);
    }
    for (m, (correct, observed)) in totals {
        accuracy.overall.insert(m.to_string(), percent(correct, observed));
    }
    Ok(ResponseMatrices { by_topic, accuracy, error_cells })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    pub questions: usize,
    pub mean_latency_secs: f64,
    pub total_cost: NanoUsd,
}

/// Per-model mean latency and exact total cost over every journal record.
pub fn telemetry(journal: &RunJournal) -> BTreeMap<String, Telemetry> {
    let mut acc: BTreeMap<String, (usize, f64, NanoUsd)> = BTreeMap::new();
    for r in journal.records() {
        let e = acc.entry(r.model_id.clone()).or_default();
        e.0 += 1;
        e.1 += r.latency_secs;
        e.2 += r.cost_nano_usd;
    }
    acc.into_iter()
        .map(|(m, (n, lat, cost))| {
            (m, Telemetry { questions: n, mean_latency_secs: lat / n as f64, total_cost: cost })
        })
        .collect()
}
