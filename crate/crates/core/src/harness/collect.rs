use futures::stream::{self, StreamExt};

use super::config::InferenceConfig;
use super::journal::RunJournal;
use super::prompt::render_prompt;
use super::provider::ChatProvider;
use super::query::query_model;
use super::record::{score_response, ResponseRecord};
use super::roster::ModelSpec;
use super::{HarnessError, Result};
use crate::benchmark::BenchmarkSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CollectionSummary {
    /// Pairs queried in this run.
    pub executed: usize,
    /// Pairs already final in the journal.
    pub skipped: usize,
}

/// Queries every (model, question) pair the journal lacks.
///
/// At most `parallelism` requests are in flight. Records reach the journal
/// one at a time from this task, in completion order; `on_record` sees each
/// one after it is written. The journal must have been started for this
/// benchmark and config.
pub async fn run_collection(
    benchmark: &BenchmarkSet,
    models: &[ModelSpec],
    provider: &dyn ChatProvider,
    journal: &mut RunJournal,
    config: &InferenceConfig,
    parallelism: usize,
    mut on_record: impl FnMut(&ResponseRecord),
) -> Result<CollectionSummary> {
    config.validate()?;
    if journal.header().benchmark_sha256 != benchmark.hash() {
        return Err(HarnessError::ManifestMismatch {
            journal: journal.header().benchmark_sha256.clone(),
            benchmark: benchmark.hash().to_string(),
        });
    }
    if &journal.header().config != config {
        return Err(HarnessError::ConfigMismatch);
    }
    for m in models {
        m.validate()?;
    }

    let mut pending = Vec::new();
    let mut skipped = 0;
    for model in models {
        for question in &benchmark.questions {
            if journal.contains(&model.model_id, &question.id) {
                skipped += 1;
            } else {
                pending.push((model, question, render_prompt(question)?));
            }
        }
    }

    let mut results = stream::iter(pending)
        .map(|(model, question, prompt)| async move {
            let outcome = query_model(provider, model, prompt, config).await;
            score_response(question, model, outcome)
        })
        .buffer_unordered(parallelism.max(1));

    let mut executed = 0;
    while let Some(record) = results.next().await {
        let record = record?;
        journal.append(record)?;
        on_record(journal.records().last().expect("just appended"));
        executed += 1;
    }
    Ok(CollectionSummary { executed, skipped })
}
