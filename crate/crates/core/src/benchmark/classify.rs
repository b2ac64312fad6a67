use std::sync::Arc;

use async_trait::async_trait;
use futures::stream::{self, StreamExt};

use super::question::{option_letter, QuestionRecord};
use super::{BenchmarkError, Result};
use crate::harness::{ChatProvider, ChatRequest, InferenceConfig};
use crate::topic::Topic;

/// Source of raw topic labels. Output is free text; membership in the closed
/// label set is checked by [`classify_topic`].
#[async_trait]
pub trait TopicLabeler: Send + Sync {
    async fn label(&self, question: &QuestionRecord) -> Result<String>;
}

/// Accepts only records that arrive labeled.
#[derive(Debug, Clone, Copy, Default)]
pub struct PassthroughLabeler;

#[async_trait]
impl TopicLabeler for PassthroughLabeler {
    async fn label(&self, question: &QuestionRecord) -> Result<String> {
        Err(BenchmarkError::Labeler(format!("{} has no topic and labeling is passthrough", question.id)))
    }
}

/// Asks a chat model for a label using [`classification_prompt`].
pub struct ChatLabeler {
    provider: Arc<dyn ChatProvider>,
    model_id: String,
    config: InferenceConfig,
}

impl ChatLabeler {
    pub fn new(provider: Arc<dyn ChatProvider>, model_id: impl Into<String>, config: InferenceConfig) -> Self {
        ChatLabeler { provider, model_id: model_id.into(), config }
    }
}

#[async_trait]
impl TopicLabeler for ChatLabeler {
    async fn label(&self, question: &QuestionRecord) -> Result<String> {
        let request = ChatRequest::new(&self.model_id, classification_prompt(question), &self.config);
        let call = self.provider.complete(&request);
        match tokio::time::timeout(self.config.attempt_timeout(), call).await {
            Ok(Ok(reply)) => Ok(reply.text),
            Ok(Err(e)) => Err(BenchmarkError::Labeler(e.to_string())),
            Err(_) => Err(BenchmarkError::Labeler("timed out".into())),
        }
    }
}

/// Prompt listing every label verbatim; the reply must be one abbreviation.
pub fn classification_prompt(question: &QuestionRecord) -> String {
    let mut p = String::from(
        "Classify the following medical exam question into exactly one USMLE Step 1 content area.\n\
         Reply with ONLY the label in the left column, copied exactly, and NOTHING ELSE.\n",
    );
    for t in Topic::ALL {
        p.push_str(&format!("{}: {}\n", t.abbr(), t.full_name()));
    }
    p.push_str("Question: ");
    p.push_str(&question.stem);
    p.push_str("\nOptions:\n");
    for (i, o) in question.options.iter().enumerate() {
        p.push_str(&format!("{}. {}\n", option_letter(i), o));
    }
    p.push_str("Label:");
    p
}

/// Returns the record's topic, asking `labeler` at most twice when absent.
/// `None` means labeling failed and the record must not be sampled.
pub async fn classify_topic(question: &QuestionRecord, labeler: &dyn TopicLabeler) -> Option<Topic> {
    if question.topic.is_some() {
        return question.topic;
    }
    for _ in 0..2 {
        if let Ok(raw) = labeler.label(question).await {
            if let Ok(topic) = raw.trim().parse::<Topic>() {
                return Some(topic);
            }
        }
    }
    None
}

/// Labels every record, `concurrency` at a time, preserving pool order.
/// Returns the pool with topics filled in where labeling succeeded.
pub async fn classify_pool(
    pool: Vec<QuestionRecord>,
    labeler: &dyn TopicLabeler,
    concurrency: usize,
) -> Vec<QuestionRecord> {
    stream::iter(pool)
        .map(|mut q| async move {
            q.topic = classify_topic(&q, labeler).await;
            q
        })
        .buffered(concurrency.max(1))
        .collect()
        .await
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::Source;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    struct Scripted {
        replies: Mutex<Vec<&'static str>>,
        calls: AtomicUsize,
    }

    impl Scripted {
        fn new(mut replies: Vec<&'static str>) -> Self {
            replies.reverse();
            Scripted { replies: Mutex::new(replies), calls: AtomicUsize::new(0) }
        }
    }

    #[async_trait]
    impl TopicLabeler for Scripted {
        async fn label(&self, _: &QuestionRecord) -> Result<String> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            Ok(self.replies.lock().unwrap().pop().unwrap_or("").to_string())
        }
    }

    fn question(topic: Option<Topic>) -> QuestionRecord {
        QuestionRecord {
            id: "q".into(),
            source: Source::MedQa,
            topic,
            stem: "Which?".into(),
            options: vec!["x".into(), "y".into()],
            answer_key: 0,
        }
    }

    #[tokio::test]
    async fn prelabeled_passes_through_without_calls() {
        let l = Scripted::new(vec!["GI"]);
        assert_eq!(classify_topic(&question(Some(Topic::Cardio)), &l).await, Some(Topic::Cardio));
        assert_eq!(l.calls.load(Ordering::SeqCst), 0);
    }

    #[tokio::test]
    async fn non_member_twice_is_unlabeled() {
        let l = Scripted::new(vec!["Cardiology", "Cardiology", "GI"]);
        assert_eq!(classify_topic(&question(None), &l).await, None);
        assert_eq!(l.calls.load(Ordering::SeqCst), 2);
    }

    #[tokio::test]
    async fn member_label_is_accepted_after_one_retry() {
        let l = Scripted::new(vec!["GI"]);
        assert_eq!(classify_topic(&question(None), &l).await, Some(Topic::Gi));
        let l = Scripted::new(vec!["nope", " GI\n"]);
        assert_eq!(classify_topic(&question(None), &l).await, Some(Topic::Gi));
    }

    #[tokio::test]
    async fn passthrough_leaves_unlabeled_records_unlabeled() {
        let pool = vec![question(None), question(Some(Topic::Dev))];
        let out = classify_pool(pool, &PassthroughLabeler, 4).await;
        assert_eq!(out[0].topic, None);
        assert_eq!(out[1].topic, Some(Topic::Dev));
    }

    #[test]
    fn prompt_lists_every_label() {
        let p = classification_prompt(&question(None));
        for t in Topic::ALL {
            assert!(p.contains(&format!("{}: {}", t.abbr(), t.full_name())));
        }
        assert!(p.ends_with("Label:"));
    }
}
