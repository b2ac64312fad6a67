use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use async_trait::async_trait;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use sha2::{Digest, Sha256};

use super::prompt::render_prompt;
use super::provider::{ChatProvider, ChatReply, ChatRequest, ProviderError};
use super::roster::{ModelSpec, SimulationProfile};
use crate::benchmark::{option_letter, QuestionRecord};
use crate::irt::prob_correct;
use crate::topic::Topic;

struct SimQuestion {
    id: String,
    topic: Option<Topic>,
    n_options: usize,
    answer_key: usize,
}

/// Offline provider whose models answer like 2PL respondents.
///
/// Each question gets a hidden (a, b) with b ~ N(0, 1) and a ~ LogNormal(0,
/// 0.3), derived from the seed and question id. Every draw is a pure function
/// of (seed, model, question, attempt), so reruns reproduce the same replies
/// regardless of scheduling.
pub struct SimulatedProvider {
    seed: u64,
    questions: HashMap<String, SimQuestion>,
    profiles: HashMap<String, SimulationProfile>,
    attempts: Mutex<HashMap<(String, String), u32>>,
    calls: AtomicUsize,
}

fn rng_for(seed: u64, parts: &[&str]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    ChaCha8Rng::from_seed(h.finalize().into())
}

impl SimulatedProvider {
    /// Models without a simulation profile answer with HTTP 404.
    pub fn new(questions: &[QuestionRecord], roster: &[ModelSpec], seed: u64) -> Self {
        let questions = questions
            .iter()
            .filter_map(|q| {
                let prompt = render_prompt(q).ok()?;
                let sim = SimQuestion {
                    id: q.id.clone(),
                    topic: q.topic,
                    n_options: q.options.len(),
                    answer_key: q.answer_key,
                };
                Some((prompt, sim))
            })
            .collect();
        let profiles = roster
            .iter()
            .filter_map(|m| m.simulation.clone().map(|s| (m.model_id.clone(), s)))
            .collect();
        SimulatedProvider {
            seed,
            questions,
            profiles,
            attempts: Mutex::new(HashMap::new()),
            calls: AtomicUsize::new(0),
        }
    }

    /// Total `complete` calls served.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// Hidden (a, b) of a question.
    pub fn item_params(&self, question_id: &str) -> (f64, f64) {
        let mut rng = rng_for(self.seed, &["item", question_id]);
        let b = Normal::new(0.0, 1.0).unwrap().sample(&mut rng);
        let a = LogNormal::new(0.0, 0.3).unwrap().sample(&mut rng);
        (a, b)
    }
}

#[async_trait]
impl ChatProvider for SimulatedProvider {
    async fn complete(&self, request: &ChatRequest) -> Result<ChatReply, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let Some(profile) = self.profiles.get(&request.model) else {
            return Err(ProviderError::Status { status: 404, body: format!("unknown model {}", request.model) });
        };
        let prompt = request.prompt();
        let Some(q) = self.questions.get(prompt) else {
            return Err(ProviderError::Status { status: 400, body: "prompt does not match a known question".into() });
        };
        let attempt = {
            let mut attempts = self.attempts.lock().unwrap();
            let n = attempts.entry((request.model.clone(), q.id.clone())).or_insert(0);
            *n += 1;
            *n
        };
        let model = request.model.as_str();
        tokio::time::sleep(Duration::from_secs_f64(profile.latency_secs.max(0.0))).await;

        let mut attempt_rng = rng_for(self.seed, &["attempt", model, &q.id, &attempt.to_string()]);
        if attempt_rng.random::<f64>() < profile.error_rate {
            return Err(ProviderError::Status { status: 503, body: "simulated outage".into() });
        }

        let (a, b) = self.item_params(&q.id);
        let p = prob_correct(a, b, profile.ability_on(q.topic)).unwrap_or(0.5);
        let mut rng = rng_for(self.seed, &["answer", model, &q.id]);
        let letter = if rng.random::<f64>() < p {
            option_letter(q.answer_key)
        } else {
            let wrong = rng.random_range(0..q.n_options - 1);
            option_letter(if wrong >= q.answer_key { wrong + 1 } else { wrong })
        };
        let text = if rng.random::<f64>() < profile.deviation_rate {
            format!("The answer is {letter}.")
        } else {
            letter.to_string()
        };
        Ok(ChatReply {
            prompt_tokens: prompt.len().div_ceil(4) as u64,
            completion_tokens: text.len().div_ceil(4) as u64,
            text,
        })
    }
}
