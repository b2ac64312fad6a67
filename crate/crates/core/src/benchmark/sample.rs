use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ingest::read_jsonl_questions;
use super::question::QuestionRecord;
use super::{BenchmarkError, Result};
use crate::topic::Topic;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkManifest {
    pub seed: u64,
    pub per_topic: usize,
    pub total: usize,
    pub topic_counts: BTreeMap<Topic, usize>,
    /// Question count per source benchmark.
    pub provenance: BTreeMap<String, usize>,
    /// Lowercase hex sha256 of the questions file bytes.
    pub sha256: String,
}

/// A drawn benchmark. Questions are grouped by topic in [`Topic::ALL`] order
/// and sorted by id within a topic.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSet {
    pub questions: Vec<QuestionRecord>,
    pub manifest: BenchmarkManifest,
}

fn sub_seed(seed: u64, topic: Topic) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(topic.abbr().as_bytes());
    h.finalize().into()
}

fn to_jsonl(questions: &[QuestionRecord]) -> String {
    let mut out = String::new();
    for q in questions {
        out.push_str(&serde_json::to_string(q).expect("question serializes"));
        out.push('\n');
    }
    out
}

impl BenchmarkSet {
    /// Assembles a set and its manifest from already chosen questions.
    pub fn from_questions(mut questions: Vec<QuestionRecord>, per_topic: usize, seed: u64) -> Self {
        let order = |t: Option<Topic>| t.map_or(usize::MAX, |t| Topic::ALL.iter().position(|x| *x == t).unwrap());
        questions.sort_by(|x, y| order(x.topic).cmp(&order(y.topic)).then_with(|| x.id.cmp(&y.id)));
        let mut topic_counts = BTreeMap::new();
        let mut provenance = BTreeMap::new();
        for q in &questions {
            if let Some(t) = q.topic {
                *topic_counts.entry(t).or_insert(0) += 1;
            }
            *provenance.entry(q.source.to_string()).or_insert(0) += 1;
        }
        let sha256 = hex::encode(Sha256::digest(to_jsonl(&questions).as_bytes()));
        let manifest =
            BenchmarkManifest { seed, per_topic, total: questions.len(), topic_counts, provenance, sha256 };
        BenchmarkSet { questions, manifest }
    }

    pub fn hash(&self) -> &str {
        &self.manifest.sha256
    }

    pub fn question(&self, id: &str) -> Option<&QuestionRecord> {
        self.questions.iter().find(|q| q.id == id)
    }

    /// `benchmark.jsonl` → `benchmark.manifest.json`.
    pub fn manifest_path(questions_path: &Path) -> PathBuf {
        questions_path.with_extension("manifest.json")
    }

    pub fn save(&self, questions_path: &Path) -> Result<()> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| BenchmarkError::Io { path, source }
        };
        fs::write(questions_path, to_jsonl(&self.questions)).map_err(io(questions_path))?;
        let mpath = Self::manifest_path(questions_path);
        let json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes") + "\n";
        fs::write(&mpath, json).map_err(io(&mpath))
    }

    /// Loads a saved set, checking the questions against the manifest hash.
    pub fn load(questions_path: &Path) -> Result<Self> {
        let mpath = Self::manifest_path(questions_path);
        let text = fs::read_to_string(&mpath).map_err(|source| BenchmarkError::Io { path: mpath.clone(), source })?;
        let manifest: BenchmarkManifest = serde_json::from_str(&text)
            .map_err(|e| BenchmarkError::Malformed { path: mpath.clone(), reason: e.to_string() })?;
        let bytes = fs::read(questions_path)
            .map_err(|source| BenchmarkError::Io { path: questions_path.to_path_buf(), source })?;
        let actual = hex::encode(Sha256::digest(&bytes));
        if actual != manifest.sha256 {
            return Err(BenchmarkError::HashMismatch { expected: manifest.sha256, actual });
        }
        let questions = read_jsonl_questions(questions_path)?;
        Ok(BenchmarkSet { questions, manifest })
    }
}

/// Draws `per_topic` labeled questions uniformly without replacement from
/// each topic stratum.
///
/// Each stratum is sorted by id and drawn with its own generator seeded from
/// sha256(seed, topic), so input order and the other strata never affect a
/// topic's selection. Unlabeled records are ignored.
pub fn stratified_sample(pool: &[QuestionRecord], per_topic: usize, seed: u64) -> Result<BenchmarkSet> {
    let mut strata: BTreeMap<Topic, Vec<&QuestionRecord>> = BTreeMap::new();
    for q in pool {
        if let Some(t) = q.topic {
            strata.entry(t).or_default().push(q);
        }
    }
    let mut chosen = Vec::with_capacity(per_topic * Topic::ALL.len());
    for topic in Topic::ALL {
        let mut stratum = strata.remove(&topic).unwrap_or_default();
        if stratum.len() < per_topic {
            return Err(BenchmarkError::Shortfall {
                topic,
                available: stratum.len(),
                required: per_topic,
                shortfall: per_topic - stratum.len(),
            });
        }
        stratum.sort_by(|x, y| x.id.cmp(&y.id));
        let mut rng = ChaCha8Rng::from_seed(sub_seed(seed, topic));
        for i in rand::seq::index::sample(&mut rng, stratum.len(), per_topic) {
            chosen.push(stratum[i].clone());
        }
    }
    Ok(BenchmarkSet::from_questions(chosen, per_topic, seed))
}
