use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HarnessError, Result};
use crate::topic::Topic;

/// Descriptive columns of the model cohort table. All optional.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelMetadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size_class: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub access_type: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modality: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context_length: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub release_date: Option<String>,
}

/// Behaviour of a model under [`super::SimulatedProvider`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationProfile {
    pub ability: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub topic_offsets: BTreeMap<Topic, f64>,
    #[serde(default)]
    pub latency_secs: f64,
    /// Probability that any single attempt fails with a 503.
    #[serde(default)]
    pub error_rate: f64,
    /// Probability that an answered reply ignores the one-letter format.
    #[serde(default)]
    pub deviation_rate: f64,
}

impl SimulationProfile {
    pub fn ability_on(&self, topic: Option<Topic>) -> f64 {
        self.ability + topic.and_then(|t| self.topic_offsets.get(&t)).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model_id: String,
    pub vendor: String,
    /// USD per million prompt tokens.
    pub prompt_price: f64,
    /// USD per million completion tokens.
    pub completion_price: f64,
    #[serde(default)]
    pub metadata: ModelMetadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationProfile>,
}

impl ModelSpec {
    pub fn new(model_id: &str, vendor: &str, prompt_price: f64, completion_price: f64) -> Self {
        ModelSpec {
            model_id: model_id.into(),
            vendor: vendor.into(),
            prompt_price,
            completion_price,
            metadata: ModelMetadata::default(),
            simulation: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.model_id.trim().is_empty() {
            return Err(HarnessError::InvalidArgument("model_id is empty".into()));
        }
        for (name, p) in [("prompt_price", self.prompt_price), ("completion_price", self.completion_price)] {
            if !(p.is_finite() && p >= 0.0) {
                return Err(HarnessError::InvalidArgument(format!("{} {name} {p} is not >= 0", self.model_id)));
            }
        }
        Ok(())
    }
}

/// Reads a line-delimited roster. Ids must be unique.
pub fn load_roster(path: &Path) -> Result<Vec<ModelSpec>> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| HarnessError::Malformed { path: path.to_path_buf(), line: n + 1, reason };
        let spec: ModelSpec = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        spec.validate().map_err(|e| malformed(e.to_string()))?;
        if !seen.insert(spec.model_id.clone()) {
            return Err(malformed(format!("duplicate model_id {}", spec.model_id)));
        }
        out.push(spec);
    }
    Ok(out)
}
