use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AnalysisError, Result};
use crate::harness::{AccuracyTable, Telemetry};
use crate::irt::{composite_ability, standardize, TopicFit};
use crate::topic::Topic;

/// One model's row of results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelProfile {
    pub model_id: String,
    pub theta_by_topic: BTreeMap<Topic, f64>,
    pub z_by_topic: BTreeMap<Topic, f64>,
    /// Unweighted mean of `z_by_topic`.
    pub composite: f64,
    /// Percentages.
    pub accuracy_by_topic: BTreeMap<Topic, f64>,
    pub overall_accuracy: f64,
    pub mean_latency_secs: f64,
    pub total_cost_usd: f64,
}

/// Joins per-topic fits with accuracies and telemetry.
///
/// Models come in the order of the first fit's abilities. Topic z-scores are
/// standardized over every model in that topic's fit, and the composite
/// averages over the topics present in `fits`.
pub fn build_profiles(
    fits: &BTreeMap<Topic, TopicFit>,
    accuracy: &AccuracyTable,
    telemetry: &BTreeMap<String, Telemetry>,
) -> Result<Vec<ModelProfile>> {
    let Some(first) = fits.values().next() else {
        return Err(AnalysisError::InvalidArgument("no topic fits".into()));
    };
    let models: Vec<&str> = first.abilities.iter().map(|a| a.model_id.as_str()).collect();
    let topics: Vec<Topic> = fits.keys().copied().collect();

    let mut theta: BTreeMap<Topic, Vec<f64>> = BTreeMap::new();
    let mut z: BTreeMap<Topic, Vec<f64>> = BTreeMap::new();
    for (&topic, fit) in fits {
        let mut row = Vec::with_capacity(models.len());
        for m in &models {
            let est = fit.ability(m).ok_or_else(|| AnalysisError::MissingModel {
                model_id: m.to_string(),
                what: format!("ability in the {topic} fit"),
            })?;
            row.push(est.theta);
        }
        z.insert(topic, standardize(&row)?);
        theta.insert(topic, row);
    }

    let mut out = Vec::with_capacity(models.len());
    for (i, m) in models.iter().enumerate() {
        let theta_by_topic: BTreeMap<Topic, f64> = topics.iter().map(|t| (*t, theta[t][i])).collect();
        let z_by_topic: BTreeMap<Topic, f64> = topics.iter().map(|t| (*t, z[t][i])).collect();
        let composite = composite_ability(&z_by_topic, &topics, None)?;
        let missing = |what: &str| AnalysisError::MissingModel { model_id: m.to_string(), what: what.into() };
        let accuracy_by_topic = accuracy.by_topic.get(*m).cloned().ok_or_else(|| missing("topic accuracies"))?;
        let overall_accuracy = *accuracy.overall.get(*m).ok_or_else(|| missing("overall accuracy"))?;
        let tel = telemetry.get(*m).ok_or_else(|| missing("telemetry"))?;
        out.push(ModelProfile {
            model_id: m.to_string(),
            theta_by_topic,
            z_by_topic,
            composite,
            accuracy_by_topic,
            overall_accuracy,
            mean_latency_secs: tel.mean_latency_secs,
            total_cost_usd: tel.total_cost.usd(),
        });
    }
    Ok(out)
}
