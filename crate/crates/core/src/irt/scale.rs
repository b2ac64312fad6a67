use std::collections::BTreeMap;

use super::{invalid, IrtError, Result};
use crate::topic::Topic;

/// Centers and scales to mean 0 and unit population standard deviation.
pub fn standardize(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(invalid(format!("standardize needs at least 2 values, got {}", values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(invalid("standardize requires finite values"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if !(sd > 0.0) || values.iter().all(|v| *v == values[0]) {
        return Err(IrtError::ZeroVariance("standardize input is constant".into()));
    }
    let z: Vec<f64> = values.iter().map(|v| (v - mean) / sd).collect();
    // second pass removes the residual rounding in the mean
    let shift = z.iter().sum::<f64>() / n;
    Ok(z.into_iter().map(|v| v - shift).collect())
}

/// Mean of a model's standardized topic scores over `topics`.
///
/// With `weights` (one per topic, nonnegative, not all zero) the weights are
/// normalized to sum to one and a weighted mean is returned.
pub fn composite_ability(
    z_by_topic: &BTreeMap<Topic, f64>,
    topics: &[Topic],
    weights: Option<&[f64]>,
) -> Result<f64> {
    if topics.is_empty() {
        return Err(invalid("composite over an empty topic set"));
    }
    let scores = topics
        .iter()
        .map(|t| z_by_topic.get(t).copied().ok_or_else(|| IrtError::MissingTopic(t.to_string())))
        .collect::<Result<Vec<f64>>>()?;
    match weights {
        None => Ok(scores.iter().sum::<f64>() / scores.len() as f64),
        Some(w) => {
            if w.len() != topics.len() {
                return Err(invalid(format!("{} weights for {} topics", w.len(), topics.len())));
            }
            if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(invalid("weights must be finite and nonnegative"));
            }
            let total: f64 = w.iter().sum();
            if total <= 0.0 {
                return Err(invalid("weights sum to zero"));
            }
            Ok(scores.iter().zip(w).map(|(z, w)| z * w / total).sum())
        }
    }
}
