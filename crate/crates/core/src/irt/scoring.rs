use serde::{Deserialize, Serialize};

use super::{invalid, log_prob_correct, log_prob_incorrect, Cell, IrtError, ItemParams, QuadratureGrid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringMethod {
    Eap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbilityEstimate {
    pub model_id: String,
    pub theta: f64,
    /// Posterior standard deviation.
    pub se: f64,
    pub method: ScoringMethod,
    /// No fitted item was observed, so the estimate is the prior itself.
    #[serde(default)]
    pub prior_only: bool,
}

/// Expected a posteriori ability for one response vector.
///
/// `responses[i]` is the outcome on `items[i]`. Only items with status
/// `fitted` contribute; with none observed, the prior mean (0) and the grid's
/// prior standard deviation are returned with `prior_only` set.
pub fn eap_ability(
    model_id: &str,
    responses: &[Cell],
    items: &[ItemParams],
    grid: &QuadratureGrid,
) -> Result<AbilityEstimate> {
    if responses.len() != items.len() {
        return Err(invalid(format!(
            "{} responses for {} items (model {model_id})",
            responses.len(),
            items.len()
        )));
    }
    let mut log_post: Vec<f64> = grid.weights().iter().map(|w| w.ln()).collect();
    let mut informative = false;
    for (cell, item) in responses.iter().zip(items) {
        if !item.is_fitted() {
            continue;
        }
        let log_f: fn(f64, f64, f64) -> f64 = match cell {
            Cell::Correct => log_prob_correct,
            Cell::Incorrect => log_prob_incorrect,
            Cell::Missing => continue,
        };
        informative = true;
        for (lp, &t) in log_post.iter_mut().zip(grid.nodes()) {
            *lp += log_f(item.a, item.b, t);
        }
    }
    if !informative {
        return Ok(AbilityEstimate {
            model_id: model_id.to_string(),
            theta: 0.0,
            se: grid.prior_sd(),
            method: ScoringMethod::Eap,
            prior_only: true,
        });
    }
    let max = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let post: Vec<f64> = log_post.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = post.iter().sum();
    let theta = grid.nodes().iter().zip(&post).map(|(t, p)| t * p).sum::<f64>() / total;
    let var = grid.nodes().iter().zip(&post).map(|(t, p)| (t - theta).powi(2) * p).sum::<f64>() / total;
    Ok(AbilityEstimate {
        model_id: model_id.to_string(),
        theta,
        se: var.sqrt(),
        method: ScoringMethod::Eap,
        prior_only: false,
    })
}

/// `1 − mean(se²) / var(θ̂)` with the population variance (divide by N).
///
/// Values below zero are possible for pathological inputs and are returned
/// unchanged.
pub fn marginal_reliability(abilities: &[AbilityEstimate]) -> Result<f64> {
    if abilities.len() < 2 {
        return Err(invalid(format!("reliability needs at least 2 abilities, got {}", abilities.len())));
    }
    let n = abilities.len() as f64;
    let mean = abilities.iter().map(|e| e.theta).sum::<f64>() / n;
    let var = abilities.iter().map(|e| (e.theta - mean).powi(2)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(IrtError::UndefinedReliability);
    }
    let mean_se2 = abilities.iter().map(|e| e.se * e.se).sum::<f64>() / n;
    Ok(1.0 - mean_se2 / var)
}
