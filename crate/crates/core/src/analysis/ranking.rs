use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::profile::ModelProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub model_id: String,
    pub composite: f64,
    pub overall_accuracy: f64,
    pub rank_theta: usize,
    pub rank_accuracy: usize,
    /// Ranks differ.
    pub flip: bool,
    /// Present when a rank was decided by model id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_note: Option<String>,
}

/// Descending ranks by `key`, equal values ordered by model id. Returns the
/// rank of each profile and, for tied ones, the ids it tied with.
fn ranks(profiles: &[ModelProfile], key: impl Fn(&ModelProfile) -> f64) -> (Vec<usize>, Vec<Vec<String>>) {
    let mut order: Vec<usize> = (0..profiles.len()).collect();
    order.sort_by(|&i, &j| {
        key(&profiles[j])
            .partial_cmp(&key(&profiles[i]))
            .unwrap_or(Ordering::Equal)
            .then_with(|| profiles[i].model_id.cmp(&profiles[j].model_id))
    });
    let mut rank = vec![0; profiles.len()];
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos + 1;
    }
    let ties = profiles
        .iter()
        .enumerate()
        .map(|(i, p)| {
            profiles
                .iter()
                .enumerate()
                .filter(|&(j, q)| j != i && key(q) == key(p))
                .map(|(_, q)| q.model_id.clone())
                .collect()
        })
        .collect();
    (rank, ties)
}

/// Ranks by composite ability and by overall accuracy. Rows come back in
/// ability-rank order.
pub fn dual_ranking(profiles: &[ModelProfile]) -> Vec<LeaderboardRow> {
    let (rank_theta, tie_theta) = ranks(profiles, |p| p.composite);
    let (rank_acc, tie_acc) = ranks(profiles, |p| p.overall_accuracy);
    let mut rows: Vec<LeaderboardRow> = profiles
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut notes = Vec::new();
            if !tie_theta[i].is_empty() {
                notes.push(format!("ability tied with {}", tie_theta[i].join(", ")));
            }
            if !tie_acc[i].is_empty() {
                notes.push(format!("accuracy tied with {}", tie_acc[i].join(", ")));
            }
            LeaderboardRow {
                model_id: p.model_id.clone(),
                composite: p.composite,
                overall_accuracy: p.overall_accuracy,
                rank_theta: rank_theta[i],
                rank_accuracy: rank_acc[i],
                flip: rank_theta[i] != rank_acc[i],
                tie_note: (!notes.is_empty()).then(|| format!("{}; ordered by model id", notes.join("; "))),
            }
        })
        .collect();
    rows.sort_by_key(|r| r.rank_theta);
    rows
}
