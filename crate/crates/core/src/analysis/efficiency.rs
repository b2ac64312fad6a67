use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::profile::ModelProfile;
use super::{AnalysisError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub model_id: String,
    pub theta: f64,
    pub theta_per_dollar: f64,
    pub theta_per_second: f64,
    pub dominated: bool,
}

impl ParetoPoint {
    fn objectives(&self) -> [f64; 3] {
        [self.theta, self.theta_per_dollar, self.theta_per_second]
    }

    /// At least as good everywhere and strictly better somewhere.
    fn dominates(&self, other: &ParetoPoint) -> bool {
        let (p, q) = (self.objectives(), other.objectives());
        p.iter().zip(&q).all(|(x, y)| x >= y) && p.iter().zip(&q).any(|(x, y)| x > y)
    }
}

/// (θ / total cost in USD, θ / mean seconds per question). Negative θ gives
/// negative ratios.
pub fn efficiency_metrics(profile: &ModelProfile) -> Result<(f64, f64)> {
    let undefined = |what, reason: String| AnalysisError::UndefinedRatio { model_id: profile.model_id.clone(), what, reason };
    if !(profile.total_cost_usd > 0.0 && profile.total_cost_usd.is_finite()) {
        return Err(undefined("theta per dollar", format!("total cost is {}", profile.total_cost_usd)));
    }
    if !(profile.mean_latency_secs > 0.0 && profile.mean_latency_secs.is_finite()) {
        return Err(undefined("theta per second", format!("mean latency is {}", profile.mean_latency_secs)));
    }
    Ok((profile.composite / profile.total_cost_usd, profile.composite / profile.mean_latency_secs))
}

/// One point per profile, in input order, with `dominated` filled in.
pub fn pareto_points(profiles: &[ModelProfile]) -> Result<Vec<ParetoPoint>> {
    let mut points = profiles
        .iter()
        .map(|p| {
            let (per_dollar, per_second) = efficiency_metrics(p)?;
            Ok(ParetoPoint {
                model_id: p.model_id.clone(),
                theta: p.composite,
                theta_per_dollar: per_dollar,
                theta_per_second: per_second,
                dominated: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let flags: Vec<bool> = points.iter().map(|p| points.iter().any(|q| q.dominates(p))).collect();
    for (p, d) in points.iter_mut().zip(flags) {
        p.dominated = d;
    }
    Ok(points)
}

/// Non-dominated subset maximizing (θ, θ/$, θ/s), by θ descending then id.
/// Exact duplicates of a frontier point stay on the frontier.
pub fn pareto_frontier(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    let mut front: Vec<ParetoPoint> = points
        .iter()
        .filter(|p| !points.iter().any(|q| q.dominates(p)))
        .map(|p| ParetoPoint { dominated: false, ..p.clone() })
        .collect();
    front.sort_by(|a, b| b.theta.partial_cmp(&a.theta).unwrap_or(Ordering::Equal).then_with(|| a.model_id.cmp(&b.model_id)));
    front
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn point(id: &str, o: [f64; 3]) -> ParetoPoint {
        ParetoPoint { model_id: id.into(), theta: o[0], theta_per_dollar: o[1], theta_per_second: o[2], dominated: false }
    }

    fn profile(theta: f64, cost: f64, time: f64) -> ModelProfile {
        ModelProfile {
            model_id: "m".into(),
            theta_by_topic: Default::default(),
            z_by_topic: Default::default(),
            composite: theta,
            accuracy_by_topic: Default::default(),
            overall_accuracy: 0.0,
            mean_latency_secs: time,
            total_cost_usd: cost,
        }
    }

    #[test]
    fn ratios() {
        let (d, s) = efficiency_metrics(&profile(1.826, 0.10, 2.81)).unwrap();
        assert!((d - 18.26).abs() < 0.01 && (s - 0.650).abs() < 0.01);
        let (_, s) = efficiency_metrics(&profile(0.916, 0.10, 1.06)).unwrap();
        assert!((s - 0.864).abs() < 0.01);
        let (d, s) = efficiency_metrics(&profile(-0.5, 0.5, 2.0)).unwrap();
        assert_eq!((d, s), (-1.0, -0.25));
        assert!(matches!(efficiency_metrics(&profile(1.0, 0.0, 1.0)), Err(AnalysisError::UndefinedRatio { .. })));
        assert!(efficiency_metrics(&profile(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn single_and_duplicates() {
        assert_eq!(pareto_frontier(&[point("a", [1.0, 1.0, 1.0])]).len(), 1);
        let pts = [point("a", [1.0, 2.0, 3.0]), point("b", [1.0, 2.0, 3.0]), point("c", [0.5, 2.0, 3.0])];
        let ids: Vec<_> = pareto_frontier(&pts).into_iter().map(|p| p.model_id).collect();
        assert_eq!(ids, vec!["a", "b"]);
    }

    fn brute_force(points: &[ParetoPoint]) -> Vec<String> {
        let mut keep = Vec::new();
        for (i, p) in points.iter().enumerate() {
            let mut dominated = false;
            for (j, q) in points.iter().enumerate() {
                if i == j {
                    continue;
                }
                let ge = q.theta >= p.theta && q.theta_per_dollar >= p.theta_per_dollar && q.theta_per_second >= p.theta_per_second;
                let gt = q.theta > p.theta || q.theta_per_dollar > p.theta_per_dollar || q.theta_per_second > p.theta_per_second;
                dominated |= ge && gt;
            }
            if !dominated {
                keep.push(p.model_id.clone());
            }
        }
        keep.sort();
        keep
    }

    fn arb_points() -> impl Strategy<Value = Vec<ParetoPoint>> {
        prop::collection::vec(prop::array::uniform3(0i32..6), 1..100).prop_map(|v| {
            v.into_iter().enumerate().map(|(i, o)| point(&format!("p{i:03}"), o.map(f64::from))).collect()
        })
    }

    proptest! {
        #[test]
        fn matches_pairwise_filter(points in arb_points()) {
            let mut got: Vec<_> = pareto_frontier(&points).into_iter().map(|p| p.model_id).collect();
            got.sort();
            prop_assert_eq!(got, brute_force(&points));
        }

        #[test]
        fn removing_a_dominated_point_keeps_the_frontier(points in arb_points(), pick in any::<prop::sample::Index>()) {
            let front = pareto_frontier(&points);
            let dominated: Vec<_> = points.iter().filter(|p| !front.iter().any(|f| f.model_id == p.model_id)).collect();
            prop_assume!(!dominated.is_empty());
            let gone = &pick.get(&dominated).model_id;
            let rest: Vec<_> = points.iter().filter(|p| &p.model_id != gone).cloned().collect();
            prop_assert_eq!(pareto_frontier(&rest), front);
        }
    }
}
