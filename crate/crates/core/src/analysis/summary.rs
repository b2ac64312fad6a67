use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AnalysisError, Result};
use crate::irt::{Cell, ResponseMatrix, TopicFit};
use crate::topic::Topic;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemSummary {
    pub n_items: usize,
    pub a: Stats,
    pub b: Stats,
    /// Per-item fraction correct over observed cells.
    pub accuracy: Stats,
}

/// Linear interpolation between order statistics: position `(n − 1)·p` in
/// the sorted sample.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn stats(mut values: Vec<f64>) -> Stats {
    values.sort_by(f64::total_cmp);
    Stats {
        mean: values.iter().sum::<f64>() / values.len() as f64,
        median: quantile(&values, 0.5),
        q25: quantile(&values, 0.25),
        q75: quantile(&values, 0.75),
    }
}

/// Pools every estimated item across topics.
pub fn summarize_item_params(
    fits: &BTreeMap<Topic, TopicFit>,
    matrices: &BTreeMap<Topic, ResponseMatrix>,
) -> Result<ItemSummary> {
    let (mut a, mut b, mut acc) = (Vec::new(), Vec::new(), Vec::new());
    for (topic, fit) in fits {
        let matrix = matrices.get(topic);
        for item in fit.items.iter().filter(|p| !p.status.is_excluded()) {
            a.push(item.a);
            b.push(item.b);
            let index = matrix.and_then(|m| m.item_index(&item.item_id).map(|i| (m, i)));
            let (m, i) = index.ok_or_else(|| {
                AnalysisError::InvalidArgument(format!("item {} has no responses in the {topic} matrix", item.item_id))
            })?;
            let (correct, observed) = m.column(i).fold((0usize, 0usize), |(c, o), cell| {
                (c + usize::from(cell == Cell::Correct), o + usize::from(cell.is_observed()))
            });
            acc.push(correct as f64 / observed as f64);
        }
    }
    if a.is_empty() {
        return Err(AnalysisError::InvalidArgument("no estimated items to summarize".into()));
    }
    Ok(ItemSummary { n_items: a.len(), a: stats(a), b: stats(b), accuracy: stats(acc) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irt::{fit_2pl, FitSettings};

    #[test]
    fn linear_interpolation_quartiles() {
        let s = stats(vec![3.0, 1.0, 2.0]);
        assert_eq!((s.mean, s.median), (2.0, 2.0));
        let s = stats(vec![4.0, 1.0, 3.0, 2.0]);
        assert_eq!((s.q25, s.median, s.q75), (1.75, 2.5, 3.25));
        let s = stats(vec![0.7]);
        assert_eq!((s.mean, s.median, s.q25, s.q75), (0.7, 0.7, 0.7, 0.7));
    }

    #[test]
    fn pools_fitted_items_only() {
        let m = ResponseMatrix::from_strings(&["110", "101", "100", "111", "100", "110"]).unwrap();
        let fit = fit_2pl("t", &m, &FitSettings::default()).unwrap();
        let s = summarize_item_params(&BTreeMap::from([(Topic::Gi, fit)]), &BTreeMap::from([(Topic::Gi, m)])).unwrap();
        assert_eq!(s.n_items, 2);
        assert!((s.accuracy.mean - 5.0 / 12.0).abs() < 1e-15);
    }
}
