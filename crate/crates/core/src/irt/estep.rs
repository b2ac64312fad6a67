use super::{invalid, log_prob_correct, log_prob_incorrect, Cell, ItemParams, QuadratureGrid, ResponseMatrix, Result};

/// Output of one expectation step.
///
/// `posterior` is row-major (model × node). `expected_n` and `expected_r`
/// are row-major (item × node): the posterior mass of the models observed on
/// each item, and of those that answered it correctly.
#[derive(Debug, Clone)]
pub struct EStep {
    pub n_nodes: usize,
    pub posterior: Vec<f64>,
    pub expected_n: Vec<f64>,
    pub expected_r: Vec<f64>,
    pub log_likelihood: f64,
}

/// Expected counts for a single item across the grid.
#[derive(Debug, Clone, Copy)]
pub struct ItemCounts<'a> {
    pub expected_n: &'a [f64],
    pub expected_r: &'a [f64],
}

impl EStep {
    pub fn model_posterior(&self, model: usize) -> &[f64] {
        &self.posterior[model * self.n_nodes..(model + 1) * self.n_nodes]
    }

    pub fn item_counts(&self, item: usize) -> ItemCounts<'_> {
        let span = item * self.n_nodes..(item + 1) * self.n_nodes;
        ItemCounts { expected_n: &self.expected_n[span.clone()], expected_r: &self.expected_r[span] }
    }
}

/// Resolves each matrix column to its parameters.
fn align<'a>(matrix: &ResponseMatrix, items: &'a [ItemParams]) -> Result<Vec<&'a ItemParams>> {
    if items.is_empty() || matrix.n_items() == 0 {
        return Err(invalid("item set is empty"));
    }
    let by_id: std::collections::HashMap<&str, &ItemParams> =
        items.iter().map(|p| (p.item_id.as_str(), p)).collect();
    matrix
        .item_ids()
        .iter()
        .map(|id| {
            let p = by_id
                .get(id.as_str())
                .copied()
                .ok_or_else(|| invalid(format!("no parameters for item {id:?}")))?;
            if !(p.a.is_finite() && p.b.is_finite()) {
                return Err(invalid(format!("non-finite parameters for item {id:?}")));
            }
            Ok(p)
        })
        .collect()
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Per-model log joint (log prior + log likelihood) at every node.
fn log_joint(matrix: &ResponseMatrix, params: &[&ItemParams], grid: &QuadratureGrid) -> Vec<f64> {
    let q = grid.len();
    let nodes = grid.nodes();
    // item × node tables of ln P and ln (1 - P)
    let mut log_p = vec![0.0; params.len() * q];
    let mut log_q = vec![0.0; params.len() * q];
    for (i, p) in params.iter().enumerate() {
        for (k, &theta) in nodes.iter().enumerate() {
            log_p[i * q + k] = log_prob_correct(p.a, p.b, theta);
            log_q[i * q + k] = log_prob_incorrect(p.a, p.b, theta);
        }
    }
    let log_w: Vec<f64> = grid.weights().iter().map(|w| w.ln()).collect();
    let mut out = Vec::with_capacity(matrix.n_models() * q);
    for m in 0..matrix.n_models() {
        let mut acc = log_w.clone();
        for (i, cell) in matrix.row(m).iter().enumerate() {
            let table = match cell {
                Cell::Correct => &log_p,
                Cell::Incorrect => &log_q,
                Cell::Missing => continue,
            };
            for (a, t) in acc.iter_mut().zip(&table[i * q..(i + 1) * q]) {
                *a += t;
            }
        }
        out.extend(acc);
    }
    out
}

/// Sum over models of the log of each model's likelihood integrated against
/// the grid prior. Missing cells contribute no factor.
pub fn log_marginal_likelihood(matrix: &ResponseMatrix, items: &[ItemParams], grid: &QuadratureGrid) -> Result<f64> {
    let params = align(matrix, items)?;
    let joint = log_joint(matrix, &params, grid);
    Ok(joint.chunks(grid.len()).map(log_sum_exp).sum())
}

pub fn e_step(matrix: &ResponseMatrix, items: &[ItemParams], grid: &QuadratureGrid) -> Result<EStep> {
    let params = align(matrix, items)?;
    let q = grid.len();
    let mut posterior = log_joint(matrix, &params, grid);
    let mut log_likelihood = 0.0;
    for row in posterior.chunks_mut(q) {
        let lse = log_sum_exp(row);
        log_likelihood += lse;
        for v in row.iter_mut() {
            *v = (*v - lse).exp();
        }
        // exact renormalization against exp rounding
        let s: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v /= s;
        }
    }

    let n_items = matrix.n_items();
    let mut expected_n = vec![0.0; n_items * q];
    let mut expected_r = vec![0.0; n_items * q];
    for m in 0..matrix.n_models() {
        let post = &posterior[m * q..(m + 1) * q];
        for (i, cell) in matrix.row(m).iter().enumerate() {
            if !cell.is_observed() {
                continue;
            }
            let n = &mut expected_n[i * q..(i + 1) * q];
            for (n, p) in n.iter_mut().zip(post) {
                *n += p;
            }
            if *cell == Cell::Correct {
                let r = &mut expected_r[i * q..(i + 1) * q];
                for (r, p) in r.iter_mut().zip(post) {
                    *r += p;
                }
            }
        }
    }

    Ok(EStep { n_nodes: q, posterior, expected_n, expected_r, log_likelihood })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irt::model::sigmoid;

    fn items(ps: &[(f64, f64)]) -> Vec<ItemParams> {
        ps.iter().enumerate().map(|(i, &(a, b))| ItemParams::new(format!("i{i}"), a, b)).collect()
    }

    #[test]
    fn all_missing_model_has_zero_log_likelihood() {
        let m = ResponseMatrix::from_strings(&["..."]).unwrap();
        let ll = log_marginal_likelihood(&m, &items(&[(1.0, 0.0), (2.0, 1.0), (0.5, -1.0)]), &QuadratureGrid::default()).unwrap();
        assert!(ll.abs() < 1e-12, "{ll}");
    }

    #[test]
    fn flat_item_gives_log_half() {
        for row in ["1", "0"] {
            let m = ResponseMatrix::from_strings(&[row]).unwrap();
            let ll = log_marginal_likelihood(&m, &items(&[(0.0, 0.0)]), &QuadratureGrid::default()).unwrap();
            assert!((ll - 0.5f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_item_set_is_rejected() {
        let m = ResponseMatrix::from_strings(&["1"]).unwrap();
        assert!(log_marginal_likelihood(&m, &[], &QuadratureGrid::default()).is_err());
    }

    #[test]
    fn missing_row_posterior_is_prior() {
        let grid = QuadratureGrid::default();
        let m = ResponseMatrix::from_strings(&["..", "10"]).unwrap();
        let e = e_step(&m, &items(&[(1.0, 0.0), (1.5, 0.3)]), &grid).unwrap();
        for (p, w) in e.model_posterior(0).iter().zip(grid.weights()) {
            assert!((p - w).abs() < 1e-15);
        }
    }

    #[test]
    fn single_correct_item_posterior_matches_direct_arithmetic() {
        let grid = QuadratureGrid::default();
        let m = ResponseMatrix::from_strings(&["1"]).unwrap();
        let e = e_step(&m, &items(&[(1.0, 0.0)]), &grid).unwrap();
        let raw: Vec<f64> = grid.nodes().iter().zip(grid.weights()).map(|(t, w)| w * sigmoid(*t)).collect();
        let total: f64 = raw.iter().sum();
        for (p, r) in e.model_posterior(0).iter().zip(&raw) {
            assert!((p - r / total).abs() < 1e-14);
        }
    }

    #[test]
    fn counts_are_bounded_and_posteriors_normalized() {
        let grid = QuadratureGrid::default();
        let m = ResponseMatrix::from_strings(&["10.1", "0110", "1.11", "...."]).unwrap();
        let e = e_step(&m, &items(&[(1.0, 0.0), (-0.7, 0.4), (2.0, 1.0), (0.3, -2.0)]), &grid).unwrap();
        for model in 0..m.n_models() {
            let s: f64 = e.model_posterior(model).iter().sum();
            assert!((s - 1.0).abs() < 1e-10);
        }
        for (n, r) in e.expected_n.iter().zip(&e.expected_r) {
            assert!(*r >= 0.0 && *r <= *n);
        }
    }
}
