//! Independent reference computations for the numerical tests. Nothing here
//! calls into the crate's estimation code.
#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use topicirt::irt::{Cell, ItemParams, ResponseMatrix};

pub const DENSE_NODES: usize = 10_001;

/// Plain logistic, no stabilization tricks.
pub fn logistic(a: f64, b: f64, theta: f64) -> f64 {
    1.0 / (1.0 + (-a * (theta - b)).exp())
}

/// 10,001-node grid on [-6, 6] with normal-density masses summing to one.
pub fn dense_grid() -> (Vec<f64>, Vec<f64>) {
    let nodes: Vec<f64> = (0..DENSE_NODES).map(|k| -6.0 + 12.0 * k as f64 / (DENSE_NODES - 1) as f64).collect();
    let raw: Vec<f64> = nodes.iter().map(|x| (-x * x / 2.0).exp()).collect();
    let s: f64 = raw.iter().sum();
    (nodes, raw.iter().map(|w| w / s).collect())
}

fn likelihood(row: &[Cell], items: &[(f64, f64)], theta: f64) -> f64 {
    row.iter().zip(items).fold(1.0, |acc, (cell, &(a, b))| match cell {
        Cell::Correct => acc * logistic(a, b, theta),
        Cell::Incorrect => acc * (1.0 - logistic(a, b, theta)),
        Cell::Missing => acc,
    })
}

/// Σ_m ln Σ_q w_q L_m(θ_q) on an arbitrary grid.
pub fn grid_log_marginal(rows: &[Vec<Cell>], items: &[(f64, f64)], nodes: &[f64], weights: &[f64]) -> f64 {
    rows.iter()
        .map(|row| nodes.iter().zip(weights).map(|(t, w)| w * likelihood(row, items, *t)).sum::<f64>().ln())
        .sum()
}

pub fn dense_log_marginal(rows: &[Vec<Cell>], items: &[(f64, f64)]) -> f64 {
    let (nodes, weights) = dense_grid();
    grid_log_marginal(rows, items, &nodes, &weights)
}

/// Posterior mean and sd of θ on the dense grid.
pub fn dense_eap(row: &[Cell], items: &[(f64, f64)]) -> (f64, f64) {
    let (nodes, weights) = dense_grid();
    let post: Vec<f64> = nodes.iter().zip(&weights).map(|(t, w)| w * likelihood(row, items, *t)).collect();
    let z: f64 = post.iter().sum();
    let mean = nodes.iter().zip(&post).map(|(t, p)| t * p).sum::<f64>() / z;
    let var = nodes.iter().zip(&post).map(|(t, p)| (t - mean).powi(2) * p).sum::<f64>() / z;
    (mean, var.sqrt())
}

/// The 61-node grid used by default, rebuilt from its definition.
pub fn coarse_grid() -> (Vec<f64>, Vec<f64>) {
    let nodes: Vec<f64> = (0..61).map(|k| -6.0 + 0.2 * k as f64).collect();
    let raw: Vec<f64> = nodes.iter().map(|x| (-x * x / 2.0).exp()).collect();
    let s: f64 = raw.iter().sum();
    (nodes, raw.iter().map(|w| w / s).collect())
}

/// Exhaustive search over (a, b) in [-4, 4]^2 at step 0.01, one item at a
/// time with the others held fixed, sweeping until no item improves.
/// Returns the best parameters and their marginal log-likelihood.
pub fn grid_search_mml(rows: &[Vec<Cell>], n_items: usize) -> (Vec<(f64, f64)>, f64) {
    let (nodes, weights) = coarse_grid();
    let steps: Vec<f64> = (0..=800).map(|k| -4.0 + 0.01 * k as f64).collect();
    let mut params = vec![(1.0, 0.0); n_items];
    let mut best = grid_log_marginal(rows, &params, &nodes, &weights);
    loop {
        let mut improved = false;
        for i in 0..n_items {
            // tables of the other items' likelihood per model per node
            let others: Vec<Vec<f64>> = rows
                .iter()
                .map(|row| {
                    nodes
                        .iter()
                        .map(|t| {
                            row.iter().enumerate().filter(|(j, _)| *j != i).fold(1.0, |acc, (j, c)| {
                                let (a, b) = params[j];
                                match c {
                                    Cell::Correct => acc * logistic(a, b, *t),
                                    Cell::Incorrect => acc * (1.0 - logistic(a, b, *t)),
                                    Cell::Missing => acc,
                                }
                            })
                        })
                        .collect()
                })
                .collect();
            let mut local = (best, params[i]);
            for &a in &steps {
                for &b in &steps {
                    let p: Vec<f64> = nodes.iter().map(|t| logistic(a, b, *t)).collect();
                    let ll: f64 = rows
                        .iter()
                        .zip(&others)
                        .map(|(row, oth)| {
                            let f = |q: usize| match row[i] {
                                Cell::Correct => p[q],
                                Cell::Incorrect => 1.0 - p[q],
                                Cell::Missing => 1.0,
                            };
                            (0..nodes.len()).map(|q| weights[q] * oth[q] * f(q)).sum::<f64>().ln()
                        })
                        .sum();
                    if ll > local.0 + 1e-12 {
                        local = (ll, (a, b));
                    }
                }
            }
            if local.0 > best + 1e-12 {
                best = local.0;
                params[i] = local.1;
                improved = true;
            }
        }
        if !improved {
            return (params, best);
        }
    }
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

pub fn rmse(x: &[f64], y: &[f64]) -> f64 {
    (x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Draws true parameters: θ ~ N(0,1), b ~ N(0,1), a ~ LogNormal(0, 0.3).
pub fn draw_population(n_models: usize, n_items: usize, seed: u64) -> (Vec<f64>, Vec<ItemParams>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let lognormal = LogNormal::new(0.0, 0.3).unwrap();
    let thetas = (0..n_models).map(|_| normal.sample(&mut rng)).collect();
    let items = (0..n_items)
        .map(|i| {
            let a = lognormal.sample(&mut rng);
            let b = normal.sample(&mut rng);
            ItemParams::new(format!("item-{i:03}"), a, b)
        })
        .collect();
    (thetas, items)
}

pub fn rows_of(m: &ResponseMatrix) -> Vec<Vec<Cell>> {
    (0..m.n_models()).map(|r| m.row(r).to_vec()).collect()
}
