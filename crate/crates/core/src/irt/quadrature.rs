use serde::{Deserialize, Serialize};

use super::{invalid, Result};

/// Evenly spaced ability points with standard-normal prior masses.
///
/// Nodes are placed symmetrically about zero and the masses are the normal
/// density at each node, renormalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self::standard_normal(61, 6.0).expect("default grid is valid")
    }
}

impl QuadratureGrid {
    pub fn standard_normal(n_nodes: usize, half_span: f64) -> Result<Self> {
        if n_nodes < 2 {
            return Err(invalid(format!("quadrature needs at least 2 nodes, got {n_nodes}")));
        }
        if !(half_span.is_finite() && half_span > 0.0) {
            return Err(invalid(format!("quadrature half-span must be positive, got {half_span}")));
        }
        let last = (n_nodes - 1) as f64;
        // (2i - last) is exactly antisymmetric in i, so mirrored nodes are
        // exact negatives of each other.
        let nodes: Vec<f64> = (0..n_nodes)
            .map(|i| half_span * (2.0 * i as f64 - last) / last)
            .collect();
        let raw: Vec<f64> = nodes.iter().map(|x| (-0.5 * x * x).exp()).collect();
        let total: f64 = raw.iter().sum();
        let weights = raw.into_iter().map(|w| w / total).collect();
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    /// Standard deviation of the discretized prior.
    pub fn prior_sd(&self) -> f64 {
        let mean: f64 = self.nodes.iter().zip(&self.weights).map(|(x, w)| x * w).sum();
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| (x - mean).powi(2) * w)
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = QuadratureGrid::default();
        assert_eq!(g.len(), 61);
        assert_eq!(g.span(), (-6.0, 6.0));
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..g.len() {
            let j = g.len() - 1 - i;
            assert_eq!(g.nodes()[i], -g.nodes()[j]);
            assert_eq!(g.weights()[i], g.weights()[j]);
        }
    }

    #[test]
    fn prior_sd_close_to_one() {
        let sd = QuadratureGrid::default().prior_sd();
        assert!((sd - 1.0).abs() < 1e-6, "{sd}");
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(QuadratureGrid::standard_normal(1, 6.0).is_err());
        assert!(QuadratureGrid::standard_normal(11, 0.0).is_err());
        assert!(QuadratureGrid::standard_normal(11, f64::NAN).is_err());
    }
}
