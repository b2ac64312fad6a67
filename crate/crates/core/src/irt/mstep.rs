use serde::{Deserialize, Serialize};

use super::model::{sigmoid, softplus};
use super::{invalid, ItemCounts, ItemParams, ItemStatus, ParamBounds, QuadratureGrid, Result};

const MAX_HALVINGS: usize = 40;
/// Below this |a| the item carries no information about `b`.
const FLAT_SLOPE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub bounds: ParamBounds,
    /// Strength of the optional quadratic penalty pulling the slope toward 1
    /// and the intercept toward 0. Zero disables it.
    pub ridge: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 50, bounds: ParamBounds::default(), ridge: 0.0 }
    }
}

/// Weighted logistic objective in slope/intercept form, `z = a·θ + c`.
struct Objective<'a> {
    nodes: &'a [f64],
    n: &'a [f64],
    r: &'a [f64],
    ridge: f64,
}

impl Objective<'_> {
    fn value(&self, a: f64, c: f64) -> f64 {
        let mut f = 0.0;
        for ((&t, &n), &r) in self.nodes.iter().zip(self.n).zip(self.r) {
            let z = a * t + c;
            f -= r * softplus(-z) + (n - r) * softplus(z);
        }
        f - 0.5 * self.ridge * ((a - 1.0).powi(2) + c * c)
    }

    /// Gradient and the negated Hessian (positive semidefinite).
    fn derivatives(&self, a: f64, c: f64) -> ([f64; 2], [f64; 3]) {
        let (mut ga, mut gc) = (0.0, 0.0);
        let (mut haa, mut hac, mut hcc) = (0.0, 0.0, 0.0);
        for ((&t, &n), &r) in self.nodes.iter().zip(self.n).zip(self.r) {
            let p = sigmoid(a * t + c);
            let e = r - n * p;
            ga += e * t;
            gc += e;
            let w = n * p * (1.0 - p);
            haa += w * t * t;
            hac += w * t;
            hcc += w;
        }
        ga -= self.ridge * (a - 1.0);
        gc -= self.ridge * c;
        ([ga, gc], [haa + self.ridge, hac, hcc + self.ridge])
    }
}

/// Maps a slope/intercept point back to bounded (a, b). When the slope is
/// numerically zero, `b` is unidentified and the previous value is kept.
fn project(a: f64, c: f64, b_prev: f64, bounds: &ParamBounds) -> (f64, f64) {
    let b = if a.abs() < FLAT_SLOPE { b_prev } else { bounds.clamp_b(-c / a) };
    (bounds.clamp_a(a), b)
}

/// Maximizes `Σ_q r̄_q ln P(θ_q) + (n̄_q − r̄_q) ln(1 − P(θ_q))` for one item
/// by Newton–Raphson with step-halving.
///
/// Iterates stay inside the bounds and the objective never decreases from the
/// (clamped) start. The result is `fitted` when successive iterates move less
/// than `tol`, either in (a, b) or in slope/intercept form, and
/// `not_converged` otherwise.
pub fn m_step_item(
    counts: ItemCounts<'_>,
    grid: &QuadratureGrid,
    start: &ItemParams,
    settings: &NewtonSettings,
) -> Result<ItemParams> {
    let q = grid.len();
    if counts.expected_n.len() != q || counts.expected_r.len() != q {
        return Err(invalid("expected counts do not match the grid"));
    }
    if counts
        .expected_n
        .iter()
        .zip(counts.expected_r)
        .any(|(n, r)| !(n.is_finite() && r.is_finite() && *n >= 0.0))
    {
        return Err(invalid(format!("expected counts for {} are negative or non-finite", start.item_id)));
    }
    if !(start.a.is_finite() && start.b.is_finite()) {
        return Err(invalid(format!("non-finite start for {}", start.item_id)));
    }
    let bounds = settings.bounds;
    let obj = Objective { nodes: grid.nodes(), n: counts.expected_n, r: counts.expected_r, ridge: settings.ridge };

    let (mut a, mut b) = (bounds.clamp_a(start.a), bounds.clamp_b(start.b));
    let mut f = obj.value(a, -a * b);
    let scale = 1.0 + counts.expected_n.iter().sum::<f64>();
    let mut converged = false;

    for _ in 0..settings.max_iter {
        let c = -a * b;
        let (g, h) = obj.derivatives(a, c);
        let det = h[0] * h[2] - h[1] * h[1];
        let dir = if det > 1e-12 * (1.0 + h[0] * h[2]) {
            [(h[2] * g[0] - h[1] * g[1]) / det, (h[0] * g[1] - h[1] * g[0]) / det]
        } else {
            // singular curvature: plain gradient ascent
            g
        };

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let (na, nb) = project(a + step * dir[0], c + step * dir[1], b, &bounds);
            let nf = obj.value(na, -na * nb);
            if nf >= f {
                accepted = Some((na, nb, nf));
                break;
            }
            step *= 0.5;
        }

        let Some((na, nb, nf)) = accepted else {
            // no ascent even for a vanishing step: stationary up to rounding
            converged = g[0].hypot(g[1]) <= 1e-6 * scale;
            break;
        };
        let da = (na - a).abs();
        let db = (nb - b).abs();
        let dc = (-na * nb - c).abs();
        a = na;
        b = nb;
        f = nf;
        if da.max(db) < settings.tol || da.max(dc) < settings.tol {
            converged = true;
            break;
        }
    }

    Ok(ItemParams {
        item_id: start.item_id.clone(),
        a,
        b,
        status: if converged { ItemStatus::Fitted } else { ItemStatus::NotConverged },
    })
}
