use serde::{Deserialize, Serialize};

use super::{
    e_step, eap_ability, filter_degenerate_items, invalid, m_step_item, marginal_reliability, AbilityEstimate,
    ExclusionReport, ItemParams, NewtonSettings, ParamBounds, QuadratureGrid, ResponseMatrix, Result,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitSettings {
    pub grid_nodes: usize,
    pub grid_half_span: f64,
    /// EM stops once no item parameter moves by more than this.
    pub tol: f64,
    pub max_cycles: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub bounds: ParamBounds,
    pub ridge: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            grid_nodes: 61,
            grid_half_span: 6.0,
            tol: 1e-4,
            max_cycles: 500,
            newton_tol: 1e-6,
            newton_max_iter: 50,
            bounds: ParamBounds::default(),
            ridge: 0.0,
        }
    }
}

impl FitSettings {
    pub fn grid(&self) -> Result<QuadratureGrid> {
        QuadratureGrid::standard_normal(self.grid_nodes, self.grid_half_span)
    }

    pub fn newton(&self) -> NewtonSettings {
        NewtonSettings { tol: self.newton_tol, max_iter: self.newton_max_iter, bounds: self.bounds, ridge: self.ridge }
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        if !(self.tol > 0.0 && self.newton_tol > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        if self.max_cycles == 0 || self.newton_max_iter == 0 {
            return Err(invalid("iteration caps must be positive"));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(invalid("ridge must be finite and nonnegative"));
        }
        self.grid().map(|_| ())
    }
}

/// Fitted 2PL artifacts for one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicFit {
    pub topic: String,
    /// Every item of the input matrix, in input order; excluded items keep
    /// their exclusion status.
    pub items: Vec<ItemParams>,
    /// One estimate per input model, in input order.
    pub abilities: Vec<AbilityEstimate>,
    /// `None` when the ability estimates have zero variance.
    pub reliability: Option<f64>,
    pub log_likelihood: f64,
    pub em_cycles: usize,
    pub converged: bool,
    /// Marginal log-likelihood before each cycle, then at the final estimates.
    pub log_likelihood_trace: Vec<f64>,
    pub exclusions: ExclusionReport,
}

impl TopicFit {
    pub fn item(&self, item_id: &str) -> Option<&ItemParams> {
        self.items.iter().find(|p| p.item_id == item_id)
    }

    pub fn ability(&self, model_id: &str) -> Option<&AbilityEstimate> {
        self.abilities.iter().find(|a| a.model_id == model_id)
    }

    pub fn fitted_items(&self) -> impl Iterator<Item = &ItemParams> {
        self.items.iter().filter(|p| p.is_fitted())
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Per-item change between cycles, measured in (a, b) or in slope/intercept
/// form, whichever is smaller. The second form keeps a near-flat item whose
/// `b` is unidentified from stalling convergence.
fn param_change(old: &ItemParams, new: &ItemParams) -> f64 {
    let da = (new.a - old.a).abs();
    let db = (new.b - old.b).abs();
    let dc = (new.a * new.b - old.a * old.b).abs();
    da.max(db).min(da.max(dc))
}

/// Fits a unidimensional 2PL model by Bock–Aitkin EM with an N(0, 1) prior.
///
/// Degenerate items are excluded first and reported. Abilities are EAP
/// estimates from the fitted items and reliability is the marginal
/// reliability of those estimates.
pub fn fit_2pl(topic: &str, matrix: &ResponseMatrix, settings: &FitSettings) -> Result<TopicFit> {
    settings.validate()?;
    if matrix.n_models() < 2 {
        return Err(invalid(format!("fitting needs at least 2 models, got {}", matrix.n_models())));
    }
    if matrix.n_items() == 0 {
        return Err(invalid("fitting needs at least 1 item"));
    }
    let grid = settings.grid()?;
    let newton = settings.newton();
    let (filtered, exclusions) = filter_degenerate_items(matrix)?;

    let mut params: Vec<ItemParams> = (0..filtered.n_items())
        .map(|i| {
            let (correct, observed) = filtered.item_counts(i);
            let p = (correct as f64 / observed as f64).clamp(0.02, 0.98);
            ItemParams::new(filtered.item_ids()[i].clone(), 1.0, settings.bounds.clamp_b(-logit(p)))
        })
        .collect();

    let mut trace = Vec::new();
    let mut cycles = 0;
    let mut converged = false;
    while cycles < settings.max_cycles {
        let expected = e_step(&filtered, &params, &grid)?;
        trace.push(expected.log_likelihood);
        let updated = params
            .iter()
            .enumerate()
            .map(|(i, p)| m_step_item(expected.item_counts(i), &grid, p, &newton))
            .collect::<Result<Vec<_>>>()?;
        let change = params.iter().zip(&updated).map(|(o, n)| param_change(o, n)).fold(0.0, f64::max);
        params = updated;
        cycles += 1;
        if change < settings.tol {
            converged = true;
            break;
        }
    }
    let log_likelihood = e_step(&filtered, &params, &grid)?.log_likelihood;
    trace.push(log_likelihood);

    let abilities = (0..filtered.n_models())
        .map(|m| eap_ability(&filtered.model_ids()[m], filtered.row(m), &params, &grid))
        .collect::<Result<Vec<_>>>()?;
    let reliability = marginal_reliability(&abilities).ok();

    let mut fitted = params.into_iter();
    let items = matrix
        .item_ids()
        .iter()
        .map(|id| match exclusions.reason(id) {
            Some(reason) => ItemParams { item_id: id.clone(), a: 0.0, b: 0.0, status: reason },
            None => fitted.next().expect("filtered items follow input order"),
        })
        .collect();

    Ok(TopicFit {
        topic: topic.to_string(),
        items,
        abilities,
        reliability,
        log_likelihood,
        em_cycles: cycles,
        converged,
        log_likelihood_trace: trace,
        exclusions,
    })
}
