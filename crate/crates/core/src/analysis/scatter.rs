use serde::{Deserialize, Serialize};

use super::{AnalysisError, Result};
use crate::irt::{Cell, ResponseMatrix, TopicFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub item_id: String,
    pub b: f64,
    pub a: f64,
}

/// Items two models got wrong, split by who missed them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WrongItemScatter {
    pub model_a: String,
    pub model_b: String,
    pub only_a: Vec<ScatterPoint>,
    pub only_b: Vec<ScatterPoint>,
    pub both: Vec<ScatterPoint>,
}

/// Incorrect cells only; items without estimates (excluded before fitting)
/// have no coordinates and are left out.
pub fn wrong_item_scatter(fit: &TopicFit, matrix: &ResponseMatrix, model_a: &str, model_b: &str) -> Result<WrongItemScatter> {
    let row = |id: &str| {
        matrix
            .model_index(id)
            .ok_or_else(|| AnalysisError::InvalidArgument(format!("model {id} is not in the {} matrix", fit.topic)))
    };
    let (ra, rb) = (row(model_a)?, row(model_b)?);
    let mut out = WrongItemScatter {
        model_a: model_a.into(),
        model_b: model_b.into(),
        only_a: Vec::new(),
        only_b: Vec::new(),
        both: Vec::new(),
    };
    for (i, id) in matrix.item_ids().iter().enumerate() {
        let Some(item) = fit.item(id).filter(|p| !p.status.is_excluded()) else { continue };
        let point = ScatterPoint { item_id: id.clone(), b: item.b, a: item.a };
        match (matrix.cell(ra, i) == Cell::Incorrect, matrix.cell(rb, i) == Cell::Incorrect) {
            (true, true) => out.both.push(point),
            (true, false) => out.only_a.push(point),
            (false, true) => out.only_b.push(point),
            (false, false) => {}
        }
    }
    Ok(out)
}
