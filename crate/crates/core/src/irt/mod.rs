//! Two-parameter logistic item response models fitted by marginal maximum
//! likelihood (Bock–Aitkin EM over a fixed quadrature grid), with EAP
//! ability scoring and marginal reliability.
//!
//! Everything here is a pure function of its inputs. A [`TopicFit`] holds
//! no references into the matrix it was fitted from, so independent topics
//! can be fitted on separate threads.

mod estep;
mod fit;
mod matrix;
mod model;
mod mstep;
mod quadrature;
mod scale;
mod scoring;
mod simulate;

pub use estep::{e_step, log_marginal_likelihood, EStep, ItemCounts};
pub use fit::{fit_2pl, FitSettings, TopicFit};
pub use matrix::{filter_degenerate_items, Cell, Exclusion, ExclusionReport, ResponseMatrix};
pub use model::{log_prob_correct, log_prob_incorrect, prob_correct, ItemParams, ItemStatus, ParamBounds};
pub use mstep::{m_step_item, NewtonSettings};
pub use quadrature::QuadratureGrid;
pub use scale::{composite_ability, standardize};
pub use scoring::{eap_ability, marginal_reliability, AbilityEstimate, ScoringMethod};
pub use simulate::simulate_matrix;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrtError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no items left after excluding degenerate items")]
    EmptyMatrix,
    #[error("zero variance: {0}")]
    ZeroVariance(String),
    #[error("reliability undefined: ability estimates have zero variance")]
    UndefinedReliability,
    #[error("missing entry for topic {0}")]
    MissingTopic(String),
}

pub type Result<T, E = IrtError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> IrtError {
    IrtError::InvalidArgument(msg.into())
}
