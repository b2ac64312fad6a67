//! Rankings, efficiency, item diagnostics and audits built from fits and
//! collection telemetry.

mod audit;
mod efficiency;
mod flags;
mod profile;
mod ranking;
mod scatter;
mod summary;

pub use audit::{append_verdict, audit_report, load_verdicts, top_decile, AuditEntry, AuditReport, Verdict};
pub use efficiency::{efficiency_metrics, pareto_frontier, pareto_points, ParetoPoint};
pub use flags::{flag_items, FlagKind, FlagStatus, FlagThresholds, ItemFlag};
pub use profile::{build_profiles, ModelProfile};
pub use ranking::{dual_ranking, LeaderboardRow};
pub use scatter::{wrong_item_scatter, ScatterPoint, WrongItemScatter};
pub use summary::{quantile, summarize_item_params, ItemSummary, Stats};

use std::path::PathBuf;

use thiserror::Error;

use crate::irt::IrtError;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("model {model_id} has no {what}")]
    MissingModel { model_id: String, what: String },
    #[error("{what} is undefined for {model_id}: {reason}")]
    UndefinedRatio { model_id: String, what: &'static str, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Irt(#[from] IrtError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Malformed { path: PathBuf, line: usize, reason: String },
}

pub type Result<T, E = AnalysisError> = std::result::Result<T, E>;
