//! Stage composition shared by the CLI and the FFI layer.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    audit_report, dual_ranking, flag_items, pareto_points, summarize_item_params, AnalysisError, FlagThresholds,
    Verdict,
};
use crate::benchmark::BenchmarkSet;
use crate::bundle::{BundleManifest, ResultBundle, SCHEMA_VERSION};
use crate::harness::{
    build_response_matrices, eligibility_check, telemetry, Eligibility, EligibilityStatus, ErrorPolicy, HarnessError,
    ModelSpec, ResponseMatrices, RunJournal,
};
use crate::irt::{fit_2pl, FitSettings, IrtError, TopicFit};
use crate::topic::Topic;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("fitting {topic}: {source}")]
    Fit {
        topic: Topic,
        #[source]
        source: IrtError,
    },
    #[error("only {eligible} eligible models ({}); fitting needs at least 2", .detail)]
    TooFewModels { eligible: usize, detail: String },
    #[error("{0}")]
    Mismatch(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not a fits file: {reason}")]
    Malformed { path: PathBuf, reason: String },
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

/// Output of the fitting stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitsFile {
    pub schema_version: u32,
    pub benchmark_sha256: String,
    pub settings: FitSettings,
    pub error_policy: ErrorPolicy,
    pub eligibility: Vec<Eligibility>,
    pub fits: Vec<TopicFit>,
}

impl FitsFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fits serialize") + "\n"
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Malformed { path: path.to_path_buf(), reason: e.to_string() })
    }

    pub fn eligible_models(&self) -> Vec<String> {
        self.eligibility
            .iter()
            .filter(|e| e.status == EligibilityStatus::Include)
            .map(|e| e.model_id.clone())
            .collect()
    }

    pub fn by_topic(&self) -> BTreeMap<Topic, TopicFit> {
        self.fits.iter().filter_map(|f| Some((f.topic.parse().ok()?, f.clone()))).collect()
    }
}

fn check_journal(journal: &RunJournal, benchmark: &BenchmarkSet) -> Result<()> {
    if journal.header().benchmark_sha256 != benchmark.hash() {
        return Err(PipelineError::Mismatch(format!(
            "journal was collected on benchmark {}, not {}",
            journal.header().benchmark_sha256,
            benchmark.hash()
        )));
    }
    Ok(())
}

/// Screens the roster, builds per-topic matrices and fits every topic in
/// parallel. Output order is topic order, so reruns are byte-identical.
pub fn fit_topics(
    journal: &RunJournal,
    benchmark: &BenchmarkSet,
    roster: &[ModelSpec],
    settings: &FitSettings,
    policy: ErrorPolicy,
) -> Result<(FitsFile, ResponseMatrices)> {
    check_journal(journal, benchmark)?;
    let eligibility: Vec<Eligibility> = roster.iter().map(|m| eligibility_check(journal, benchmark, &m.model_id)).collect();
    let eligible: Vec<String> = eligibility
        .iter()
        .filter(|e| e.status == EligibilityStatus::Include)
        .map(|e| e.model_id.clone())
        .collect();
    if eligible.len() < 2 {
        let detail = eligibility
            .iter()
            .map(|e| format!("{}: {:?}", e.model_id, e.status))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(PipelineError::TooFewModels { eligible: eligible.len(), detail });
    }
    let matrices = build_response_matrices(journal, benchmark, &eligible, policy)?;
    let fits = matrices
        .by_topic
        .par_iter()
        .map(|(topic, m)| fit_2pl(topic.abbr(), m, settings).map_err(|source| PipelineError::Fit { topic: *topic, source }))
        .collect::<Result<Vec<_>>>()?;
    let file = FitsFile {
        schema_version: SCHEMA_VERSION,
        benchmark_sha256: benchmark.hash().to_string(),
        settings: *settings,
        error_policy: policy,
        eligibility,
        fits,
    };
    Ok((file, matrices))
}

/// Composes profiles, rankings, efficiency, flags and the audit worklist.
pub fn build_bundle(
    fits: &FitsFile,
    journal: &RunJournal,
    benchmark: &BenchmarkSet,
    roster: &[ModelSpec],
    thresholds: &FlagThresholds,
    verdicts: &[Verdict],
) -> Result<ResultBundle> {
    check_journal(journal, benchmark)?;
    if fits.benchmark_sha256 != benchmark.hash() {
        return Err(PipelineError::Mismatch("fits were produced from a different benchmark".into()));
    }
    let eligible = fits.eligible_models();
    let matrices = build_response_matrices(journal, benchmark, &eligible, fits.error_policy)?;
    let by_topic = fits.by_topic();
    let profiles = crate::analysis::build_profiles(&by_topic, &matrices.accuracy, &telemetry(journal))?;
    let leaderboard = dual_ranking(&profiles);
    let pareto = pareto_points(&profiles)?;
    let flags = flag_items(&by_topic, thresholds);
    let audit = audit_report(&flags, &matrices.by_topic, &profiles, verdicts);
    let item_summary = summarize_item_params(&by_topic, &matrices.by_topic).ok();
    let in_bundle: Vec<ModelSpec> = roster.to_vec();

    Ok(ResultBundle {
        schema_version: SCHEMA_VERSION,
        manifest: BundleManifest {
            benchmark_sha256: benchmark.hash().to_string(),
            benchmark_seed: benchmark.manifest.seed,
            per_topic: benchmark.manifest.per_topic,
            inference: journal.header().config.clone(),
            fit_settings: fits.settings,
            error_policy: fits.error_policy,
            flag_thresholds: *thresholds,
            collected_at: journal.header().started_at,
        },
        roster: in_bundle,
        eligibility: fits.eligibility.clone(),
        profiles,
        fits: fits.fits.clone(),
        matrices: matrices.by_topic,
        flags,
        audit,
        leaderboard,
        pareto,
        item_summary,
    })
}
