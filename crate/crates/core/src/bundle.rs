//! The single result document consumed by reports and the explorer.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    efficiency_metrics, AuditReport, FlagThresholds, ItemFlag, ItemSummary, LeaderboardRow, ModelProfile, ParetoPoint,
};
use crate::harness::{Eligibility, ErrorPolicy, InferenceConfig, ModelSpec};
use crate::irt::{marginal_reliability, FitSettings, ResponseMatrix, TopicFit};
use crate::topic::Topic;

pub const SCHEMA_VERSION: u32 = 1;

/// Tolerance for recomputed quantities in [`ResultBundle::validate`].
pub const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub benchmark_sha256: String,
    pub benchmark_seed: u64,
    pub per_topic: usize,
    pub inference: InferenceConfig,
    pub fit_settings: FitSettings,
    pub error_policy: ErrorPolicy,
    pub flag_thresholds: FlagThresholds,
    /// Start of the response collection the bundle was built from.
    pub collected_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub schema_version: u32,
    pub manifest: BundleManifest,
    pub roster: Vec<ModelSpec>,
    pub eligibility: Vec<Eligibility>,
    pub profiles: Vec<ModelProfile>,
    pub fits: Vec<TopicFit>,
    /// Scored responses of the eligible models, one matrix per topic.
    pub matrices: BTreeMap<Topic, ResponseMatrix>,
    pub flags: Vec<ItemFlag>,
    pub audit: AuditReport,
    pub leaderboard: Vec<LeaderboardRow>,
    pub pareto: Vec<ParetoPoint>,
    pub item_summary: Option<ItemSummary>,
}

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not a result bundle: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    SchemaVersion(u32),
    #[error("bundle is inconsistent:\n  {}", .0.join("\n  "))]
    Inconsistent(Vec<String>),
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= CONSISTENCY_TOL
}

impl ResultBundle {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes") + "\n"
    }

    pub fn save(&self, path: &Path) -> Result<(), BundleError> {
        fs::write(path, self.to_json()).map_err(|source| BundleError::Io { path: path.to_path_buf(), source })
    }

    /// Reads and validates a bundle.
    pub fn load(path: &Path) -> Result<Self, BundleError> {
        let text = fs::read_to_string(path).map_err(|source| BundleError::Io { path: path.to_path_buf(), source })?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| BundleError::Malformed { path: path.to_path_buf(), reason: e.to_string() })?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => return Err(BundleError::SchemaVersion(v as u32)),
            None => {
                return Err(BundleError::Malformed { path: path.to_path_buf(), reason: "no schema_version".into() })
            }
        }
        let bundle: ResultBundle = serde_json::from_value(value)
            .map_err(|e| BundleError::Malformed { path: path.to_path_buf(), reason: e.to_string() })?;
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn fit(&self, topic: Topic) -> Option<&TopicFit> {
        self.fits.iter().find(|f| f.topic == topic.abbr())
    }

    /// Every id resolves and every derived number matches its recomputation.
    pub fn validate(&self) -> Result<(), BundleError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(BundleError::SchemaVersion(self.schema_version));
        }
        let mut issues = Vec::new();
        let models: HashSet<&str> = self.profiles.iter().map(|p| p.model_id.as_str()).collect();
        let roster: HashSet<&str> = self.roster.iter().map(|m| m.model_id.as_str()).collect();

        for p in &self.profiles {
            if !roster.contains(p.model_id.as_str()) {
                issues.push(format!("profile {} is not in the roster", p.model_id));
            }
            if !p.z_by_topic.is_empty() {
                let mean = p.z_by_topic.values().sum::<f64>() / p.z_by_topic.len() as f64;
                if !close(mean, p.composite) {
                    issues.push(format!("{} composite {} != mean z {}", p.model_id, p.composite, mean));
                }
            }
            if !(0.0..=100.0).contains(&p.overall_accuracy) {
                issues.push(format!("{} accuracy {} outside [0, 100]", p.model_id, p.overall_accuracy));
            }
        }

        for fit in &self.fits {
            let Ok(topic) = fit.topic.parse::<Topic>() else {
                issues.push(format!("fit topic {:?} is not a known topic", fit.topic));
                continue;
            };
            for m in &models {
                if fit.ability(m).is_none() {
                    issues.push(format!("{m} has no ability in the {topic} fit"));
                }
            }
            if let Some(r) = fit.reliability {
                match marginal_reliability(&fit.abilities) {
                    Ok(again) if close(again, r) => {}
                    other => issues.push(format!("{topic} reliability {r} does not recompute ({other:?})")),
                }
            }
            for p in self.profiles.iter() {
                if let (Some(est), Some(theta)) = (fit.ability(&p.model_id), p.theta_by_topic.get(&topic)) {
                    if est.theta != *theta {
                        issues.push(format!("{} theta on {topic} differs between fit and profile", p.model_id));
                    }
                }
            }
            if let Some(m) = self.matrices.get(&topic) {
                if m.item_ids() != fit.items.iter().map(|i| i.item_id.clone()).collect::<Vec<_>>().as_slice() {
                    issues.push(format!("{topic} matrix items differ from fit items"));
                }
            }
        }

        for row in &self.leaderboard {
            if !models.contains(row.model_id.as_str()) {
                issues.push(format!("leaderboard row {} has no profile", row.model_id));
            }
        }
        let profile = |id: &str| self.profiles.iter().find(|p| p.model_id == id);
        for pt in &self.pareto {
            match profile(&pt.model_id).map(efficiency_metrics) {
                None => issues.push(format!("pareto point {} has no profile", pt.model_id)),
                Some(Ok((d, s))) => {
                    if !close(d, pt.theta_per_dollar) || !close(s, pt.theta_per_second) {
                        issues.push(format!("pareto ratios of {} do not recompute", pt.model_id));
                    }
                }
                Some(Err(e)) => issues.push(e.to_string()),
            }
        }
        for f in &self.flags {
            let found = self.fit(f.topic).and_then(|fit| fit.item(&f.item_id));
            if found.is_none() {
                issues.push(format!("flag references unknown item {} in {}", f.item_id, f.topic));
            }
        }
        for e in &self.audit.entries {
            if !self.flags.iter().any(|f| f.item_id == e.item_id && f.topic == e.topic) {
                issues.push(format!("audit entry {} has no flag", e.item_id));
            }
            for m in &e.top_missers {
                if !models.contains(m.as_str()) {
                    issues.push(format!("audit entry {} names unknown model {m}", e.item_id));
                }
            }
        }

        if issues.is_empty() {
            Ok(())
        } else {
            Err(BundleError::Inconsistent(issues))
        }
    }
}
