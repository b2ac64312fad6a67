use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::flags::{FlagKind, FlagStatus, ItemFlag};
use super::profile::ModelProfile;
use super::{AnalysisError, Result};
use crate::irt::{Cell, ResponseMatrix};
use crate::topic::Topic;

/// One line of the verdict file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verdict {
    pub item_id: String,
    pub verdict: FlagStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub item_id: String,
    pub topic: Topic,
    pub a: f64,
    pub b: f64,
    pub flag_kinds: Vec<FlagKind>,
    pub status: FlagStatus,
    /// Top-decile models that answered the item incorrectly, best first.
    pub top_missers: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Top decile by composite ability, best first.
    pub top_models: Vec<String>,
    /// Most negative discrimination first.
    pub entries: Vec<AuditEntry>,
}

/// The best ⌈n/10⌉ models by composite, ties by model id.
pub fn top_decile(profiles: &[ModelProfile]) -> Vec<String> {
    let mut sorted: Vec<&ModelProfile> = profiles.iter().collect();
    sorted.sort_by(|x, y| {
        y.composite.partial_cmp(&x.composite).unwrap_or(Ordering::Equal).then_with(|| x.model_id.cmp(&y.model_id))
    });
    sorted.iter().take(profiles.len().div_ceil(10)).map(|p| p.model_id.clone()).collect()
}

/// Dual-probe worklist: one entry per flagged item with the top-decile
/// models that missed it. The last verdict for an item sets its status.
pub fn audit_report(
    flags: &[ItemFlag],
    matrices: &BTreeMap<Topic, ResponseMatrix>,
    profiles: &[ModelProfile],
    verdicts: &[Verdict],
) -> AuditReport {
    let top_models = top_decile(profiles);
    let latest: HashMap<&str, FlagStatus> = verdicts.iter().map(|v| (v.item_id.as_str(), v.verdict)).collect();

    let mut entries: Vec<AuditEntry> = Vec::new();
    let mut index: HashMap<(Topic, &str), usize> = HashMap::new();
    for f in flags {
        if let Some(&i) = index.get(&(f.topic, f.item_id.as_str())) {
            entries[i].flag_kinds.push(f.flag_kind);
            continue;
        }
        let top_missers = matrices
            .get(&f.topic)
            .and_then(|m| m.item_index(&f.item_id).map(|i| (m, i)))
            .map(|(m, item)| {
                top_models
                    .iter()
                    .filter(|id| m.model_index(id).is_some_and(|row| m.cell(row, item) == Cell::Incorrect))
                    .cloned()
                    .collect()
            })
            .unwrap_or_default();
        index.insert((f.topic, f.item_id.as_str()), entries.len());
        entries.push(AuditEntry {
            item_id: f.item_id.clone(),
            topic: f.topic,
            a: f.a,
            b: f.b,
            flag_kinds: vec![f.flag_kind],
            status: latest.get(f.item_id.as_str()).copied().unwrap_or(f.status),
            top_missers,
        });
    }
    for e in &mut entries {
        e.flag_kinds.sort();
        e.flag_kinds.dedup();
    }
    entries.sort_by(|x, y| {
        x.a.partial_cmp(&y.a)
            .unwrap_or(Ordering::Equal)
            .then_with(|| x.topic.cmp(&y.topic))
            .then_with(|| x.item_id.cmp(&y.item_id))
    });
    AuditReport { top_models, entries }
}

/// Reads a verdict file; a missing file holds no verdicts.
pub fn load_verdicts(path: &Path) -> Result<Vec<Verdict>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(AnalysisError::Io { path: path.to_path_buf(), source }),
    };
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| AnalysisError::Malformed {
                path: path.to_path_buf(),
                line: n + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Appends one verdict line, creating the file if needed.
pub fn append_verdict(path: &Path, verdict: &Verdict) -> Result<()> {
    let io = |source| AnalysisError::Io { path: path.to_path_buf(), source };
    let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    let line = serde_json::to_string(verdict).expect("verdict serializes") + "\n";
    f.write_all(line.as_bytes()).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(id: &str, composite: f64) -> ModelProfile {
        ModelProfile {
            model_id: id.into(),
            theta_by_topic: Default::default(),
            z_by_topic: Default::default(),
            composite,
            accuracy_by_topic: Default::default(),
            overall_accuracy: 0.0,
            mean_latency_secs: 1.0,
            total_cost_usd: 1.0,
        }
    }

    fn flag(id: &str, a: f64, b: f64, kind: FlagKind) -> ItemFlag {
        ItemFlag { item_id: id.into(), topic: Topic::Comm, a, b, flag_kind: kind, status: FlagStatus::PendingExpertValidation }
    }

    fn setup() -> (BTreeMap<Topic, ResponseMatrix>, Vec<ModelProfile>) {
        let ids: Vec<String> = (0..12).map(|i| format!("m{i:02}")).collect();
        let items = vec!["x".to_string(), "y".to_string()];
        let rows = (0..12)
            .map(|i| vec![Cell::from_correct(i != 0), if i == 1 { Cell::Missing } else { Cell::from_correct(i > 1) }])
            .collect();
        let m = ResponseMatrix::from_rows(ids.clone(), items, rows).unwrap();
        let profiles = ids.iter().enumerate().map(|(i, id)| profile(id, 3.0 - i as f64)).collect();
        (BTreeMap::from([(Topic::Comm, m)]), profiles)
    }

    #[test]
    fn top_model_miss_is_listed() {
        let (m, p) = setup();
        assert_eq!(top_decile(&p), vec!["m00", "m01"]);
        let flags = [flag("y", -0.1, 2.0, FlagKind::NegativeDiscrimination), flag("x", -0.342, 0.77, FlagKind::NegativeDiscrimination), flag("y", -0.1, 2.0, FlagKind::NearZeroDiscrimination)];
        let r = audit_report(&flags, &m, &p, &[]);
        assert_eq!(r.entries.len(), 2);
        assert_eq!(r.entries[0].item_id, "x");
        assert_eq!(r.entries[0].top_missers, vec!["m00"]);
        assert_eq!(r.entries[1].top_missers, vec!["m00"], "missing cells are not misses");
        assert_eq!(r.entries[1].flag_kinds, vec![FlagKind::NegativeDiscrimination, FlagKind::NearZeroDiscrimination]);
    }

    #[test]
    fn no_flags_no_entries() {
        let (m, p) = setup();
        assert!(audit_report(&[], &m, &p, &[]).entries.is_empty());
    }

    #[test]
    fn verdicts_round_trip_through_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("verdicts.jsonl");
        assert!(load_verdicts(&path).unwrap().is_empty());
        append_verdict(&path, &Verdict { item_id: "x".into(), verdict: FlagStatus::ModelIntegrityProbe }).unwrap();
        append_verdict(&path, &Verdict { item_id: "x".into(), verdict: FlagStatus::BenchmarkFlaw }).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap().lines().last().unwrap(), r#"{"item_id":"x","verdict":"benchmark_flaw"}"#);
        let verdicts = load_verdicts(&path).unwrap();
        let (m, p) = setup();
        let r = audit_report(&[flag("x", -0.342, 0.77, FlagKind::NegativeDiscrimination)], &m, &p, &verdicts);
        assert_eq!(r.entries[0].status, FlagStatus::BenchmarkFlaw);
        fs::write(&path, "{\"item_id\":\"x\",\"verdict\":\"maybe\"}\n").unwrap();
        assert!(matches!(load_verdicts(&path), Err(AnalysisError::Malformed { line: 1, .. })));
    }
}
