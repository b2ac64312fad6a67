use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::irt::TopicFit;
use crate::topic::Topic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagKind {
    NegativeDiscrimination,
    ExtremeDifficulty,
    NearZeroDiscrimination,
}

/// Review state of a flagged item. Every flag starts pending; an expert
/// verdict moves it to one of the other two.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagStatus {
    #[default]
    PendingExpertValidation,
    BenchmarkFlaw,
    ModelIntegrityProbe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlagThresholds {
    /// `|b|` above this is extreme.
    pub extreme_b: f64,
    /// `|a|` below this is near zero.
    pub near_zero_a: f64,
}

impl Default for FlagThresholds {
    fn default() -> Self {
        FlagThresholds { extreme_b: 5.0, near_zero_a: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemFlag {
    pub item_id: String,
    pub topic: Topic,
    pub a: f64,
    pub b: f64,
    pub flag_kind: FlagKind,
    pub status: FlagStatus,
}

/// Flag kinds raised by one (a, b) pair.
pub(crate) fn kinds(a: f64, b: f64, t: &FlagThresholds) -> Vec<FlagKind> {
    let mut out = Vec::new();
    if a < 0.0 && b > 0.0 {
        out.push(FlagKind::NegativeDiscrimination);
    }
    if b.abs() > t.extreme_b {
        out.push(FlagKind::ExtremeDifficulty);
    }
    if a.abs() < t.near_zero_a {
        out.push(FlagKind::NearZeroDiscrimination);
    }
    out
}

/// One flag per (item, kind) over every estimated item. Items excluded
/// before fitting carry no estimates and are never flagged.
pub fn flag_items(fits: &BTreeMap<Topic, TopicFit>, thresholds: &FlagThresholds) -> Vec<ItemFlag> {
    let mut out = Vec::new();
    for (&topic, fit) in fits {
        for item in fit.items.iter().filter(|i| !i.status.is_excluded()) {
            for kind in kinds(item.a, item.b, thresholds) {
                out.push(ItemFlag {
                    item_id: item.item_id.clone(),
                    topic,
                    a: item.a,
                    b: item.b,
                    flag_kind: kind,
                    status: FlagStatus::PendingExpertValidation,
                });
            }
        }
    }
    out
}
