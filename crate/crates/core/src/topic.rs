//! The eleven content areas used to stratify the benchmark.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Topic {
    #[serde(rename = "MSK/Skin")]
    MskSkin,
    #[serde(rename = "Multi")]
    Multi,
    #[serde(rename = "Repro/Endo")]
    ReproEndo,
    #[serde(rename = "Behav/Neuro")]
    BehavNeuro,
    #[serde(rename = "Blood/Immune")]
    BloodImmune,
    #[serde(rename = "Dev")]
    Dev,
    #[serde(rename = "Cardio")]
    Cardio,
    #[serde(rename = "Resp/Renal")]
    RespRenal,
    #[serde(rename = "GI")]
    Gi,
    #[serde(rename = "Bio/Epi")]
    BioEpi,
    #[serde(rename = "Comm")]
    Comm,
}

impl Topic {
    pub const ALL: [Topic; 11] = [
        Topic::MskSkin,
        Topic::Multi,
        Topic::ReproEndo,
        Topic::BehavNeuro,
        Topic::BloodImmune,
        Topic::Dev,
        Topic::Cardio,
        Topic::RespRenal,
        Topic::Gi,
        Topic::BioEpi,
        Topic::Comm,
    ];

    pub fn abbr(self) -> &'static str {
        match self {
            Topic::MskSkin => "MSK/Skin",
            Topic::Multi => "Multi",
            Topic::ReproEndo => "Repro/Endo",
            Topic::BehavNeuro => "Behav/Neuro",
            Topic::BloodImmune => "Blood/Immune",
            Topic::Dev => "Dev",
            Topic::Cardio => "Cardio",
            Topic::RespRenal => "Resp/Renal",
            Topic::Gi => "GI",
            Topic::BioEpi => "Bio/Epi",
            Topic::Comm => "Comm",
        }
    }

    pub fn full_name(self) -> &'static str {
        match self {
            Topic::MskSkin => "Musculoskeletal, Skin & Subcutaneous Tissue",
            Topic::Multi => "Multisystem Processes & Disorders",
            Topic::ReproEndo => "Reproductive & Endocrine Systems",
            Topic::BehavNeuro => "Behavioral Health & Nervous Systems/Special Senses",
            Topic::BloodImmune => "Blood & Lymphoreticular/Immune Systems",
            Topic::Dev => "Human Development",
            Topic::Cardio => "Cardiovascular System",
            Topic::RespRenal => "Respiratory & Renal/Urinary Systems",
            Topic::Gi => "Gastrointestinal System",
            Topic::BioEpi => "Biostatistics & Epidemiology/Population Health",
            Topic::Comm => "Social Sciences: Communication and Interpersonal Skills",
        }
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbr())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown topic label {0:?}")]
pub struct UnknownTopic(pub String);

impl FromStr for Topic {
    type Err = UnknownTopic;

    /// Accepts the abbreviation or the full name, exactly.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Topic::ALL
            .into_iter()
            .find(|t| t.abbr() == s || t.full_name() == s)
            .ok_or_else(|| UnknownTopic(s.to_string()))
    }
}
