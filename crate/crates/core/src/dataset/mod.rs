//! Tabular inputs: ratings, drug profiles, interactions and adverse events.

mod csv_io;
mod split;
mod synthetic;

pub use csv_io::{
    load_adverse_events, load_bundle, load_drugs, load_interactions, load_ratings,
    write_adverse_events, write_bundle, write_drugs, write_interactions, write_ratings, DrugLoad,
    ADVERSE_FILE, DRUGS_FILE, INTERACTIONS_FILE, RATINGS_FILE,
};
pub use split::{split_dataset, split_sizes, Split};
pub use synthetic::{
    gaussian_blobs, generate_synthetic, generate_synthetic_with_truth, PlantedRate, PlantedTruth, SyntheticConfig,
    SyntheticData,
};

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
    Unspecified,
}

impl Gender {
    /// Lenient parse: anything unrecognised becomes `Unspecified`.
    pub fn parse(s: &str) -> Gender {
        match s.trim().to_ascii_lowercase().as_str() {
            "female" | "f" | "woman" => Gender::Female,
            "male" | "m" | "man" => Gender::Male,
            _ => Gender::Unspecified,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
            Gender::Unspecified => "unspecified",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One review of one drug.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub user_id: String,
    pub age: u32,
    pub gender: Gender,
    pub is_caregiver: bool,
    pub condition_text: String,
    pub drug_name: String,
    /// 0..=10
    pub overall_rating: u8,
    /// Degree of effectiveness, 0..=4.
    pub effectiveness: u8,
    /// Degree of side effects, 0..=4.
    pub side_effect_severity: u8,
    pub comment: String,
}

/// Binary membership vectors for one drug.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrugProfile {
    pub name: String,
    pub categories: Vec<u8>,
    pub side_effects: Vec<u8>,
    pub benefits: Vec<u8>,
}

impl DrugProfile {
    /// Concatenated category, side-effect and benefit bits.
    pub fn feature_bits(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(self.feature_len());
        v.extend_from_slice(&self.categories);
        v.extend_from_slice(&self.side_effects);
        v.extend_from_slice(&self.benefits);
        v
    }

    pub fn feature_len(&self) -> usize {
        self.categories.len() + self.side_effects.len() + self.benefits.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Minor,
    Moderate,
    Major,
}

impl Severity {
    pub fn parse(s: &str) -> Option<Severity> {
        match s.trim().to_ascii_lowercase().as_str() {
            "major" => Some(Severity::Major),
            "moderate" => Some(Severity::Moderate),
            "minor" => Some(Severity::Minor),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Major => "major",
            Severity::Moderate => "moderate",
            Severity::Minor => "minor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub drug_a: String,
    pub drug_b: String,
    pub severity: Severity,
}

impl InteractionRecord {
    /// Order-independent key for the pair.
    pub fn key(&self) -> (String, String) {
        pair_key(&self.drug_a, &self.drug_b)
    }
}

pub(crate) fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdverseEvent {
    Death,
    Hospitalization,
    Disability,
    LifeThreatening,
}

impl AdverseEvent {
    pub const ALL: [AdverseEvent; 4] = [
        AdverseEvent::Death,
        AdverseEvent::Hospitalization,
        AdverseEvent::Disability,
        AdverseEvent::LifeThreatening,
    ];

    pub fn parse(s: &str) -> Option<AdverseEvent> {
        let norm: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .filter(|c| c.is_ascii_alphabetic())
            .collect();
        match norm.as_str() {
            "death" => Some(AdverseEvent::Death),
            "hospitalization" | "hospitalisation" => Some(AdverseEvent::Hospitalization),
            "disability" => Some(AdverseEvent::Disability),
            "lifethreatening" => Some(AdverseEvent::LifeThreatening),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AdverseEvent::Death => "Death",
            AdverseEvent::Hospitalization => "Hospitalization",
            AdverseEvent::Disability => "Disability",
            AdverseEvent::LifeThreatening => "Life-Threatening",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdverseEventRecord {
    pub drug_name: String,
    pub age: u32,
    pub gender: Gender,
    pub reaction: String,
    /// Never empty.
    pub events: BTreeSet<AdverseEvent>,
    pub other_drugs: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetBundle {
    pub ratings: Vec<RatingRecord>,
    pub drugs: Vec<DrugProfile>,
    pub interactions: Vec<InteractionRecord>,
    pub adverse_events: Vec<AdverseEventRecord>,
}

/// Outcome of [`DatasetBundle::validate`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub row_counts: BTreeMap<String, usize>,
    /// `(table, drug_name)` pairs that do not resolve to a drug profile.
    pub unresolved_drugs: Vec<(String, String)>,
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty() && self.unresolved_drugs.is_empty()
    }
}

impl DatasetBundle {
    pub fn drug_names(&self) -> Vec<String> {
        self.drugs.iter().map(|d| d.name.clone()).collect()
    }

    /// Checks cross-table references. Other-drug mentions in adverse events
    /// are free text and only produce warnings.
    pub fn validate(&self) -> ValidationReport {
        let known: HashSet<&str> = self.drugs.iter().map(|d| d.name.as_str()).collect();
        let mut report = ValidationReport::default();
        report
            .row_counts
            .insert(RATINGS_FILE.into(), self.ratings.len());
        report.row_counts.insert(DRUGS_FILE.into(), self.drugs.len());
        report
            .row_counts
            .insert(INTERACTIONS_FILE.into(), self.interactions.len());
        report
            .row_counts
            .insert(ADVERSE_FILE.into(), self.adverse_events.len());

        let mut seen = BTreeSet::new();
        let mut flag = |table: &str, name: &str, report: &mut ValidationReport| {
            if !known.contains(name) && seen.insert((table.to_string(), name.to_string())) {
                report
                    .unresolved_drugs
                    .push((table.to_string(), name.to_string()));
            }
        };
        for r in &self.ratings {
            flag(RATINGS_FILE, &r.drug_name, &mut report);
        }
        for i in &self.interactions {
            flag(INTERACTIONS_FILE, &i.drug_a, &mut report);
            flag(INTERACTIONS_FILE, &i.drug_b, &mut report);
        }
        for a in &self.adverse_events {
            flag(ADVERSE_FILE, &a.drug_name, &mut report);
        }

        let mut names = HashSet::new();
        for d in &self.drugs {
            if !names.insert(d.name.as_str()) {
                report
                    .errors
                    .push(format!("duplicate drug profile `{}`", d.name));
            }
        }
        if let Some(first) = self.drugs.first() {
            let shape = (
                first.categories.len(),
                first.side_effects.len(),
                first.benefits.len(),
            );
            for d in &self.drugs {
                if (d.categories.len(), d.side_effects.len(), d.benefits.len()) != shape {
                    report
                        .errors
                        .push(format!("drug `{}` has inconsistent vector lengths", d.name));
                }
            }
        }
        for i in &self.interactions {
            if i.drug_a == i.drug_b {
                report
                    .errors
                    .push(format!("self-interaction for `{}`", i.drug_a));
            }
        }
        report
    }
}
