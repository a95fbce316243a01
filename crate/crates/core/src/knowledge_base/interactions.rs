use crate::dataset::{pair_key, InteractionRecord, Severity};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Symmetric severity lookup over drug pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "IndexFile", into = "IndexFile")]
pub struct InteractionIndex {
    pairs: BTreeMap<(String, String), Severity>,
    known: BTreeSet<String>,
}

#[derive(Serialize, Deserialize)]
struct IndexFile {
    interactions: Vec<InteractionRecord>,
    known_drugs: Vec<String>,
}

impl From<IndexFile> for InteractionIndex {
    fn from(file: IndexFile) -> Self {
        InteractionIndex::new(&file.interactions).with_catalog(&file.known_drugs)
    }
}

impl From<InteractionIndex> for IndexFile {
    fn from(index: InteractionIndex) -> Self {
        IndexFile {
            interactions: index
                .pairs
                .into_iter()
                .map(|((a, b), severity)| InteractionRecord {
                    drug_a: a,
                    drug_b: b,
                    severity,
                })
                .collect(),
            known_drugs: index.known.into_iter().collect(),
        }
    }
}

impl InteractionIndex {
    /// Later duplicates of a pair keep the most severe rating.
    pub fn new(records: &[InteractionRecord]) -> Self {
        let mut pairs: BTreeMap<(String, String), Severity> = BTreeMap::new();
        let mut known = BTreeSet::new();
        for r in records {
            known.insert(r.drug_a.clone());
            known.insert(r.drug_b.clone());
            let e = pairs.entry(pair_key(&r.drug_a, &r.drug_b)).or_insert(r.severity);
            *e = (*e).max(r.severity);
        }
        InteractionIndex { pairs, known }
    }

    /// Marks catalogue drugs as known even if they have no interactions.
    pub fn with_catalog<'a>(mut self, drugs: impl IntoIterator<Item = &'a String>) -> Self {
        self.known.extend(drugs.into_iter().cloned());
        self
    }

    pub fn severity(&self, a: &str, b: &str) -> Option<Severity> {
        self.pairs.get(&pair_key(a, b)).copied()
    }

    pub fn is_known(&self, drug: &str) -> bool {
        self.known.contains(drug)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict", content = "pairs")]
pub enum InteractionVerdict {
    Clear,
    /// Moderate interactions, as (candidate, current drug) pairs.
    Warn(Vec<(String, String)>),
    /// Major interactions, as (candidate, current drug) pairs.
    Exclude(Vec<(String, String)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionCheck {
    pub verdict: InteractionVerdict,
    /// Drugs involved in the check that the index has never seen.
    pub unknown_drugs: Vec<String>,
}

/// Exclude on any major interaction, warn on moderate ones, otherwise clear.
pub fn check_interactions(candidate: &str, current_drugs: &[String], index: &InteractionIndex) -> InteractionCheck {
    let mut unknown = Vec::new();
    if !current_drugs.is_empty() && !index.is_known(candidate) {
        unknown.push(candidate.to_string());
    }
    let mut major = Vec::new();
    let mut moderate = Vec::new();
    for other in current_drugs {
        if !index.is_known(other) {
            unknown.push(other.clone());
            continue;
        }
        match index.severity(candidate, other) {
            Some(Severity::Major) => major.push((candidate.to_string(), other.clone())),
            Some(Severity::Moderate) => moderate.push((candidate.to_string(), other.clone())),
            Some(Severity::Minor) | None => {}
        }
    }
    let verdict = if !major.is_empty() {
        InteractionVerdict::Exclude(major)
    } else if !moderate.is_empty() {
        InteractionVerdict::Warn(moderate)
    } else {
        InteractionVerdict::Clear
    };
    InteractionCheck {
        verdict,
        unknown_drugs: unknown,
    }
}
