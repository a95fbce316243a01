use crate::dataset::{AdverseEvent, AdverseEventRecord, Gender};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// One issued recommendation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationLogEntry {
    pub drug_name: String,
    pub gender: Gender,
    pub age: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AdverseRatios {
    pub death: f64,
    pub hospitalization: f64,
    pub disability: f64,
    pub recommendations: usize,
}

fn bucket(age: f64, width: f64) -> i64 {
    (age / width).floor() as i64
}

/// Share of recommendations whose (drug, gender, age bucket) has a recorded
/// death, hospitalization or disability in `ground_truth`.
pub fn adverse_ratios(
    log: &[RecommendationLogEntry],
    ground_truth: &[AdverseEventRecord],
    age_bucket_width: f64,
) -> Result<AdverseRatios> {
    if log.is_empty() {
        return Err(Error::Undefined("adverse ratios over zero recommendations".into()));
    }
    if !(age_bucket_width > 0.0 && age_bucket_width.is_finite()) {
        return Err(Error::arg("age bucket width must be finite and > 0"));
    }
    let mut outcomes: BTreeMap<(&str, Gender, i64), BTreeSet<AdverseEvent>> = BTreeMap::new();
    for r in ground_truth {
        outcomes
            .entry((r.drug_name.as_str(), r.gender, bucket(f64::from(r.age), age_bucket_width)))
            .or_default()
            .extend(r.events.iter().copied());
    }
    let mut counts = [0usize; 3];
    let kinds = [AdverseEvent::Death, AdverseEvent::Hospitalization, AdverseEvent::Disability];
    for entry in log {
        let key = (entry.drug_name.as_str(), entry.gender, bucket(entry.age, age_bucket_width));
        if let Some(events) = outcomes.get(&key) {
            for (c, kind) in counts.iter_mut().zip(kinds) {
                if events.contains(&kind) {
                    *c += 1;
                }
            }
        }
    }
    let n = log.len() as f64;
    Ok(AdverseRatios {
        death: counts[0] as f64 / n,
        hospitalization: counts[1] as f64 / n,
        disability: counts[2] as f64 / n,
        recommendations: log.len(),
    })
}
