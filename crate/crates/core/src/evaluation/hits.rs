use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A held-out rating: who, which drug, and the actual rating on the
/// display scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSample {
    pub user_id: String,
    pub drug_name: String,
    pub rating: f64,
}

/// Per-user top-N lists.
pub type TopNLists = BTreeMap<String, Vec<String>>;

fn is_hit(lists: &TopNLists, s: &TestSample) -> bool {
    lists.get(&s.user_id).is_some_and(|l| l.contains(&s.drug_name))
}

/// Fraction of test samples whose drug appears in their user's list.
pub fn hit_rate(lists: &TopNLists, samples: &[TestSample]) -> Result<f64> {
    cumulative_hit_rate(lists, samples, f64::NEG_INFINITY)
}

/// As [`hit_rate`], counting only hits whose actual rating is at least
/// `threshold`. The denominator is still every test sample.
pub fn cumulative_hit_rate(lists: &TopNLists, samples: &[TestSample], threshold: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Undefined("hit rate over zero test samples".into()));
    }
    let hits = samples
        .iter()
        .filter(|s| s.rating >= threshold && is_hit(lists, s))
        .count();
    Ok(hits as f64 / samples.len() as f64)
}
