use crate::dataset::AdverseEventRecord;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Two-sided 97.5% standard normal quantile.
pub const Z_975: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgeRule {
    pub drug_name: String,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub stddev: f64,
    pub sample_count: usize,
    pub low: f64,
    pub high: f64,
}

impl AgeRule {
    pub fn from_ages(drug_name: &str, ages: &[f64]) -> Option<Self> {
        let n = ages.len();
        if n < 2 {
            return None;
        }
        let mean = ages.iter().sum::<f64>() / n as f64;
        let var = ages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let stddev = var.sqrt();
        let half = Z_975 * stddev / (n as f64).sqrt();
        Some(AgeRule {
            drug_name: drug_name.to_string(),
            mean,
            stddev,
            sample_count: n,
            low: mean - half,
            high: mean + half,
        })
    }

    /// Closed-interval membership.
    pub fn contains(&self, age: f64) -> bool {
        age >= self.low && age <= self.high
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AgeRules {
    pub rules: BTreeMap<String, AgeRule>,
    /// Drugs with fewer than two adverse-event records, hence no rule.
    pub skipped: Vec<String>,
}

pub fn derive_age_rules(adverse_events: &[AdverseEventRecord]) -> AgeRules {
    let mut ages: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for e in adverse_events {
        ages.entry(e.drug_name.as_str()).or_default().push(e.age as f64);
    }
    let mut out = AgeRules::default();
    for (drug, a) in ages {
        match AgeRule::from_ages(drug, &a) {
            Some(rule) => {
                out.rules.insert(drug.to_string(), rule);
            }
            None => out.skipped.push(drug.to_string()),
        }
    }
    out
}
