use super::pipeline::PipelineArtifacts;
use crate::dataset::{DrugProfile, Gender};
use crate::error::{Error, Result};
use crate::factorization::to_display;
use crate::knowledge_base::{apply_rules, Candidate, Patient, Violation};
use crate::textprep::default_preprocessor;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatientQuery {
    pub age: f64,
    pub gender: Gender,
    #[serde(default)]
    pub is_caregiver: bool,
    #[serde(default)]
    pub condition_text: String,
    #[serde(default)]
    pub current_drugs: Vec<String>,
    /// Free-text comment, used only when the pipeline was trained with
    /// comment features.
    #[serde(default)]
    pub comment: String,
}

impl PatientQuery {
    pub fn check(&self) -> Result<()> {
        if !(self.age >= 0.0 && self.age.is_finite()) {
            return Err(Error::Validation(vec![format!("age must be a finite value >= 0, got {}", self.age)]));
        }
        Ok(())
    }

    pub fn patient(&self) -> Patient {
        Patient {
            age: self.age,
            gender: self.gender,
            current_drugs: self.current_drugs.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub drug_name: String,
    pub score: f64,
    pub display_rating: f64,
    pub warnings: Vec<(String, String)>,
    pub rank: usize,
}

/// Ranked list plus what the filter removed and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendOutcome {
    pub cluster: usize,
    pub recommendations: Vec<Recommendation>,
    pub removed: Vec<(Candidate<f64>, Vec<Violation>)>,
    pub diagnostics: Vec<String>,
}

/// User cluster of a patient.
pub fn assign_patient(patient: &PatientQuery, artifacts: &PipelineArtifacts) -> Result<usize> {
    let pre = default_preprocessor();
    let x = artifacts.user_space.encode(
        &pre,
        patient.age,
        patient.gender,
        patient.is_caregiver,
        &patient.condition_text,
        &patient.comment,
    )?;
    artifacts.user_model.assign(&x)
}

/// Candidates for a cluster, best first, ties broken by drug order.
pub fn ranked_candidates(artifacts: &PipelineArtifacts, cluster: usize, exclude: &[String]) -> Result<Vec<Candidate<f64>>> {
    let scores = artifacts.factorization.predict_row(cluster)?;
    let mut order: Vec<usize> = (0..scores.len())
        .filter(|&j| !exclude.contains(&artifacts.drug_names[j]))
        .collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(order
        .into_iter()
        .map(|j| Candidate::new(artifacts.drug_names[j].clone(), scores[j]))
        .collect())
}

/// Top-`n` safe recommendations for a patient.
pub fn recommend(patient: &PatientQuery, artifacts: &PipelineArtifacts, n: usize) -> Result<RecommendOutcome> {
    recommend_with(patient, artifacts, n, true)
}

/// As [`recommend`]; `use_rules = false` skips the safety filter.
pub fn recommend_with(
    patient: &PatientQuery,
    artifacts: &PipelineArtifacts,
    n: usize,
    use_rules: bool,
) -> Result<RecommendOutcome> {
    if n == 0 {
        return Err(Error::arg("n must be >= 1"));
    }
    patient.check()?;
    let cluster = assign_patient(patient, artifacts)?;
    let candidates = ranked_candidates(artifacts, cluster, &patient.current_drugs)?;
    let mut diagnostics = Vec::new();
    let (kept, removed) = if use_rules {
        let outcome = apply_rules(&candidates, &patient.patient(), &artifacts.rules);
        if !outcome.unknown_drugs.is_empty() {
            diagnostics.push(format!(
                "no interaction data for: {}",
                outcome.unknown_drugs.join(", ")
            ));
        }
        (outcome.kept, outcome.removed)
    } else {
        (candidates, Vec::new())
    };
    if kept.is_empty() {
        diagnostics.push("no candidate drug survived the safety filter".to_string());
    }
    let recommendations = kept
        .into_iter()
        .take(n)
        .enumerate()
        .map(|(i, c)| Recommendation {
            display_rating: to_display(c.score),
            drug_name: c.drug_name,
            score: c.score,
            warnings: c.warnings,
            rank: i + 1,
        })
        .collect();
    Ok(RecommendOutcome {
        cluster,
        recommendations,
        removed,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColdStartEstimate {
    pub user_cluster: usize,
    pub score: f64,
    /// The drug cluster had no observations for this user cluster; `score`
    /// is the global mean.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColdStart {
    pub drug_cluster: usize,
    pub estimates: Vec<ColdStartEstimate>,
}

/// Scores an unseen drug by the observed ratings of its drug cluster.
pub fn cold_start_score(new_drug: &DrugProfile, artifacts: &PipelineArtifacts) -> Result<ColdStart> {
    let raw: Vec<f64> = new_drug.feature_bits().into_iter().map(f64::from).collect();
    let x = artifacts.drug_scaler.transform(&raw)?;
    let drug_cluster = artifacts.drug_model.assign(&x)?;
    let members: Vec<usize> = artifacts
        .drug_model
        .labels
        .iter()
        .enumerate()
        .filter(|&(_, &l)| l == drug_cluster)
        .map(|(j, _)| j)
        .collect();
    let m = &artifacts.ratings;
    let (mut total, mut count) = (0.0, 0u64);
    for k in 0..m.rows * m.cols {
        if m.mask[k] == 1 {
            total += m.values[k] * f64::from(m.counts[k]);
            count += u64::from(m.counts[k]);
        }
    }
    let global = if count > 0 { total / count as f64 } else { 0.0 };
    let estimates = (0..m.rows)
        .map(|c| {
            let (mut s, mut n) = (0.0, 0u64);
            for &j in &members {
                let k = m.idx(c, j);
                if m.mask[k] == 1 {
                    s += m.values[k] * f64::from(m.counts[k]);
                    n += u64::from(m.counts[k]);
                }
            }
            if n > 0 {
                ColdStartEstimate {
                    user_cluster: c,
                    score: s / n as f64,
                    fallback: false,
                }
            } else {
                ColdStartEstimate {
                    user_cluster: c,
                    score: global,
                    fallback: true,
                }
            }
        })
        .collect();
    Ok(ColdStart {
        drug_cluster,
        estimates,
    })
}
