use crate::clustering::StandardScaler;
use crate::dataset::{DrugProfile, Gender, RatingRecord};
use crate::error::Result;
use crate::textprep::{build_vocabulary, TextPreprocessor, Vocabulary};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Per-user attributes gathered from all of that user's ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    pub user_id: String,
    pub age: f64,
    pub gender: Gender,
    pub is_caregiver: bool,
    pub condition_tokens: BTreeSet<String>,
    pub comment_tokens: BTreeSet<String>,
}

/// Groups ratings by user, in order of first appearance. Demographics come
/// from the user's first rating; text tokens are pooled over all of them.
pub fn user_profiles(ratings: &[RatingRecord], pre: &TextPreprocessor, with_comments: bool) -> Vec<UserProfile> {
    let mut order: Vec<UserProfile> = Vec::new();
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for r in ratings {
        let i = *index.entry(r.user_id.as_str()).or_insert_with(|| {
            order.push(UserProfile {
                user_id: r.user_id.clone(),
                age: r.age as f64,
                gender: r.gender,
                is_caregiver: r.is_caregiver,
                condition_tokens: BTreeSet::new(),
                comment_tokens: BTreeSet::new(),
            });
            order.len() - 1
        });
        let p = &mut order[i];
        p.condition_tokens.extend(pre.preprocess(&r.condition_text));
        if with_comments {
            p.comment_tokens.extend(pre.preprocess(&r.comment));
        }
    }
    order
}

/// Maps a user to a feature vector: gender one-hot, age, caregiver flag,
/// condition bag-of-words and optionally comment bag-of-words, all
/// standardized on the training users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserFeatureSpace {
    pub condition_vocabulary: Vocabulary,
    pub comment_vocabulary: Option<Vocabulary>,
    pub scaler: StandardScaler<f64>,
}

fn bow(vocab: &Vocabulary, tokens: &BTreeSet<String>) -> Vec<f64> {
    vocab
        .terms
        .iter()
        .map(|(t, _)| if tokens.contains(t) { 1.0 } else { 0.0 })
        .collect()
}

fn raw_user_features(
    condition_vocabulary: &Vocabulary,
    comment_vocabulary: Option<&Vocabulary>,
    age: f64,
    gender: Gender,
    is_caregiver: bool,
    conditions: &BTreeSet<String>,
    comments: &BTreeSet<String>,
) -> Vec<f64> {
    let mut v = vec![
        (gender == Gender::Female) as u8 as f64,
        (gender == Gender::Male) as u8 as f64,
        (gender == Gender::Unspecified) as u8 as f64,
        age,
        is_caregiver as u8 as f64,
    ];
    v.extend(bow(condition_vocabulary, conditions));
    if let Some(cv) = comment_vocabulary {
        v.extend(bow(cv, comments));
    }
    v
}

impl UserFeatureSpace {
    /// Builds vocabularies and the scaler from training users and returns
    /// their scaled feature rows alongside.
    pub fn fit(profiles: &[UserProfile], min_frequency: usize, with_comments: bool) -> Result<(Self, Vec<Vec<f64>>)> {
        let conditions: Vec<Vec<String>> = profiles.iter().map(|p| p.condition_tokens.iter().cloned().collect()).collect();
        let condition_vocabulary = build_vocabulary(&conditions, min_frequency);
        let comment_vocabulary = with_comments.then(|| {
            let comments: Vec<Vec<String>> = profiles.iter().map(|p| p.comment_tokens.iter().cloned().collect()).collect();
            build_vocabulary(&comments, min_frequency)
        });
        let raw: Vec<Vec<f64>> = profiles
            .iter()
            .map(|p| {
                raw_user_features(
                    &condition_vocabulary,
                    comment_vocabulary.as_ref(),
                    p.age,
                    p.gender,
                    p.is_caregiver,
                    &p.condition_tokens,
                    &p.comment_tokens,
                )
            })
            .collect();
        let scaler = StandardScaler::fit(&raw)?;
        let scaled = scaler.transform_all(&raw)?;
        Ok((
            UserFeatureSpace {
                condition_vocabulary,
                comment_vocabulary,
                scaler,
            },
            scaled,
        ))
    }

    pub fn dim(&self) -> usize {
        self.scaler.mean.len()
    }

    /// Scaled features for a new patient description.
    pub fn encode(
        &self,
        pre: &TextPreprocessor,
        age: f64,
        gender: Gender,
        is_caregiver: bool,
        condition_text: &str,
        comment_text: &str,
    ) -> Result<Vec<f64>> {
        let conditions: BTreeSet<String> = pre.preprocess(condition_text).into_iter().collect();
        let comments: BTreeSet<String> = pre.preprocess(comment_text).into_iter().collect();
        let raw = raw_user_features(
            &self.condition_vocabulary,
            self.comment_vocabulary.as_ref(),
            age,
            gender,
            is_caregiver,
            &conditions,
            &comments,
        );
        self.scaler.transform(&raw)
    }
}

/// Drug bit-vectors as reals.
pub fn raw_drug_features(drugs: &[DrugProfile]) -> Vec<Vec<f64>> {
    drugs
        .iter()
        .map(|d| d.feature_bits().into_iter().map(f64::from).collect())
        .collect()
}
