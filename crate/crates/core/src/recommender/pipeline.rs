use super::features::{raw_drug_features, user_profiles, UserFeatureSpace};
use crate::clustering::{compact_by_cluster, ukmeans_fit, ClusterModel, MinMaxScaler, UKMeansParams};
use crate::dataset::{DatasetBundle, RatingRecord};
use crate::error::{Error, Result, StageExt};
use crate::factorization::{train, CombineRule, FactorizationModel, LossTrace, SparseRatingMatrix, TrainConfig};
use crate::knowledge_base::{derive_rules, exposures_from_ratings, Exposures, RuleConfig, SafetyRuleSet};
use crate::seed::{derive_seed, ALL_STAGES, STAGE_DRUG_CLUSTERING, STAGE_USER_CLUSTERING};
use crate::textprep::{
    compute_cur, default_lexicon, default_preprocessor, polarity, CurInputs, CurMode, SentimentLexicon,
    TextPreprocessor, DEFAULT_MIN_FREQUENCY,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Master seed. Per-stage seeds are derived from it; the `seed` fields
    /// of the nested clustering and training configs are ignored.
    pub seed: u64,
    pub min_frequency: usize,
    /// Adds a comment bag-of-words to the user features.
    pub include_comments: bool,
    pub cur_mode: CurMode,
    pub user_clustering: UKMeansParams,
    pub drug_clustering: UKMeansParams,
    pub training: TrainConfig,
    pub combine_rule: CombineRule,
    pub rules: RuleConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            min_frequency: DEFAULT_MIN_FREQUENCY,
            include_comments: false,
            cur_mode: CurMode::default(),
            user_clustering: UKMeansParams::default(),
            drug_clustering: UKMeansParams::default(),
            training: TrainConfig {
                learning_rate: 0.2,
                epochs: 1000,
                ..TrainConfig::default()
            },
            combine_rule: CombineRule::default(),
            rules: RuleConfig::default(),
        }
    }
}

/// Everything a trained pipeline needs to answer queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineArtifacts {
    pub user_space: UserFeatureSpace,
    /// Training users in the order of `user_model.labels`.
    pub user_ids: Vec<String>,
    pub user_model: ClusterModel<f64>,
    pub drug_names: Vec<String>,
    pub drug_scaler: MinMaxScaler<f64>,
    /// Scaled drug features, one row per entry of `drug_names`.
    pub drug_features: Vec<Vec<f64>>,
    pub drug_model: ClusterModel<f64>,
    /// Cluster × drug mean CUR.
    pub ratings: SparseRatingMatrix<f64>,
    pub factorization: FactorizationModel<f64>,
    pub loss_trace: LossTrace,
    pub rules: SafetyRuleSet,
    pub config: PipelineConfig,
    pub seeds: BTreeMap<String, u64>,
}

impl PipelineArtifacts {
    pub fn drug_index(&self, name: &str) -> Option<usize> {
        self.drug_names.iter().position(|d| d == name)
    }

    /// Checks that the component artifacts agree on their dimensions.
    pub fn check(&self) -> Result<()> {
        let mut problems = Vec::new();
        let k = self.user_model.final_k;
        let m = self.drug_names.len();
        if self.user_model.dim() != self.user_space.dim() {
            problems.push("user cluster centers do not match the user feature space".to_string());
        }
        if self.user_model.labels.len() != self.user_ids.len() {
            problems.push("user labels and user ids differ in length".to_string());
        }
        if self.drug_features.len() != m || self.drug_model.labels.len() != m {
            problems.push("drug features or drug clusters do not cover the drug list".to_string());
        }
        if self.drug_features.iter().any(|r| r.len() != self.drug_scaler.min.len()) {
            problems.push("drug features do not match the drug scaler".to_string());
        }
        if (self.ratings.rows, self.ratings.cols) != (k, m) {
            problems.push(format!(
                "rating matrix is {}×{}, expected {k}×{m}",
                self.ratings.rows, self.ratings.cols
            ));
        }
        if self.factorization.clusters() != k || self.factorization.drugs() != m {
            problems.push("factorization model does not match the rating matrix".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

/// Per-rating CUR from the overall rating, effectiveness, side-effect
/// severity and comment polarity.
pub fn rating_cur(
    r: &RatingRecord,
    pre: &TextPreprocessor,
    lexicon: &SentimentLexicon,
    mode: CurMode,
) -> Result<f64> {
    let puc = polarity(&pre.preprocess(&r.comment), lexicon);
    compute_cur(
        CurInputs::new(
            f64::from(r.overall_rating),
            f64::from(r.effectiveness),
            f64::from(r.side_effect_severity),
            puc,
        ),
        mode,
    )
}

/// Runs the training stages in order: text preprocessing, CUR, user and
/// drug clustering, matrix compaction, factorization and rule derivation.
///
/// Gender rules use `exposures` when given, else counts of ratings per
/// (drug, gender) in the bundle.
pub fn build_pipeline(
    bundle: &DatasetBundle,
    config: &PipelineConfig,
    exposures: Option<&Exposures>,
) -> Result<PipelineArtifacts> {
    let report = bundle.validate();
    if !report.is_ok() {
        let mut problems = report.errors.clone();
        problems.extend(
            report
                .unresolved_drugs
                .iter()
                .map(|(table, drug)| format!("{table} references unknown drug `{drug}`")),
        );
        return Err(Error::Validation(problems)).stage("dataset");
    }
    if bundle.ratings.is_empty() || bundle.drugs.is_empty() {
        return Err(Error::Validation(vec!["need at least one rating and one drug".into()])).stage("dataset");
    }

    let pre = default_preprocessor();
    let lexicon = default_lexicon();
    let seeds: BTreeMap<String, u64> = ALL_STAGES
        .iter()
        .map(|s| (s.to_string(), derive_seed(config.seed, s)))
        .collect();

    let profiles = user_profiles(&bundle.ratings, &pre, config.include_comments);
    let (user_space, user_rows) =
        UserFeatureSpace::fit(&profiles, config.min_frequency, config.include_comments).stage("textprep")?;

    let curs = bundle
        .ratings
        .iter()
        .map(|r| rating_cur(r, &pre, &lexicon, config.cur_mode))
        .collect::<Result<Vec<f64>>>()
        .stage("cur")?;

    let user_params = UKMeansParams {
        seed: seeds[STAGE_USER_CLUSTERING],
        ..config.user_clustering
    };
    let user_model = ukmeans_fit(&user_rows, user_params).stage("user_clustering")?;

    let drug_names = bundle.drug_names();
    let raw_drugs = raw_drug_features(&bundle.drugs);
    let drug_scaler = MinMaxScaler::fit(&raw_drugs).stage("drug_clustering")?;
    let drug_features = drug_scaler.transform_all(&raw_drugs).stage("drug_clustering")?;
    let drug_params = UKMeansParams {
        seed: seeds[STAGE_DRUG_CLUSTERING],
        ..config.drug_clustering
    };
    let drug_model = ukmeans_fit(&drug_features, drug_params).stage("drug_clustering")?;

    let user_ids: Vec<String> = profiles.iter().map(|p| p.user_id.clone()).collect();
    let user_label: HashMap<&str, usize> = user_ids
        .iter()
        .zip(&user_model.labels)
        .map(|(u, &l)| (u.as_str(), l))
        .collect();
    let labelled: Vec<(usize, &str, f64)> = bundle
        .ratings
        .iter()
        .zip(&curs)
        .map(|(r, &c)| (user_label[r.user_id.as_str()], r.drug_name.as_str(), c))
        .collect();
    let ratings = compact_by_cluster(&labelled, user_model.final_k, &drug_names).stage("compaction")?;

    let training = TrainConfig {
        seed: config.seed,
        ..config.training.clone()
    };
    let model = FactorizationModel::new(
        user_model.centers.clone(),
        drug_features.clone(),
        config.combine_rule,
        training.clone(),
    )
    .stage("factorization")?;
    let (factorization, loss_trace) = train(&model, &ratings, &training).stage("factorization")?;

    let derived_exposures;
    let exposures = match exposures {
        Some(e) => e,
        None => {
            derived_exposures = exposures_from_ratings(&bundle.ratings);
            &derived_exposures
        }
    };
    let rules = derive_rules(
        &bundle.adverse_events,
        &bundle.interactions,
        exposures,
        &drug_names,
        &config.rules,
    )
    .stage("rules")?;

    let artifacts = PipelineArtifacts {
        user_space,
        user_ids,
        user_model,
        drug_names,
        drug_scaler,
        drug_features,
        drug_model,
        ratings,
        factorization,
        loss_trace,
        rules,
        config: PipelineConfig {
            training,
            ..config.clone()
        },
        seeds,
    };
    artifacts.check().stage("artifacts")?;
    Ok(artifacts)
}
