use super::adverse::{adverse_ratios, AdverseRatios, RecommendationLogEntry};
use super::hits::{cumulative_hit_rate, hit_rate, TestSample, TopNLists};
use super::metrics::{binarize_and_count, metrics};
use super::report::{AdverseAblation, MetricsReport, ModelReport, RocCurves, ThresholdValue};
use super::roc::roc_auc;
use crate::dataset::{split_dataset, AdverseEventRecord, DatasetBundle, RatingRecord};
use crate::error::{Error, Result, StageExt};
use crate::factorization::{fit_baseline_mf, to_display, BaselineMf, SparseRatingMatrix, TrainConfig};
use crate::knowledge_base::{apply_rules, exposures_from_ratings, Exposures};
use crate::recommender::{
    assign_patient, build_pipeline, rating_cur, ranked_candidates, PatientQuery, PipelineArtifacts, PipelineConfig,
};
use crate::seed::{derive_seed, STAGE_ADVERSE_SPLIT, STAGE_BASELINE, STAGE_SPLIT};
use crate::textprep::{default_lexicon, default_preprocessor};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub train_fraction: f64,
    pub validation_fraction: f64,
    pub test_fraction: f64,
    /// Share of adverse-event reports used to derive rules; the rest is
    /// ground truth for the adverse ratios.
    pub adverse_rule_fraction: f64,
    pub top_n: usize,
    /// Display-scale cut for binarizing predicted and actual ratings.
    pub relevance_threshold: f64,
    /// Display-scale cut for the cumulative hit rate.
    pub cumulative_threshold: f64,
    /// Extra thresholds reported on the cumulative hit-rate curve.
    pub curve_thresholds: Vec<f64>,
    pub age_bucket_width: f64,
    pub baseline_rank: usize,
    pub baseline: TrainConfig,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            train_fraction: 0.7,
            validation_fraction: 0.2,
            test_fraction: 0.1,
            adverse_rule_fraction: 0.8,
            top_n: 10,
            relevance_threshold: 4.0,
            cumulative_threshold: 4.0,
            curve_thresholds: (0..=10).map(f64::from).collect(),
            age_bucket_width: 10.0,
            baseline_rank: 8,
            baseline: TrainConfig {
                learning_rate: 0.01,
                epochs: 2000,
                init_range: 0.5,
                ..TrainConfig::default()
            },
        }
    }
}

impl EvaluationConfig {
    pub fn check(&self) -> Result<()> {
        if self.top_n == 0 {
            return Err(Error::arg("top_n must be >= 1"));
        }
        if !(self.adverse_rule_fraction > 0.0 && self.adverse_rule_fraction < 1.0) {
            return Err(Error::arg("adverse_rule_fraction must lie in (0, 1)"));
        }
        if !(self.age_bucket_width > 0.0 && self.age_bucket_width.is_finite()) {
            return Err(Error::arg("age_bucket_width must be finite and > 0"));
        }
        if self.baseline_rank == 0 {
            return Err(Error::arg("baseline_rank must be >= 1"));
        }
        self.baseline.check()
    }
}

/// Training bundle and held-out data for one evaluation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Holdout {
    /// Training ratings and the rule-extraction share of adverse events.
    pub train: DatasetBundle,
    pub validation: Vec<RatingRecord>,
    pub test: Vec<RatingRecord>,
    pub adverse_test: Vec<AdverseEventRecord>,
    /// Per-(drug, gender) exposure matching the rule-extraction share:
    /// rating counts over the full bundle scaled by `adverse_rule_fraction`.
    pub exposures: Exposures,
}

/// Seeded rating split and adverse-event split.
pub fn holdout(bundle: &DatasetBundle, master_seed: u64, config: &EvaluationConfig) -> Result<Holdout> {
    config.check()?;
    let fractions = (config.train_fraction, config.validation_fraction, config.test_fraction);
    let ratings = split_dataset(&bundle.ratings, fractions, derive_seed(master_seed, STAGE_SPLIT))?;
    let f = config.adverse_rule_fraction;
    let adverse = split_dataset(
        &bundle.adverse_events,
        (f, 0.0, 1.0 - f),
        derive_seed(master_seed, STAGE_ADVERSE_SPLIT),
    )?;
    let exposures = exposures_from_ratings(&bundle.ratings)
        .into_iter()
        .map(|(k, v)| (k, v * f))
        .collect();
    Ok(Holdout {
        train: DatasetBundle {
            ratings: ratings.train,
            drugs: bundle.drugs.clone(),
            interactions: bundle.interactions.clone(),
            adverse_events: adverse.train,
        },
        validation: ratings.validation,
        test: ratings.test,
        adverse_test: adverse.test,
        exposures,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    pub report: MetricsReport,
    pub roc: RocCurves,
    pub baseline: BaselineMf<f64>,
}

fn query(r: &RatingRecord, current_drugs: Vec<String>) -> PatientQuery {
    PatientQuery {
        age: f64::from(r.age),
        gender: r.gender,
        is_caregiver: r.is_caregiver,
        condition_text: r.condition_text.clone(),
        current_drugs,
        comment: String::new(),
    }
}

struct Scored {
    predicted: Vec<f64>,
    lists: TopNLists,
}

fn model_report(
    name: &str,
    scored: &Scored,
    samples: &[TestSample],
    config: &EvaluationConfig,
    notes: &mut Vec<String>,
) -> Result<(ModelReport, Vec<super::roc::RocPoint>)> {
    let actual: Vec<f64> = samples.iter().map(|s| s.rating).collect();
    let confusion = binarize_and_count(&scored.predicted, &actual, config.relevance_threshold)?;
    let labels: Vec<bool> = actual.iter().map(|&a| a >= config.relevance_threshold).collect();
    let (roc, auc) = match roc_auc(&scored.predicted, &labels) {
        Ok((pts, auc)) => (pts, Some(auc)),
        Err(Error::Undefined(msg)) => {
            notes.push(format!("{name}: {msg}"));
            (Vec::new(), None)
        }
        Err(e) => return Err(e),
    };
    let curve = config
        .curve_thresholds
        .iter()
        .map(|&t| {
            Ok(ThresholdValue {
                threshold: t,
                value: cumulative_hit_rate(&scored.lists, samples, t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((
        ModelReport {
            name: name.to_string(),
            confusion,
            metrics: metrics(&confusion),
            auc,
            hit_rate: hit_rate(&scored.lists, samples)?,
            cumulative_hit_rate: cumulative_hit_rate(&scored.lists, samples, config.cumulative_threshold)?,
            cumulative_curve: curve,
        },
        roc,
    ))
}

fn top_names<'a>(names: impl Iterator<Item = &'a String>, n: usize) -> Vec<String> {
    names.take(n).cloned().collect()
}

/// Scores the held-out ratings with the trained pipeline and with the
/// conventional-MF baseline, and runs the knowledge-base ablation.
///
/// Each test user's top-N list excludes drugs that user rated in the
/// training split; those drugs also act as the user's current drugs for
/// the interaction rules.
pub fn evaluate(
    artifacts: &PipelineArtifacts,
    holdout: &Holdout,
    master_seed: u64,
    config: &EvaluationConfig,
) -> Result<EvaluationResult> {
    config.check()?;
    if holdout.test.is_empty() {
        return Err(Error::Undefined("the test split is empty".into()));
    }
    let pre = default_preprocessor();
    let lexicon = default_lexicon();
    let mode = artifacts.config.cur_mode;
    let display = |r: &RatingRecord| rating_cur(r, &pre, &lexicon, mode).map(to_display);

    let samples = holdout
        .test
        .iter()
        .map(|r| {
            Ok(TestSample {
                user_id: r.user_id.clone(),
                drug_name: r.drug_name.clone(),
                rating: display(r)?,
            })
        })
        .collect::<Result<Vec<_>>>()
        .stage("evaluation")?;

    let mut rated: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for r in &holdout.train.ratings {
        rated.entry(r.user_id.as_str()).or_default().push(r.drug_name.clone());
    }
    let mut first_test: BTreeMap<&str, &RatingRecord> = BTreeMap::new();
    for r in &holdout.test {
        first_test.entry(r.user_id.as_str()).or_insert(r);
    }
    let known = |drug: &str| {
        artifacts
            .drug_index(drug)
            .ok_or_else(|| Error::Validation(vec![format!("test rating references unknown drug `{drug}`")]))
    };

    // Proposed model.
    let mut proposed = Scored {
        predicted: Vec::with_capacity(samples.len()),
        lists: TopNLists::new(),
    };
    for r in &holdout.test {
        let cluster = assign_patient(&query(r, Vec::new()), artifacts)?;
        let j = known(&r.drug_name).stage("evaluation")?;
        proposed.predicted.push(to_display(artifacts.factorization.predict(cluster, j)?));
    }
    let mut log_without = Vec::new();
    let mut log_with = Vec::new();
    for (&user, r) in &first_test {
        let current = rated.get(user).cloned().unwrap_or_default();
        let q = query(r, current.clone());
        let cluster = assign_patient(&q, artifacts)?;
        let ranked = ranked_candidates(artifacts, cluster, &current)?;
        let plain = top_names(ranked.iter().map(|c| &c.drug_name), config.top_n);
        let filtered = apply_rules(&ranked, &q.patient(), &artifacts.rules);
        let safe = top_names(filtered.kept.iter().map(|c| &c.drug_name), config.top_n);
        let entry = |d: &String| RecommendationLogEntry {
            drug_name: d.clone(),
            gender: r.gender,
            age: f64::from(r.age),
        };
        log_without.extend(plain.iter().map(entry));
        log_with.extend(safe.iter().map(entry));
        proposed.lists.insert(user.to_string(), plain);
    }

    // Conventional MF over the raw user × drug matrix.
    let users: Vec<&str> = {
        let set: BTreeSet<&str> = holdout.train.ratings.iter().map(|r| r.user_id.as_str()).collect();
        set.into_iter().collect()
    };
    let row_of: BTreeMap<&str, usize> = users.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let mut sums: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    for r in &holdout.train.ratings {
        let j = known(&r.drug_name).stage("baseline")?;
        let cur = rating_cur(r, &pre, &lexicon, mode).stage("baseline")?;
        let e = sums.entry((row_of[r.user_id.as_str()], j)).or_default();
        e.0 += cur;
        e.1 += 1;
    }
    let mut matrix = SparseRatingMatrix::empty(users.len(), artifacts.drug_names.len());
    for (&(i, j), &(s, n)) in &sums {
        matrix.set(i, j, s / n as f64);
    }
    let baseline_config = TrainConfig {
        seed: derive_seed(master_seed, STAGE_BASELINE),
        ..config.baseline.clone()
    };
    let baseline = fit_baseline_mf(&matrix, config.baseline_rank, &baseline_config).stage("baseline")?;
    let m = artifacts.drug_names.len();
    let mean_row: Vec<f64> = (0..m)
        .map(|j| {
            let total: f64 = (0..users.len()).map(|i| baseline.predict(i, j).unwrap_or(0.0)).sum();
            total / users.len().max(1) as f64
        })
        .collect();
    let baseline_row = |user: &str| -> Vec<f64> {
        match row_of.get(user) {
            Some(&i) => (0..m).map(|j| baseline.predict(i, j).unwrap_or(0.0)).collect(),
            None => mean_row.clone(),
        }
    };
    let mut base = Scored {
        predicted: Vec::with_capacity(samples.len()),
        lists: TopNLists::new(),
    };
    for r in &holdout.test {
        let j = known(&r.drug_name).stage("baseline")?;
        base.predicted.push(to_display(baseline_row(&r.user_id)[j]));
    }
    for &user in first_test.keys() {
        let row = baseline_row(user);
        let current = rated.get(user).cloned().unwrap_or_default();
        let mut order: Vec<usize> = (0..m)
            .filter(|&j| !current.contains(&artifacts.drug_names[j]))
            .collect();
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        base.lists.insert(
            user.to_string(),
            top_names(order.iter().map(|&j| &artifacts.drug_names[j]), config.top_n),
        );
    }

    let mut notes = Vec::new();
    let (proposed_report, proposed_roc) = model_report("proposed", &proposed, &samples, config, &mut notes)?;
    let (baseline_report, baseline_roc) = model_report("baseline_mf", &base, &samples, config, &mut notes)?;
    let ratios = |log: &[RecommendationLogEntry], what: &str, notes: &mut Vec<String>| -> Result<Option<AdverseRatios>> {
        match adverse_ratios(log, &holdout.adverse_test, config.age_bucket_width) {
            Ok(r) => Ok(Some(r)),
            Err(Error::Undefined(msg)) => {
                notes.push(format!("{what}: {msg}"));
                Ok(None)
            }
            Err(e) => Err(e),
        }
    };
    let adverse = AdverseAblation {
        without_kb: ratios(&log_without, "adverse without knowledge base", &mut notes)?,
        with_kb: ratios(&log_with, "adverse with knowledge base", &mut notes)?,
        ground_truth_reports: holdout.adverse_test.len(),
    };
    Ok(EvaluationResult {
        report: MetricsReport {
            proposed: proposed_report,
            baseline: baseline_report,
            adverse,
            test_samples: samples.len(),
            test_users: first_test.len(),
            top_n: config.top_n,
            relevance_threshold: config.relevance_threshold,
            cumulative_threshold: config.cumulative_threshold,
            notes,
        },
        roc: RocCurves {
            proposed: proposed_roc,
            baseline: baseline_roc,
        },
        baseline,
    })
}

/// Holdout, training and evaluation in one call.
pub fn run_evaluation(
    bundle: &DatasetBundle,
    pipeline: &PipelineConfig,
    config: &EvaluationConfig,
) -> Result<(PipelineArtifacts, EvaluationResult)> {
    let h = holdout(bundle, pipeline.seed, config)?;
    let artifacts = build_pipeline(&h.train, pipeline, Some(&h.exposures))?;
    let result = evaluate(&artifacts, &h, pipeline.seed, config)?;
    Ok((artifacts, result))
}
