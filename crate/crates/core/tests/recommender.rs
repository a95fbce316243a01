use pharmarec::clustering::ClusterModel;
use pharmarec::dataset::{generate_synthetic_with_truth, DrugProfile, Gender, SyntheticConfig, SyntheticData};
use pharmarec::factorization::SparseRatingMatrix;
use pharmarec::knowledge_base::{violations, AllowedGenders, GenderRule, SafetyRuleSet};
use pharmarec::recommender::*;
use pharmarec::Error;

fn small() -> SyntheticConfig {
    SyntheticConfig {
        users: 150,
        drugs: 20,
        user_clusters: 3,
        preferred_per_cluster: 3,
        ..SyntheticConfig::default()
    }
}

fn trained(seed: u64) -> (SyntheticData, PipelineArtifacts) {
    let data = generate_synthetic_with_truth(&small(), seed).unwrap();
    let cfg = PipelineConfig {
        seed,
        ..PipelineConfig::default()
    };
    let artifacts = build_pipeline(&data.bundle, &cfg, None).unwrap();
    (data, artifacts)
}

fn query(data: &SyntheticData, user_index: usize, current: &[&str]) -> PatientQuery {
    let r = &data.bundle.ratings[user_index * small().ratings_per_user];
    PatientQuery {
        age: f64::from(r.age),
        gender: r.gender,
        is_caregiver: r.is_caregiver,
        condition_text: r.condition_text.clone(),
        current_drugs: current.iter().map(|s| s.to_string()).collect(),
        comment: String::new(),
    }
}

#[test]
fn pipeline_is_deterministic() {
    let (_, a) = trained(3);
    let (_, b) = trained(3);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    a.check().unwrap();
    assert_eq!(a.seeds.len(), 8);
}

#[test]
fn unknown_drug_is_a_stage_labelled_validation_error() {
    let mut data = generate_synthetic_with_truth(&small(), 1).unwrap();
    data.bundle.ratings[0].drug_name = "Nonexistent".into();
    let err = build_pipeline(&data.bundle, &PipelineConfig::default(), None).unwrap_err();
    assert!(err.is_validation());
    match err {
        Error::Stage { stage, source } => {
            assert_eq!(stage, "dataset");
            assert!(source.to_string().contains("Nonexistent"));
        }
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn recommendations_are_ranked_filtered_and_exclude_current_drugs() {
    let (data, a) = trained(5);
    for u in 0..30 {
        let current = ["Drug001", "Drug007"];
        let q = query(&data, u, &current);
        let out = recommend(&q, &a, 100).unwrap();
        let recs = &out.recommendations;
        for (i, r) in recs.iter().enumerate() {
            assert_eq!(r.rank, i + 1);
            assert!(r.score > 0.0 && r.score < 1.0);
            assert_eq!(r.display_rating, r.score * 10.0);
            assert!(!current.contains(&r.drug_name.as_str()));
            assert!(violations(&r.drug_name, &q.patient(), &a.rules).0.is_empty());
        }
        assert!(recs.windows(2).all(|w| w[0].score >= w[1].score));
        assert_eq!(recs.len() + out.removed.len(), a.drug_names.len() - current.len());

        let unfiltered = recommend_with(&q, &a, 100, false).unwrap().recommendations;
        let names: Vec<&str> = unfiltered.iter().map(|r| r.drug_name.as_str()).collect();
        let mut pos = 0;
        for r in recs {
            pos += names[pos..].iter().position(|&n| n == r.drug_name).expect("subsequence") + 1;
        }
    }
}

#[test]
fn top_drug_disallowed_by_gender_gives_way_to_the_next() {
    let (data, mut a) = trained(2);
    a.rules = SafetyRuleSet::empty();
    let q = query(&data, 0, &[]);
    let before = recommend(&q, &a, 3).unwrap().recommendations;
    let top = before[0].drug_name.clone();
    let allowed = match q.gender {
        Gender::Female => AllowedGenders::Male,
        _ => AllowedGenders::Female,
    };
    a.rules.gender_rules.insert(
        top.clone(),
        GenderRule {
            drug_name: top.clone(),
            lambda_female: 1.5,
            lambda_male: 1.5,
            risk_female: 0.78,
            risk_male: 0.78,
            allowed,
            exposure_counts: (10.0, 10.0),
            event_counts: (15, 15),
        },
    );
    let out = recommend(&q, &a, 3).unwrap();
    assert_eq!(out.recommendations[0].drug_name, before[1].drug_name);
    assert_eq!(out.recommendations[0].rank, 1);
    assert!(out.recommendations.iter().all(|r| r.drug_name != top));
    assert_eq!(out.removed[0].0.drug_name, top);
}

#[test]
fn empty_result_is_a_diagnostic() {
    let (data, a) = trained(2);
    let all: Vec<&str> = a.drug_names.iter().map(String::as_str).collect();
    let out = recommend(&query(&data, 0, &all), &a, 5).unwrap();
    assert!(out.recommendations.is_empty());
    assert!(!out.diagnostics.is_empty());
    assert!(recommend(&query(&data, 0, &[]), &a, 0).is_err());
    let mut bad = query(&data, 0, &[]);
    bad.age = -1.0;
    assert!(recommend(&bad, &a, 5).is_err());
}

#[test]
fn planted_cluster_preferences_rank_high() {
    let data = generate_synthetic_with_truth(&SyntheticConfig::default(), 0).unwrap();
    let a = build_pipeline(&data.bundle, &PipelineConfig::default(), None).unwrap();
    let per_user = SyntheticConfig::default().ratings_per_user;
    let (mut hits, mut total) = (0, 0);
    for u in 0..100 {
        let r = &data.bundle.ratings[u * per_user];
        let q = PatientQuery {
            age: f64::from(r.age),
            gender: r.gender,
            is_caregiver: r.is_caregiver,
            condition_text: r.condition_text.clone(),
            current_drugs: vec![],
            comment: String::new(),
        };
        let top = recommend_with(&q, &a, 10, false).unwrap().recommendations;
        let preferred = &data.truth.preferred[data.truth.user_cluster[&r.user_id]];
        for p in preferred {
            total += 1;
            hits += top.iter().any(|t| &t.drug_name == p) as usize;
        }
    }
    assert!(hits as f64 / total as f64 >= 0.4, "{hits}/{total}");
}

fn profile_of(a: &PipelineArtifacts, data: &SyntheticData, j: usize) -> DrugProfile {
    let d = data.bundle.drugs.iter().find(|d| d.name == a.drug_names[j]).unwrap();
    DrugProfile {
        name: "NewDrug".into(),
        ..d.clone()
    }
}

#[test]
fn cold_start_copies_an_identical_drug() {
    let (data, a) = trained(4);
    let j = 3;
    let cs = cold_start_score(&profile_of(&a, &data, j), &a).unwrap();
    assert_eq!(cs.drug_cluster, a.drug_model.labels[j]);
    assert_eq!(cs.estimates.len(), a.user_model.final_k);
    let twin = cold_start_score(&profile_of(&a, &data, j), &a).unwrap();
    assert_eq!(cs, twin);
}

#[test]
fn cold_start_single_member_and_fallback() {
    let (data, mut a) = trained(4);
    let m = a.drug_names.len();
    let k = a.user_model.final_k;
    a.drug_model = ClusterModel::from_parts(a.drug_features.clone(), vec![1.0 / m as f64; m], (0..m).collect(), 0.0).unwrap();
    let mut ratings = SparseRatingMatrix::empty(k, m);
    ratings.set(0, 2, 0.7);
    ratings.set(0, 5, 0.3);
    a.ratings = ratings;
    let observed = cold_start_score(&profile_of(&a, &data, 2), &a).unwrap();
    let unique = a.drug_features.iter().filter(|f| **f == a.drug_features[2]).count() == 1;
    if unique {
        assert_eq!(observed.drug_cluster, 2);
        assert_eq!(observed.estimates[0].score, 0.7);
        assert!(!observed.estimates[0].fallback);
    }
    let unobserved = (0..m).find(|&j| j != 2 && j != 5 && a.drug_features[j] != a.drug_features[2] && a.drug_features[j] != a.drug_features[5]).unwrap();
    let cs = cold_start_score(&profile_of(&a, &data, unobserved), &a).unwrap();
    assert!(cs.estimates.iter().all(|e| e.fallback && (e.score - 0.5).abs() < 1e-15));

    let mut short = profile_of(&a, &data, 0);
    short.benefits.pop();
    assert!(cold_start_score(&short, &a).is_err());
}
