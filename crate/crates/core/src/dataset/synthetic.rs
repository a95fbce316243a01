//! Seeded synthetic bundles with planted structure.
//!
//! Users belong to planted clusters that share gender, an age band, a
//! caregiver flag and a condition phrase. Each cluster has a set of preferred
//! drugs that its users rate highly and consume more often. Adverse events
//! are planted per (drug, gender) as `round(rate · exposures)` records, where
//! exposures are the generated rating counts for that pair.

use super::{
    AdverseEvent, AdverseEventRecord, DatasetBundle, DrugProfile, Gender, InteractionRecord,
    RatingRecord, Severity,
};
use crate::error::{Error, Result};
use crate::seed::rng;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

const CONDITIONS: [[&str; 2]; 10] = [
    ["migraine headache", "severe migraine"],
    ["HBP", "high blood pressure"],
    ["depression anxiety", "major depression"],
    ["acne skin", "cystic acne"],
    ["insomnia sleep", "chronic insomnia"],
    ["asthma wheezing", "COPD"],
    ["back pain", "lower back pain"],
    ["OCD", "obsessive thoughts"],
    ["PMS cramps", "menstrual cramps"],
    ["diabetes sugar", "type diabetes"],
];

const POSITIVE_COMMENTS: [&str; 3] = [
    "great relief, works well",
    "excellent drug, helped a lot!",
    "very effective and I feel better",
];

const NEGATIVE_COMMENTS: [&str; 3] = [
    "terrible, made things worse",
    "useless and awful side effects",
    "did not help, felt horrible",
];

const REACTIONS: [&str; 4] = ["rash", "nausea", "arrhythmia", "liver failure"];

/// Adverse-event rate override for one (drug, gender) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedRate {
    pub drug: String,
    pub gender: Gender,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub users: usize,
    pub drugs: usize,
    pub user_clusters: usize,
    pub drug_families: usize,
    pub ratings_per_user: usize,
    pub preferred_per_cluster: usize,
    /// Probability that a consumed drug is drawn from the cluster's preferred set.
    pub preference_affinity: f64,
    /// Standard deviation of Gaussian noise on the overall rating (0–10 units).
    pub rating_noise: f64,
    pub category_bits: usize,
    pub side_effect_bits: usize,
    pub benefit_bits: usize,
    pub bit_flip_probability: f64,
    pub default_adverse_rate: f64,
    pub high_adverse_rate: f64,
    /// How many of each cluster's preferred drugs carry `high_adverse_rate`
    /// for that cluster's gender.
    pub risky_preferred_per_cluster: usize,
    /// Applied last, overriding the rates above.
    pub adverse_rates: Vec<PlantedRate>,
    pub interactions: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            users: 500,
            drugs: 50,
            user_clusters: 5,
            drug_families: 5,
            ratings_per_user: 4,
            preferred_per_cluster: 5,
            preference_affinity: 0.8,
            rating_noise: 0.5,
            category_bits: 16,
            side_effect_bits: 12,
            benefit_bits: 10,
            bit_flip_probability: 0.1,
            default_adverse_rate: 0.05,
            high_adverse_rate: 1.5,
            risky_preferred_per_cluster: 1,
            adverse_rates: Vec::new(),
            interactions: 20,
        }
    }
}

/// Ground truth the generator planted, for tests and evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedTruth {
    pub user_cluster: BTreeMap<String, usize>,
    pub cluster_gender: Vec<Gender>,
    pub preferred: Vec<Vec<String>>,
    /// Planted adverse-event rate for every (drug, gender) pair.
    pub rates: BTreeMap<(String, Gender), f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub bundle: DatasetBundle,
    pub truth: PlantedTruth,
}

pub fn generate_synthetic(config: &SyntheticConfig, seed: u64) -> Result<DatasetBundle> {
    generate_synthetic_with_truth(config, seed).map(|d| d.bundle)
}

fn check(config: &SyntheticConfig) -> Result<()> {
    if config.users == 0 || config.drugs == 0 {
        return Err(Error::arg("synthetic config needs at least one user and one drug"));
    }
    if config.user_clusters == 0 || config.drug_families == 0 {
        return Err(Error::arg("cluster and family counts must be positive"));
    }
    if config.ratings_per_user == 0 || config.ratings_per_user > config.drugs {
        return Err(Error::arg("ratings_per_user must be in 1..=drugs"));
    }
    if config.preferred_per_cluster == 0 || config.preferred_per_cluster > config.drugs {
        return Err(Error::arg("preferred_per_cluster must be in 1..=drugs"));
    }
    let probs = [config.preference_affinity, config.bit_flip_probability];
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::arg("probabilities must lie in [0,1]"));
    }
    let rates = [config.default_adverse_rate, config.high_adverse_rate];
    if rates.iter().chain(config.adverse_rates.iter().map(|r| &r.rate)).any(|r| !(*r >= 0.0)) {
        return Err(Error::arg("adverse rates must be non-negative"));
    }
    if !(config.rating_noise >= 0.0) {
        return Err(Error::arg("rating_noise must be non-negative"));
    }
    Ok(())
}

struct PlantedCluster {
    gender: Gender,
    age_center: u32,
    caregiver: bool,
    conditions: [&'static str; 2],
    preferred: Vec<usize>,
}

fn drug_name(m: usize) -> String {
    format!("Drug{:03}", m + 1)
}

pub fn generate_synthetic_with_truth(config: &SyntheticConfig, seed: u64) -> Result<SyntheticData> {
    check(config)?;
    let mut rng = rng(seed);
    let names: Vec<String> = (0..config.drugs).map(drug_name).collect();

    let drugs = generate_drugs(config, &names, &mut rng);

    let all_drugs: Vec<usize> = (0..config.drugs).collect();
    let clusters: Vec<PlantedCluster> = (0..config.user_clusters)
        .map(|c| PlantedCluster {
            gender: if c % 2 == 0 { Gender::Female } else { Gender::Male },
            age_center: 25 + ((c * 37) % 50) as u32,
            caregiver: c % 3 == 2,
            conditions: CONDITIONS[c % CONDITIONS.len()],
            preferred: all_drugs
                .choose_multiple(&mut rng, config.preferred_per_cluster)
                .copied()
                .collect(),
        })
        .collect();
    let quality: Vec<f64> = (0..config.drugs).map(|_| rng.random::<f64>()).collect();

    let noise = if config.rating_noise > 0.0 {
        Some(Normal::new(0.0, config.rating_noise).map_err(|e| Error::arg(e.to_string()))?)
    } else {
        None
    };

    let mut ratings = Vec::with_capacity(config.users * config.ratings_per_user);
    let mut user_cluster = BTreeMap::new();
    for u in 0..config.users {
        let c = u % config.user_clusters;
        let cluster = &clusters[c];
        let user_id = format!("u{:04}", u + 1);
        user_cluster.insert(user_id.clone(), c);
        let age = (cluster.age_center as i64 + rng.random_range(-3i64..=3)).max(0) as u32;
        let condition = cluster.conditions[rng.random_range(0..2)];

        let mut chosen = BTreeSet::new();
        let mut order = Vec::with_capacity(config.ratings_per_user);
        while order.len() < config.ratings_per_user {
            let m = if rng.random_bool(config.preference_affinity) {
                *cluster.preferred.choose(&mut rng).expect("non-empty preferred set")
            } else {
                rng.random_range(0..config.drugs)
            };
            if chosen.insert(m) {
                order.push(m);
            }
        }

        for m in order {
            let preferred = cluster.preferred.contains(&m);
            let (base, effectiveness, side_effects) = if preferred {
                (9.0, 4u8, 1u8)
            } else {
                (1.0 + (3.0 * quality[m]).round(), (2.0 * quality[m]).round() as u8, 0u8)
            };
            let jitter = noise.map(|n| n.sample(&mut rng)).unwrap_or(0.0);
            let overall = (base + jitter).round().clamp(0.0, 10.0) as u8;
            let templates = if preferred {
                &POSITIVE_COMMENTS
            } else {
                &NEGATIVE_COMMENTS
            };
            ratings.push(RatingRecord {
                user_id: user_id.clone(),
                age,
                gender: cluster.gender,
                is_caregiver: cluster.caregiver,
                condition_text: condition.to_string(),
                drug_name: names[m].clone(),
                overall_rating: overall,
                effectiveness,
                side_effect_severity: side_effects,
                comment: templates[(c + m) % templates.len()].to_string(),
            });
        }
    }

    let rates = planted_rates(config, &names, &clusters);
    let adverse_events = generate_adverse_events(&ratings, &rates, &names, &mut rng);
    let interactions = generate_interactions(config, &names, &mut rng);

    let truth = PlantedTruth {
        user_cluster,
        cluster_gender: clusters.iter().map(|c| c.gender).collect(),
        preferred: clusters
            .iter()
            .map(|c| c.preferred.iter().map(|&m| names[m].clone()).collect())
            .collect(),
        rates,
    };
    Ok(SyntheticData {
        bundle: DatasetBundle {
            ratings,
            drugs,
            interactions,
            adverse_events,
        },
        truth,
    })
}

fn generate_drugs(config: &SyntheticConfig, names: &[String], rng: &mut ChaCha8Rng) -> Vec<DrugProfile> {
    let width = config.category_bits + config.side_effect_bits + config.benefit_bits;
    let prototypes: Vec<Vec<u8>> = (0..config.drug_families)
        .map(|_| (0..width).map(|_| u8::from(rng.random_bool(0.3))).collect())
        .collect();
    names
        .iter()
        .enumerate()
        .map(|(m, name)| {
            let bits: Vec<u8> = prototypes[m % config.drug_families]
                .iter()
                .map(|&b| {
                    if rng.random_bool(config.bit_flip_probability) {
                        1 - b
                    } else {
                        b
                    }
                })
                .collect();
            let (cat, rest) = bits.split_at(config.category_bits);
            let (side, ben) = rest.split_at(config.side_effect_bits);
            DrugProfile {
                name: name.clone(),
                categories: cat.to_vec(),
                side_effects: side.to_vec(),
                benefits: ben.to_vec(),
            }
        })
        .collect()
}

fn planted_rates(
    config: &SyntheticConfig,
    names: &[String],
    clusters: &[PlantedCluster],
) -> BTreeMap<(String, Gender), f64> {
    let mut rates = BTreeMap::new();
    for name in names {
        for g in [Gender::Female, Gender::Male] {
            rates.insert((name.clone(), g), config.default_adverse_rate);
        }
    }
    for cluster in clusters {
        for &m in cluster.preferred.iter().take(config.risky_preferred_per_cluster) {
            rates.insert((names[m].clone(), cluster.gender), config.high_adverse_rate);
        }
    }
    for r in &config.adverse_rates {
        rates.insert((r.drug.clone(), r.gender), r.rate);
    }
    rates
}

fn generate_adverse_events(
    ratings: &[RatingRecord],
    rates: &BTreeMap<(String, Gender), f64>,
    names: &[String],
    rng: &mut ChaCha8Rng,
) -> Vec<AdverseEventRecord> {
    let mut exposed: BTreeMap<(&str, Gender), Vec<u32>> = BTreeMap::new();
    for r in ratings {
        exposed
            .entry((r.drug_name.as_str(), r.gender))
            .or_default()
            .push(r.age);
    }
    let weights = [0.4, 0.35, 0.15, 0.1];
    let mut out = Vec::new();
    for ((drug, gender), ages) in &exposed {
        let rate = rates.get(&(drug.to_string(), *gender)).copied().unwrap_or(0.0);
        let count = (rate * ages.len() as f64).round() as usize;
        for _ in 0..count {
            let base_age = *ages.choose(rng).expect("exposed ages are non-empty");
            let age = (base_age as i64 + rng.random_range(-2i64..=2)).max(1) as u32;
            let mut events = BTreeSet::new();
            let draw: f64 = rng.random();
            let mut acc = 0.0;
            let mut primary = AdverseEvent::LifeThreatening;
            for (event, w) in AdverseEvent::ALL.iter().zip(weights) {
                acc += w;
                if draw < acc {
                    primary = *event;
                    break;
                }
            }
            events.insert(primary);
            if rng.random_bool(0.2) {
                events.insert(AdverseEvent::Hospitalization);
            }
            let others = rng.random_range(0..=2usize);
            let other_drugs = (0..others)
                .map(|_| names.choose(rng).expect("non-empty names").clone())
                .filter(|n| n != drug)
                .collect();
            out.push(AdverseEventRecord {
                drug_name: drug.to_string(),
                age,
                gender: *gender,
                reaction: REACTIONS.choose(rng).expect("non-empty").to_string(),
                events,
                other_drugs,
            });
        }
    }
    out
}

fn generate_interactions(
    config: &SyntheticConfig,
    names: &[String],
    rng: &mut ChaCha8Rng,
) -> Vec<InteractionRecord> {
    let max_pairs = names.len() * names.len().saturating_sub(1) / 2;
    let target = config.interactions.min(max_pairs);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(target);
    while out.len() < target {
        let a = rng.random_range(0..names.len());
        let b = rng.random_range(0..names.len());
        if a == b || !seen.insert((a.min(b), a.max(b))) {
            continue;
        }
        let severity = [Severity::Major, Severity::Moderate, Severity::Minor][rng.random_range(0..3)];
        out.push(InteractionRecord {
            drug_a: names[a].clone(),
            drug_b: names[b].clone(),
            severity,
        });
    }
    out
}

/// Isotropic 2-D Gaussian blobs with unit spread whose centers are at least
/// `separation` apart. Points are interleaved by blob; returns the points and
/// their blob labels.
pub fn gaussian_blobs(
    blobs: usize,
    points: usize,
    separation: f64,
    seed: u64,
) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    if blobs == 0 {
        return Err(Error::arg("need at least one blob"));
    }
    let mut rng = rng(seed);
    let half_width = separation * blobs as f64;
    let mut centers: Vec<[f64; 2]> = Vec::with_capacity(blobs);
    while centers.len() < blobs {
        let c = [
            rng.random_range(-half_width..half_width),
            rng.random_range(-half_width..half_width),
        ];
        let clear = centers
            .iter()
            .all(|d| ((d[0] - c[0]).powi(2) + (d[1] - c[1]).powi(2)).sqrt() >= separation);
        if clear {
            centers.push(c);
        }
    }
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut out = Vec::with_capacity(points);
    let mut labels = Vec::with_capacity(points);
    for i in 0..points {
        let c = centers[i % blobs];
        out.push(vec![c[0] + unit.sample(&mut rng), c[1] + unit.sample(&mut rng)]);
        labels.push(i % blobs);
    }
    Ok((out, labels))
}
