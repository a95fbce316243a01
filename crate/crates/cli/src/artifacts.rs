use crate::error::{CliError, CliResult};
use crate::io::{read_json, sha256_hex, to_json, write_atomic};
use pharmarec::clustering::{MinMaxScaler, StandardScaler};
use pharmarec::factorization::{EpochLoss, LossTrace};
use pharmarec::recommender::{PipelineArtifacts, UserFeatureSpace};
use pharmarec::textprep::Vocabulary;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

pub const VOCABULARY: &str = "vocabulary.json";
pub const FEATURES: &str = "features.json";
pub const USER_CLUSTERS: &str = "user_clusters.json";
pub const DRUG_CLUSTERS: &str = "drug_clusters.json";
pub const RATING_MATRIX: &str = "rating_matrix.json";
pub const FACTORIZATION: &str = "factorization.json";
pub const RULES: &str = "rules.json";
pub const LOSS_TRACE: &str = "loss_trace.csv";
pub const CONFIG: &str = "config.json";
pub const MANIFEST: &str = "manifest.json";
pub const METRICS_JSON: &str = "metrics.json";
pub const METRICS_CSV: &str = "metrics.csv";
pub const ROC_CSV: &str = "roc.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct VocabularyFile {
    condition_vocabulary: Vocabulary,
    comment_vocabulary: Option<Vocabulary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FeaturesFile {
    user_scaler: StandardScaler<f64>,
    user_ids: Vec<String>,
    drug_names: Vec<String>,
    drug_scaler: MinMaxScaler<f64>,
    drug_features: Vec<Vec<f64>>,
}

/// Run manifest: what produced the directory and a digest of every file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub master_seed: u64,
    pub seeds: BTreeMap<String, u64>,
    pub files: BTreeMap<String, String>,
}

/// Serialized artifact files, in write order.
pub fn artifact_files(artifacts: &PipelineArtifacts) -> CliResult<Vec<(&'static str, Vec<u8>)>> {
    let vocab = VocabularyFile {
        condition_vocabulary: artifacts.user_space.condition_vocabulary.clone(),
        comment_vocabulary: artifacts.user_space.comment_vocabulary.clone(),
    };
    let features = FeaturesFile {
        user_scaler: artifacts.user_space.scaler.clone(),
        user_ids: artifacts.user_ids.clone(),
        drug_names: artifacts.drug_names.clone(),
        drug_scaler: artifacts.drug_scaler.clone(),
        drug_features: artifacts.drug_features.clone(),
    };
    Ok(vec![
        (VOCABULARY, to_json(&vocab)?.into_bytes()),
        (FEATURES, to_json(&features)?.into_bytes()),
        (USER_CLUSTERS, to_json(&artifacts.user_model)?.into_bytes()),
        (DRUG_CLUSTERS, to_json(&artifacts.drug_model)?.into_bytes()),
        (RATING_MATRIX, to_json(&artifacts.ratings)?.into_bytes()),
        (FACTORIZATION, to_json(&artifacts.factorization)?.into_bytes()),
        (RULES, to_json(&artifacts.rules)?.into_bytes()),
        (LOSS_TRACE, artifacts.loss_trace.to_csv().into_bytes()),
    ])
}

fn read_artifact<T: DeserializeOwned>(dir: &Path, name: &str) -> CliResult<T> {
    let path = dir.join(name);
    if !path.is_file() {
        return Err(CliError::MissingArtifact(path));
    }
    read_json(&path)
}

fn parse_loss_trace(dir: &Path) -> CliResult<LossTrace> {
    let path = dir.join(LOSS_TRACE);
    if !path.is_file() {
        return Err(CliError::MissingArtifact(path));
    }
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let bad = |line: usize| CliError::Invalid(format!("{}: malformed line {line}", path.display()));
    let mut epochs = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 4 {
            return Err(bad(i + 1));
        }
        let f = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1));
        epochs.push(EpochLoss {
            epoch: cells[0].parse().map_err(|_| bad(i + 1))?,
            user: f(cells[1])?,
            drug: f(cells[2])?,
            combined: f(cells[3])?,
        });
    }
    Ok(LossTrace { epochs })
}

/// Reassembles trained artifacts from a directory written by `train`.
pub fn load_artifacts(dir: &Path) -> CliResult<PipelineArtifacts> {
    let config: crate::config::RunConfig = read_artifact(dir, CONFIG)?;
    let manifest: Manifest = read_artifact(dir, MANIFEST)?;
    let vocab: VocabularyFile = read_artifact(dir, VOCABULARY)?;
    let features: FeaturesFile = read_artifact(dir, FEATURES)?;
    let artifacts = PipelineArtifacts {
        user_space: UserFeatureSpace {
            condition_vocabulary: vocab.condition_vocabulary,
            comment_vocabulary: vocab.comment_vocabulary,
            scaler: features.user_scaler,
        },
        user_ids: features.user_ids,
        user_model: read_artifact(dir, USER_CLUSTERS)?,
        drug_names: features.drug_names,
        drug_scaler: features.drug_scaler,
        drug_features: features.drug_features,
        drug_model: read_artifact(dir, DRUG_CLUSTERS)?,
        ratings: read_artifact(dir, RATING_MATRIX)?,
        factorization: read_artifact(dir, FACTORIZATION)?,
        loss_trace: parse_loss_trace(dir)?,
        rules: read_artifact(dir, RULES)?,
        config: config.pipeline,
        seeds: manifest.seeds,
    };
    artifacts.check()?;
    Ok(artifacts)
}

/// Writes `files` atomically and rewrites the manifest. With `fresh` the
/// previous manifest is discarded (and evaluation outputs it listed are
/// removed); otherwise the new files are added to it.
pub fn write_with_manifest(
    dir: &Path,
    files: &[(&str, Vec<u8>)],
    master_seed: u64,
    seeds: &BTreeMap<String, u64>,
    fresh: bool,
) -> CliResult<Manifest> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let manifest_path = dir.join(MANIFEST);
    if fresh {
        for name in [METRICS_JSON, METRICS_CSV, ROC_CSV] {
            let p = dir.join(name);
            if p.is_file() {
                fs::remove_file(&p).map_err(|e| CliError::io(&p, e))?;
            }
        }
    }
    let previous = if !fresh && manifest_path.is_file() {
        Some(read_json::<Manifest>(&manifest_path)?)
    } else {
        None
    };
    let mut manifest = match previous {
        Some(m) => m,
        None => Manifest {
            tool: "pharmarec".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: String::new(),
            master_seed,
            seeds: seeds.clone(),
            files: BTreeMap::new(),
        },
    };
    for (name, bytes) in files {
        write_atomic(&dir.join(name), bytes)?;
        manifest.files.insert(name.to_string(), sha256_hex(bytes));
        if *name == CONFIG {
            manifest.config_sha256 = sha256_hex(bytes);
        }
    }
    manifest.master_seed = master_seed;
    manifest.seeds = seeds.clone();
    write_atomic(&dir.join(MANIFEST), to_json(&manifest)?.as_bytes())?;
    Ok(manifest)
}
