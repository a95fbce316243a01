use crate::artifacts::{
    artifact_files, load_artifacts, write_with_manifest, CONFIG, METRICS_CSV, METRICS_JSON, ROC_CSV,
};
use crate::config::{DataSource, RunConfig};
use crate::error::{CliError, CliResult};
use crate::io::{read_json, to_json, write_atomic};
use pharmarec::dataset::{generate_synthetic, write_bundle, SyntheticConfig, ValidationReport};
use pharmarec::evaluation::{evaluate as run_metrics, holdout, EvaluationConfig, MetricsReport};
use pharmarec::recommender::{build_pipeline, recommend_with, PatientQuery, Recommendation, RecommendOutcome};
use pharmarec::seed::{derive_seed, STAGE_SYNTHETIC};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub ok: bool,
    #[serde(flatten)]
    pub validation: ValidationReport,
}

/// Loads and validates the configured data. Schema problems end up in the
/// report rather than as an error.
pub fn ingest(config: &RunConfig) -> CliResult<IngestReport> {
    match config.load_data() {
        Ok((bundle, warnings)) => {
            let mut validation = bundle.validate();
            validation.warnings.extend(warnings);
            Ok(IngestReport {
                ok: validation.is_ok(),
                validation,
            })
        }
        Err(CliError::Core(e)) if e.is_validation() => Ok(IngestReport {
            ok: false,
            validation: ValidationReport {
                errors: vec![e.to_string()],
                ..ValidationReport::default()
            },
        }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub output_dir: PathBuf,
    pub user_clusters: usize,
    pub drug_clusters: usize,
    pub epochs: usize,
    pub final_loss: f64,
    pub gender_rules: usize,
    pub age_rules: usize,
}

/// Trains on the training split and writes the artifact directory.
pub fn train(config: &RunConfig) -> CliResult<TrainSummary> {
    let (bundle, _) = config.load_data()?;
    let held = holdout(&bundle, config.master_seed, &config.evaluation)?;
    let artifacts = build_pipeline(&held.train, &config.pipeline, Some(&held.exposures))?;
    let saved = RunConfig {
        output_dir: None,
        pipeline: artifacts.config.clone(),
        ..config.clone()
    };
    let mut files = artifact_files(&artifacts)?;
    files.push((CONFIG, to_json(&saved)?.into_bytes()));
    let dir = config.output_dir();
    write_with_manifest(&dir, &files, config.master_seed, &artifacts.seeds, true)?;
    Ok(TrainSummary {
        output_dir: dir,
        user_clusters: artifacts.user_model.final_k,
        drug_clusters: artifacts.drug_model.final_k,
        epochs: artifacts.config.training.epochs,
        final_loss: artifacts.loss_trace.last().map_or(0.0, |e| e.combined),
        gender_rules: artifacts.rules.gender_rules.len(),
        age_rules: artifacts.rules.age_rules.len(),
    })
}

/// Evaluates a trained directory on the held-out data its config defines.
/// `evaluation` may replace the stored evaluation settings, but not the
/// split that training used.
pub fn evaluate(artifacts_dir: &Path, evaluation: Option<EvaluationConfig>) -> CliResult<MetricsReport> {
    let artifacts = load_artifacts(artifacts_dir)?;
    let stored: RunConfig = read_json(&artifacts_dir.join(CONFIG))?;
    let eval = match evaluation {
        Some(e) => {
            let s = &stored.evaluation;
            let same_split = (e.train_fraction, e.validation_fraction, e.test_fraction, e.adverse_rule_fraction)
                == (s.train_fraction, s.validation_fraction, s.test_fraction, s.adverse_rule_fraction);
            if !same_split {
                return Err(CliError::Invalid(
                    "evaluation split fractions differ from the ones used for training".into(),
                ));
            }
            e
        }
        None => stored.evaluation.clone(),
    };
    let (bundle, _) = stored.load_data()?;
    let held = holdout(&bundle, stored.master_seed, &eval)?;
    let result = run_metrics(&artifacts, &held, stored.master_seed, &eval)?;
    let files = vec![
        (METRICS_JSON, to_json(&result.report)?.into_bytes()),
        (METRICS_CSV, result.report.to_csv().into_bytes()),
        (ROC_CSV, result.roc.to_csv().into_bytes()),
    ];
    write_with_manifest(artifacts_dir, &files, stored.master_seed, &artifacts.seeds, false)?;
    Ok(result.report)
}

pub fn read_patient(path: &Path) -> CliResult<PatientQuery> {
    let q: PatientQuery = read_json(path)?;
    q.check()?;
    Ok(q)
}

pub fn recommend(artifacts_dir: &Path, patient: &PatientQuery, n: usize, use_kb: bool) -> CliResult<RecommendOutcome> {
    let artifacts = load_artifacts(artifacts_dir)?;
    Ok(recommend_with(patient, &artifacts, n, use_kb)?)
}

/// Human-readable rendering of a recommendation outcome.
pub fn render_table(outcome: &RecommendOutcome, explain: bool) -> String {
    let mut out = format!("{:>4}  {:<24} {:>7}  warnings\n", "rank", "drug", "rating");
    for r in &outcome.recommendations {
        let warnings: Vec<String> = r.warnings.iter().map(|(a, b)| format!("{a}+{b}")).collect();
        out.push_str(&format!(
            "{:>4}  {:<24} {:>7.2}  {}\n",
            r.rank,
            r.drug_name,
            r.display_rating,
            warnings.join(", ")
        ));
    }
    if explain && !outcome.removed.is_empty() {
        out.push_str("\nremoved by the knowledge base:\n");
        for (c, why) in &outcome.removed {
            let reasons: Vec<String> = why.iter().map(ToString::to_string).collect();
            out.push_str(&format!("  {:<24} {}\n", c.drug_name, reasons.join("; ")));
        }
    }
    for d in &outcome.diagnostics {
        out.push_str(&format!("note: {d}\n"));
    }
    out
}

/// JSON rendering; `removed` is included only with `explain`.
pub fn render_json(outcome: &RecommendOutcome, explain: bool) -> CliResult<String> {
    if explain {
        return to_json(outcome);
    }
    #[derive(Serialize)]
    struct Brief<'a> {
        cluster: usize,
        recommendations: &'a [Recommendation],
        diagnostics: &'a [String],
    }
    to_json(&Brief {
        cluster: outcome.cluster,
        recommendations: &outcome.recommendations,
        diagnostics: &outcome.diagnostics,
    })
}

/// Writes a synthetic bundle as CSV tables.
pub fn synth(out_dir: &Path, config: &SyntheticConfig, master_seed: u64) -> CliResult<ValidationReport> {
    let bundle = generate_synthetic(config, derive_seed(master_seed, STAGE_SYNTHETIC))?;
    write_bundle(out_dir, &bundle)?;
    Ok(bundle.validate())
}

/// Synthetic config from a run config or a bare generator config file.
pub fn synthetic_config(path: Option<&Path>) -> CliResult<SyntheticConfig> {
    let Some(path) = path else {
        return Ok(SyntheticConfig::default());
    };
    if let Ok(run) = RunConfig::load(path) {
        return match run.data {
            DataSource::Synthetic(c) => Ok(c),
            DataSource::Files { .. } => Err(CliError::Invalid(format!(
                "{} describes file data, not a synthetic generator",
                path.display()
            ))),
        };
    }
    read_json(path)
}

pub fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
