use crate::error::{CliError, CliResult};
use crate::io::read_json;
use pharmarec::dataset::{generate_synthetic, load_bundle, DatasetBundle, SyntheticConfig};
use pharmarec::evaluation::EvaluationConfig;
use pharmarec::recommender::PipelineConfig;
use pharmarec::seed::{derive_seed, STAGE_SYNTHETIC};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Where the data comes from: a directory holding the four CSV tables, or
/// a synthetic generator config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Files { dir: PathBuf },
    Synthetic(SyntheticConfig),
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic(SyntheticConfig::default())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    pub data: DataSource,
    /// `pipeline.seed` is replaced by `master_seed`.
    pub pipeline: PipelineConfig,
    pub evaluation: EvaluationConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

pub const DEFAULT_OUTPUT_DIR: &str = "artifacts";

impl RunConfig {
    /// Reads a config file. A relative data directory is taken relative to
    /// the file.
    pub fn load(path: &Path) -> CliResult<Self> {
        let mut config: RunConfig = read_json(path)?;
        if let DataSource::Files { dir } = &mut config.data {
            if dir.is_relative() {
                if let Some(parent) = path.parent() {
                    *dir = parent.join(&*dir);
                }
            }
        }
        Ok(config)
    }

    pub fn with_overrides(mut self, seed: Option<u64>, out: Option<PathBuf>) -> Self {
        if let Some(s) = seed {
            self.master_seed = s;
        }
        if out.is_some() {
            self.output_dir = out;
        }
        self.pipeline.seed = self.master_seed;
        self
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    /// Loader warnings come back alongside the bundle.
    pub fn load_data(&self) -> CliResult<(DatasetBundle, Vec<String>)> {
        match &self.data {
            DataSource::Files { dir } => {
                if !dir.is_dir() {
                    return Err(CliError::io(
                        dir,
                        std::io::Error::new(std::io::ErrorKind::NotFound, "data directory not found"),
                    ));
                }
                Ok(load_bundle(dir)?)
            }
            DataSource::Synthetic(cfg) => Ok((
                generate_synthetic(cfg, derive_seed(self.master_seed, STAGE_SYNTHETIC))?,
                Vec::new(),
            )),
        }
    }
}
