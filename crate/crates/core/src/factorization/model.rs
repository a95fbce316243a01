use super::backprop::{backprop, Gradients, LossContext};
use super::matrix::SparseRatingMatrix;
use super::network::{Activation, NetworkParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed::{derive_seed, STAGE_DRUG_NET, STAGE_USER_NET};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Overrides `learning_rate` layer by layer when present.
    pub layer_learning_rates: Option<Vec<f64>>,
    pub epochs: usize,
    pub seed: u64,
    pub init_range: f64,
    pub hidden_layers: Vec<usize>,
    pub hidden_activation: Activation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            layer_learning_rates: None,
            epochs: 200,
            seed: 0,
            init_range: 0.5,
            hidden_layers: vec![16, 8],
            hidden_activation: Activation::Sigmoid,
        }
    }
}

impl TrainConfig {
    pub fn check(&self) -> Result<()> {
        let rate_ok = |r: f64| r >= 0.0 && r.is_finite();
        if !rate_ok(self.learning_rate) {
            return Err(Error::arg("learning_rate must be finite and >= 0"));
        }
        if let Some(rates) = &self.layer_learning_rates {
            if rates.len() != self.hidden_layers.len() + 1 {
                return Err(Error::arg(format!(
                    "{} layer learning rates for {} layers",
                    rates.len(),
                    self.hidden_layers.len() + 1
                )));
            }
            if !rates.iter().all(|&r| rate_ok(r)) {
                return Err(Error::arg("layer learning rates must be finite and >= 0"));
            }
        }
        if self.epochs == 0 {
            return Err(Error::arg("epochs must be >= 1"));
        }
        if !(self.init_range >= 0.0 && self.init_range.is_finite()) {
            return Err(Error::arg("init_range must be finite and >= 0"));
        }
        if self.hidden_layers.contains(&0) {
            return Err(Error::arg("hidden layers must have at least one unit"));
        }
        Ok(())
    }

    fn rate(&self, layer: usize) -> f64 {
        self.layer_learning_rates
            .as_ref()
            .map_or(self.learning_rate, |r| r[layer])
    }

    fn layer_sizes(&self, input: usize, output: usize) -> Vec<usize> {
        let mut sizes = vec![input];
        sizes.extend(&self.hidden_layers);
        sizes.push(output);
        sizes
    }
}

/// How the two networks' estimates for a cell are fused.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineRule {
    #[default]
    Mean,
    UserOnly,
    DrugOnly,
}

/// Two networks over a cluster × drug rating matrix. `user_net` maps a
/// cluster's features to one estimate per drug; `drug_net` maps a drug's
/// features to one estimate per cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FactorizationModel<T> {
    pub user_net: NetworkParams<T>,
    pub drug_net: NetworkParams<T>,
    pub user_feature_matrix: Vec<Vec<T>>,
    pub drug_feature_matrix: Vec<Vec<T>>,
    pub combine_rule: CombineRule,
    pub config: TrainConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub user: f64,
    pub drug: f64,
    pub combined: f64,
}

/// Losses measured at the start of each epoch, before its update, plus one
/// final row for the trained parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LossTrace {
    pub epochs: Vec<EpochLoss>,
}

impl LossTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,user_loss,drug_loss,combined_loss\n");
        for e in &self.epochs {
            out.push_str(&format!("{},{},{},{}\n", e.epoch, e.user, e.drug, e.combined));
        }
        out
    }

    pub fn last(&self) -> Option<&EpochLoss> {
        self.epochs.last()
    }
}

fn rows_of_width<T>(rows: &[Vec<T>], what: &str) -> Result<usize> {
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::arg(format!("{what} rows differ in width")));
    }
    Ok(width)
}

impl<T: Scalar> FactorizationModel<T> {
    /// Fresh model with seeded random weights. Each network gets its own
    /// seed derived from `config.seed`.
    pub fn new(
        user_features: Vec<Vec<T>>,
        drug_features: Vec<Vec<T>>,
        combine_rule: CombineRule,
        config: TrainConfig,
    ) -> Result<Self> {
        config.check()?;
        let k_user = rows_of_width(&user_features, "user feature")?;
        let k_drug = rows_of_width(&drug_features, "drug feature")?;
        let (n, m) = (user_features.len(), drug_features.len());
        let user_net = NetworkParams::init(
            config.layer_sizes(k_user, m),
            config.hidden_activation,
            config.init_range,
            derive_seed(config.seed, STAGE_USER_NET),
        )?;
        let drug_net = NetworkParams::init(
            config.layer_sizes(k_drug, n),
            config.hidden_activation,
            config.init_range,
            derive_seed(config.seed, STAGE_DRUG_NET),
        )?;
        Ok(FactorizationModel {
            user_net,
            drug_net,
            user_feature_matrix: user_features,
            drug_feature_matrix: drug_features,
            combine_rule,
            config,
        })
    }

    pub fn clusters(&self) -> usize {
        self.user_feature_matrix.len()
    }

    pub fn drugs(&self) -> usize {
        self.drug_feature_matrix.len()
    }

    pub fn user_context(&self, ratings: &SparseRatingMatrix<T>) -> Result<LossContext<T>> {
        LossContext::by_rows(self.user_feature_matrix.clone(), ratings)
    }

    pub fn drug_context(&self, ratings: &SparseRatingMatrix<T>) -> Result<LossContext<T>> {
        LossContext::by_columns(self.drug_feature_matrix.clone(), ratings)
    }

    fn check_ratings(&self, ratings: &SparseRatingMatrix<T>) -> Result<()> {
        ratings.check()?;
        if ratings.rows != self.clusters() || ratings.cols != self.drugs() {
            return Err(Error::arg(format!(
                "rating matrix is {}×{}, model is {}×{}",
                ratings.rows,
                ratings.cols,
                self.clusters(),
                self.drugs()
            )));
        }
        Ok(())
    }

    /// User-network estimates for every drug, for one cluster.
    pub fn user_outputs(&self, cluster: usize) -> Result<Vec<T>> {
        let x = self
            .user_feature_matrix
            .get(cluster)
            .ok_or_else(|| Error::arg(format!("cluster {cluster} out of range")))?;
        self.user_net.forward(x)
    }

    /// Drug-network estimates for every cluster, for one drug.
    pub fn drug_outputs(&self, drug: usize) -> Result<Vec<T>> {
        let x = self
            .drug_feature_matrix
            .get(drug)
            .ok_or_else(|| Error::arg(format!("drug {drug} out of range")))?;
        self.drug_net.forward(x)
    }

    fn combine(&self, user: T, drug: T) -> T {
        match self.combine_rule {
            CombineRule::Mean => (user + drug) / T::lit(2.0),
            CombineRule::UserOnly => user,
            CombineRule::DrugOnly => drug,
        }
    }

    pub fn predict(&self, cluster: usize, drug: usize) -> Result<T> {
        let u = self.user_outputs(cluster)?;
        let d = self.drug_outputs(drug)?;
        if drug >= u.len() || cluster >= d.len() {
            return Err(Error::arg("network widths do not match the rating matrix"));
        }
        Ok(self.combine(u[drug], d[cluster]))
    }

    /// Estimates for every drug for one cluster.
    pub fn predict_row(&self, cluster: usize) -> Result<Vec<T>> {
        let u = self.user_outputs(cluster)?;
        (0..self.drugs())
            .map(|j| Ok(self.combine(u[j], self.drug_outputs(j)?[cluster])))
            .collect()
    }

    /// Full cluster × drug estimate grid, row-major.
    pub fn prediction_matrix(&self) -> Result<Vec<Vec<T>>> {
        let drug_out: Vec<Vec<T>> = (0..self.drugs())
            .map(|j| self.drug_outputs(j))
            .collect::<Result<_>>()?;
        (0..self.clusters())
            .map(|i| {
                let u = self.user_outputs(i)?;
                Ok((0..self.drugs()).map(|j| self.combine(u[j], drug_out[j][i])).collect())
            })
            .collect()
    }
}

/// `½ Σ ψ (R − prediction)²` with predictions fused by the model's
/// combine rule. Unobserved cells are never read.
pub fn masked_loss<T: Scalar>(model: &FactorizationModel<T>, ratings: &SparseRatingMatrix<T>) -> Result<T> {
    model.check_ratings(ratings)?;
    if ratings.observed_count() == 0 {
        return Ok(T::zero());
    }
    let pred = model.prediction_matrix()?;
    let half = T::lit(0.5);
    let mut loss = T::zero();
    for (i, j, r) in ratings.observed() {
        let e = r - pred[i][j];
        loss += half * e * e;
    }
    Ok(loss)
}

fn apply_update<T: Scalar>(net: &mut NetworkParams<T>, grad: &Gradients<T>, config: &TrainConfig) {
    for l in 0..net.layers() {
        let rate = T::lit(config.rate(l));
        for (w, g) in net.weights[l].iter_mut().zip(&grad.weights[l]) {
            *w -= rate * *g;
        }
        for (b, g) in net.biases[l].iter_mut().zip(&grad.biases[l]) {
            *b -= rate * *g;
        }
    }
}

/// Full-batch gradient descent on both networks, each against the observed
/// cells of `ratings` (user network by rows, drug network by columns).
pub fn train<T: Scalar>(
    model: &FactorizationModel<T>,
    ratings: &SparseRatingMatrix<T>,
    config: &TrainConfig,
) -> Result<(FactorizationModel<T>, LossTrace)> {
    config.check()?;
    model.check_ratings(ratings)?;
    if config.layer_learning_rates.is_some() && config.hidden_layers.len() + 1 != model.user_net.layers() {
        return Err(Error::arg("layer learning rates do not match the network depth"));
    }
    let mut model = model.clone();
    let user_ctx = model.user_context(ratings)?;
    let drug_ctx = model.drug_context(ratings)?;
    let mut trace = LossTrace::default();
    let finite = |epoch: usize, v: T, what: &str| -> Result<f64> {
        let v = v.to_f64_lossy();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Training {
                epoch,
                message: format!("{what} loss is {v}"),
            })
        }
    };
    for epoch in 0..=config.epochs {
        let (user_loss, user_grad) = backprop(&model.user_net, &user_ctx)?;
        let (drug_loss, drug_grad) = backprop(&model.drug_net, &drug_ctx)?;
        let combined = masked_loss(&model, ratings)?;
        trace.epochs.push(EpochLoss {
            epoch,
            user: finite(epoch, user_loss, "user network")?,
            drug: finite(epoch, drug_loss, "drug network")?,
            combined: finite(epoch, combined, "combined")?,
        });
        if epoch == config.epochs {
            break;
        }
        apply_update(&mut model.user_net, &user_grad, config);
        apply_update(&mut model.drug_net, &drug_grad, config);
    }
    model.config = config.clone();
    Ok((model, trace))
}
