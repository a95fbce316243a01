use super::matrix::SparseRatingMatrix;
use super::model::TrainConfig;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Plain low-rank factorization `R ≈ U·Vᵀ` fitted on observed cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BaselineMf<T> {
    pub rank: usize,
    /// rows × rank
    pub user_factors: Vec<Vec<T>>,
    /// cols × rank
    pub item_factors: Vec<Vec<T>>,
    pub loss_trace: Vec<f64>,
}

impl<T: Scalar> BaselineMf<T> {
    pub fn predict(&self, row: usize, col: usize) -> Result<T> {
        let u = self
            .user_factors
            .get(row)
            .ok_or_else(|| Error::arg(format!("row {row} out of range")))?;
        let v = self
            .item_factors
            .get(col)
            .ok_or_else(|| Error::arg(format!("column {col} out of range")))?;
        Ok(u.iter().zip(v).map(|(&a, &b)| a * b).sum())
    }

    fn loss(&self, ratings: &SparseRatingMatrix<T>) -> T {
        let half = T::lit(0.5);
        ratings
            .observed()
            .map(|(i, j, r)| {
                let p: T = self.user_factors[i]
                    .iter()
                    .zip(&self.item_factors[j])
                    .map(|(&a, &b)| a * b)
                    .sum();
                half * (r - p) * (r - p)
            })
            .sum()
    }
}

/// Full-batch gradient descent on `½ Σ ψ (R − U·Vᵀ)²`. Factors start
/// uniform in `[0, init_range]`, seeded by `config.seed`.
pub fn fit_baseline_mf<T: Scalar>(
    ratings: &SparseRatingMatrix<T>,
    rank: usize,
    config: &TrainConfig,
) -> Result<BaselineMf<T>> {
    if rank == 0 {
        return Err(Error::arg("rank must be >= 1"));
    }
    config.check()?;
    ratings.check()?;
    let mut rng = seed::rng(config.seed);
    let mut draw = |n: usize| -> Vec<Vec<T>> {
        (0..n)
            .map(|_| {
                (0..rank)
                    .map(|_| T::lit(rng.random_range(0.0..=config.init_range)))
                    .collect()
            })
            .collect()
    };
    let mut mf = BaselineMf {
        rank,
        user_factors: draw(ratings.rows),
        item_factors: draw(ratings.cols),
        loss_trace: Vec::with_capacity(config.epochs + 1),
    };
    let rate = T::lit(config.learning_rate);
    for epoch in 0..=config.epochs {
        let loss = mf.loss(ratings).to_f64_lossy();
        if !loss.is_finite() {
            return Err(Error::Training {
                epoch,
                message: format!("baseline loss is {loss}"),
            });
        }
        mf.loss_trace.push(loss);
        if epoch == config.epochs {
            break;
        }
        let mut gu = vec![vec![T::zero(); rank]; ratings.rows];
        let mut gv = vec![vec![T::zero(); rank]; ratings.cols];
        for (i, j, r) in ratings.observed() {
            let u = &mf.user_factors[i];
            let v = &mf.item_factors[j];
            let e: T = u.iter().zip(v).map(|(&a, &b)| a * b).sum::<T>() - r;
            for k in 0..rank {
                gu[i][k] += e * v[k];
                gv[j][k] += e * u[k];
            }
        }
        for (f, g) in mf.user_factors.iter_mut().zip(&gu).chain(mf.item_factors.iter_mut().zip(&gv)) {
            for (x, d) in f.iter_mut().zip(g) {
                *x -= rate * *d;
            }
        }
    }
    Ok(mf)
}
