use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Per-column min-max scaling to [0,1]. Constant columns map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MinMaxScaler<T> {
    pub min: Vec<T>,
    pub max: Vec<T>,
}

impl<T: Scalar> MinMaxScaler<T> {
    pub fn fit(rows: &[Vec<T>]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::arg("cannot fit a scaler on no rows"))?;
        let mut min = first.clone();
        let mut max = first.clone();
        for r in rows {
            if r.len() != min.len() {
                return Err(Error::arg("rows differ in length"));
            }
            for (j, &v) in r.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(MinMaxScaler { min, max })
    }

    pub fn transform(&self, row: &[T]) -> Result<Vec<T>> {
        if row.len() != self.min.len() {
            return Err(Error::arg(format!(
                "row has {} columns, scaler expects {}",
                row.len(),
                self.min.len()
            )));
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let span = self.max[j] - self.min[j];
                if span > T::zero() {
                    (v - self.min[j]) / span
                } else {
                    T::zero()
                }
            })
            .collect())
    }

    pub fn transform_all(&self, rows: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

/// Per-column standardization to zero mean and unit (population) variance.
/// Constant columns map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StandardScaler<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

impl<T: Scalar> StandardScaler<T> {
    pub fn fit(rows: &[Vec<T>]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::arg("cannot fit a scaler on no rows"))?;
        let d = first.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::arg("rows differ in length"));
        }
        let n = T::from_count(rows.len());
        let mean: Vec<T> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<T>() / n).collect();
        let std = (0..d)
            .map(|j| {
                let var = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<T>() / n;
                var.sqrt()
            })
            .collect();
        Ok(StandardScaler { mean, std })
    }

    pub fn transform(&self, row: &[T]) -> Result<Vec<T>> {
        if row.len() != self.mean.len() {
            return Err(Error::arg(format!(
                "row has {} columns, scaler expects {}",
                row.len(),
                self.mean.len()
            )));
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                if self.std[j] > T::zero() {
                    (v - self.mean[j]) / self.std[j]
                } else {
                    T::zero()
                }
            })
            .collect())
    }

    pub fn transform_all(&self, rows: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}
