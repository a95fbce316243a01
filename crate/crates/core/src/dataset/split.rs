use crate::error::{Error, Result};
use crate::seed::rng;
use rand::seq::SliceRandom;

/// Train / validation / test partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
}

const FRACTION_TOLERANCE: f64 = 1e-9;

/// Partition sizes for `n` items: validation and test get the nearest
/// integer to `n·f` (halves round up), train takes the remainder.
pub fn split_sizes(n: usize, fractions: (f64, f64, f64)) -> Result<(usize, usize, usize)> {
    let (ft, fv, fs) = fractions;
    for (name, f) in [("train", ft), ("validation", fv), ("test", fs)] {
        if !f.is_finite() || f < 0.0 {
            return Err(Error::arg(format!("{name} fraction {f} is negative")));
        }
    }
    if ((ft + fv + fs) - 1.0).abs() > FRACTION_TOLERANCE {
        return Err(Error::arg(format!(
            "fractions sum to {}, expected 1",
            ft + fv + fs
        )));
    }
    let nearest = |f: f64| ((n as f64) * f + 0.5).floor() as usize;
    let validation = nearest(fv).min(n);
    let test = nearest(fs).min(n - validation);
    Ok((n - validation - test, validation, test))
}

/// Seeded shuffle followed by a contiguous cut into three parts.
pub fn split_dataset<T: Clone>(
    records: &[T],
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<Split<T>> {
    let (n_train, n_val, _) = split_sizes(records.len(), fractions)?;
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.shuffle(&mut rng(seed));
    let take = |idx: &[usize]| idx.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
    Ok(Split {
        train: take(&order[..n_train]),
        validation: take(&order[n_train..n_train + n_val]),
        test: take(&order[n_train + n_val..]),
    })
}
