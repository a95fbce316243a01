use super::ClusterModel;
use crate::error::{Error, Result};
use crate::factorization::SparseRatingMatrix;
use crate::scalar::Scalar;
use std::collections::{BTreeSet, HashMap};

/// Averages raw ratings into a cluster × drug matrix. Each rating is given
/// as `(user features, drug name, cur)`; users are placed with
/// [`ClusterModel::assign`]. Columns follow `drug_index`.
pub fn compact_rating_matrix<T: Scalar>(
    ratings: &[(Vec<T>, String, T)],
    user_model: &ClusterModel<T>,
    drug_index: &[String],
) -> Result<SparseRatingMatrix<T>> {
    let mut labelled = Vec::with_capacity(ratings.len());
    for (features, drug, cur) in ratings {
        labelled.push((user_model.assign(features)?, drug.as_str(), *cur));
    }
    compact_by_cluster(&labelled, user_model.final_k, drug_index)
}

/// Same as [`compact_rating_matrix`] for ratings whose cluster is known.
pub fn compact_by_cluster<T: Scalar>(
    ratings: &[(usize, &str, T)],
    clusters: usize,
    drug_index: &[String],
) -> Result<SparseRatingMatrix<T>> {
    let columns: HashMap<&str, usize> = drug_index
        .iter()
        .enumerate()
        .map(|(j, d)| (d.as_str(), j))
        .collect();
    let unknown: BTreeSet<&str> = ratings
        .iter()
        .filter(|(_, d, _)| !columns.contains_key(d))
        .map(|&(_, d, _)| d)
        .collect();
    if !unknown.is_empty() {
        return Err(Error::Validation(
            unknown
                .into_iter()
                .map(|d| format!("rating references unknown drug `{d}`"))
                .collect(),
        ));
    }
    let mut m = SparseRatingMatrix::empty(clusters, drug_index.len());
    let mut sums = vec![T::zero(); clusters * drug_index.len()];
    for &(cluster, drug, cur) in ratings {
        if cluster >= clusters {
            return Err(Error::arg(format!("cluster {cluster} out of range")));
        }
        let k = m.idx(cluster, columns[drug]);
        sums[k] += cur;
        m.counts[k] += 1;
        m.mask[k] = 1;
    }
    for (k, s) in sums.into_iter().enumerate() {
        if m.mask[k] == 1 {
            m.values[k] = s / T::from_count(m.counts[k] as usize);
        }
    }
    Ok(m)
}
