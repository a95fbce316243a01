//! Cluster discovery without a preset cluster count, and compaction of the
//! rating matrix onto user clusters.

mod compact;
mod scale;
mod ukmeans;

pub use compact::{compact_by_cluster, compact_rating_matrix};
pub use scale::{MinMaxScaler, StandardScaler};
pub use ukmeans::{
    kmeans_objective, ukmeans_fit, ukmeans_fit_from, ClusterModel, FitDiagnostics, PinnedPenalty,
    UKMeans, UKMeansParams,
};
