//! Drug recommendation from patient reviews: text features, cluster
//! discovery, neural matrix factorization over sparse ratings, and a
//! knowledge-based safety filter.
//!
//! The numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! at the crate root fix it to `f64`.

pub mod clustering;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod factorization;
pub mod knowledge_base;
pub mod recommender;
pub mod scalar;
pub mod seed;
pub mod textprep;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Scalar type used by the aliases below and by the CLI.
pub type Real = f64;
pub type ClusterModel = clustering::ClusterModel<Real>;
pub type FactorizationModel = factorization::FactorizationModel<Real>;
pub type SparseRatingMatrix = factorization::SparseRatingMatrix<Real>;
pub type NetworkParams = factorization::NetworkParams<Real>;
pub type BaselineMf = factorization::BaselineMf<Real>;
pub type MinMaxScaler = clustering::MinMaxScaler<Real>;
pub type CurInputs = textprep::CurInputs<Real>;
