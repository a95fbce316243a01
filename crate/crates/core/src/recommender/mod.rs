//! End-to-end training pipeline and safety-filtered top-N queries.

mod features;
mod pipeline;
mod recommend;

pub use features::{raw_drug_features, user_profiles, UserFeatureSpace, UserProfile};
pub use pipeline::{build_pipeline, rating_cur, PipelineArtifacts, PipelineConfig};
pub use recommend::{
    assign_patient, cold_start_score, ranked_candidates, recommend, recommend_with, ColdStart, ColdStartEstimate,
    PatientQuery, Recommendation, RecommendOutcome,
};
