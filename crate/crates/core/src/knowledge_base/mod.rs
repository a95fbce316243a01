//! Safety rules derived from adverse-event reports and drug interactions,
//! and the filter that applies them to scored candidates.

mod age;
mod gender;
mod interactions;
mod ruleset;

pub use age::{derive_age_rules, AgeRule, AgeRules, Z_975};
pub use gender::{derive_gender_rules, exposures_from_ratings, AllowedGenders, Exposures, GenderRule, RiskMode};
pub use interactions::{check_interactions, InteractionCheck, InteractionIndex, InteractionVerdict};
pub use ruleset::{
    apply_rules, derive_rules, violations, AgeRuleDirection, Candidate, FilterOutcome, Patient, RuleConfig,
    SafetyRuleSet, Violation,
};
