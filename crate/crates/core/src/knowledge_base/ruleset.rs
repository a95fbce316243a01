use super::age::{derive_age_rules, AgeRule};
use super::gender::{check_threshold, derive_gender_rules, Exposures, GenderRule, RiskMode};
use super::interactions::{check_interactions, InteractionIndex, InteractionVerdict};
use crate::dataset::{AdverseEventRecord, Gender, InteractionRecord};
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Whether a patient age inside a drug's adverse-event age interval
/// excludes the drug, or is required for it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgeRuleDirection {
    #[default]
    ExcludeInside,
    RequireInside,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleConfig {
    pub threshold: f64,
    pub risk_mode: RiskMode,
    pub age_rule_direction: AgeRuleDirection,
    pub gender_rules: bool,
    pub age_rules: bool,
    pub interactions: bool,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            threshold: 0.5,
            risk_mode: RiskMode::AtLeastOne,
            age_rule_direction: AgeRuleDirection::ExcludeInside,
            gender_rules: true,
            age_rules: true,
            interactions: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyRuleSet {
    pub gender_rules: BTreeMap<String, GenderRule>,
    pub age_rules: BTreeMap<String, AgeRule>,
    pub interaction_index: InteractionIndex,
    pub threshold: f64,
    pub risk_mode: RiskMode,
    pub age_rule_direction: AgeRuleDirection,
    /// Drugs that got no age rule for lack of records.
    pub age_rules_skipped: Vec<String>,
}

impl Default for SafetyRuleSet {
    fn default() -> Self {
        SafetyRuleSet::empty()
    }
}

impl SafetyRuleSet {
    /// No rules: every candidate passes.
    pub fn empty() -> Self {
        SafetyRuleSet {
            gender_rules: BTreeMap::new(),
            age_rules: BTreeMap::new(),
            interaction_index: InteractionIndex::default(),
            threshold: 0.5,
            risk_mode: RiskMode::AtLeastOne,
            age_rule_direction: AgeRuleDirection::ExcludeInside,
            age_rules_skipped: Vec::new(),
        }
    }
}

/// Derives all rule families enabled in `config`.
pub fn derive_rules(
    adverse_events: &[AdverseEventRecord],
    interactions: &[InteractionRecord],
    exposures: &Exposures,
    catalog: &[String],
    config: &RuleConfig,
) -> Result<SafetyRuleSet> {
    check_threshold(config.threshold)?;
    let mut set = SafetyRuleSet {
        threshold: config.threshold,
        risk_mode: config.risk_mode,
        age_rule_direction: config.age_rule_direction,
        ..SafetyRuleSet::empty()
    };
    if config.gender_rules {
        set.gender_rules = derive_gender_rules(adverse_events, exposures, config.threshold, config.risk_mode)?;
    }
    if config.age_rules {
        let age = derive_age_rules(adverse_events);
        set.age_rules = age.rules;
        set.age_rules_skipped = age.skipped;
    }
    if config.interactions {
        set.interaction_index = InteractionIndex::new(interactions).with_catalog(catalog);
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Patient {
    pub age: f64,
    pub gender: Gender,
    pub current_drugs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate<T> {
    pub drug_name: String,
    pub score: T,
    /// Moderate interactions with the patient's current drugs.
    pub warnings: Vec<(String, String)>,
}

impl<T> Candidate<T> {
    pub fn new(drug_name: impl Into<String>, score: T) -> Self {
        Candidate {
            drug_name: drug_name.into(),
            score,
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum Violation {
    Gender { gender: Gender, risk: Option<f64> },
    Age { age: f64, low: f64, high: f64 },
    Interaction { pairs: Vec<(String, String)> },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Gender { gender, risk: Some(r) } => {
                write!(f, "adverse-event risk {r:.3} for {} patients", gender.as_str())
            }
            Violation::Gender { gender, risk: None } => {
                write!(f, "not allowed for {} patients", gender.as_str())
            }
            Violation::Age { age, low, high } => {
                write!(f, "age {age} against adverse-event interval [{low:.2}, {high:.2}]")
            }
            Violation::Interaction { pairs } => {
                let names: Vec<String> = pairs.iter().map(|(a, b)| format!("{a}+{b}")).collect();
                write!(f, "major interaction {}", names.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome<T> {
    pub kept: Vec<Candidate<T>>,
    pub removed: Vec<(Candidate<T>, Vec<Violation>)>,
    /// Drugs the interaction index has never seen.
    pub unknown_drugs: Vec<String>,
}

/// Every rule `drug` breaks for `patient`.
pub fn violations(drug: &str, patient: &Patient, rules: &SafetyRuleSet) -> (Vec<Violation>, Vec<(String, String)>, Vec<String>) {
    let mut out = Vec::new();
    if let Some(rule) = rules.gender_rules.get(drug) {
        if !rule.allowed.permits(patient.gender) {
            out.push(Violation::Gender {
                gender: patient.gender,
                risk: rule.risk_for(patient.gender),
            });
        }
    }
    if let Some(rule) = rules.age_rules.get(drug) {
        let inside = rule.contains(patient.age);
        let blocked = match rules.age_rule_direction {
            AgeRuleDirection::ExcludeInside => inside,
            AgeRuleDirection::RequireInside => !inside,
        };
        if blocked {
            out.push(Violation::Age {
                age: patient.age,
                low: rule.low,
                high: rule.high,
            });
        }
    }
    let check = check_interactions(drug, &patient.current_drugs, &rules.interaction_index);
    let warnings = match check.verdict {
        InteractionVerdict::Exclude(pairs) => {
            out.push(Violation::Interaction { pairs });
            Vec::new()
        }
        InteractionVerdict::Warn(pairs) => pairs,
        InteractionVerdict::Clear => Vec::new(),
    };
    (out, warnings, check.unknown_drugs)
}

/// Drops candidates that break a rule. Survivors keep their order and
/// score and carry their moderate-interaction warnings.
pub fn apply_rules<T: Clone>(candidates: &[Candidate<T>], patient: &Patient, rules: &SafetyRuleSet) -> FilterOutcome<T> {
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    let mut unknown: Vec<String> = Vec::new();
    for c in candidates {
        let (v, warnings, unk) = violations(&c.drug_name, patient, rules);
        for u in unk {
            if !unknown.contains(&u) {
                unknown.push(u);
            }
        }
        let mut c = c.clone();
        c.warnings = warnings;
        if v.is_empty() {
            kept.push(c);
        } else {
            removed.push((c, v));
        }
    }
    FilterOutcome {
        kept,
        removed,
        unknown_drugs: unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AdverseEvent, Severity};
    use crate::knowledge_base::AllowedGenders;
    use proptest::prelude::*;

    fn patient(age: f64, gender: Gender, current: &[&str]) -> Patient {
        Patient {
            age,
            gender,
            current_drugs: current.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn cands(names: &[&str]) -> Vec<Candidate<f64>> {
        names
            .iter()
            .enumerate()
            .map(|(i, n)| Candidate::new(*n, 1.0 - i as f64 * 0.1))
            .collect()
    }

    fn rules() -> SafetyRuleSet {
        let mut set = SafetyRuleSet::empty();
        set.gender_rules.insert(
            "M".into(),
            GenderRule {
                drug_name: "M".into(),
                lambda_female: 1.5,
                lambda_male: 0.0,
                risk_female: 0.78,
                risk_male: 0.0,
                allowed: AllowedGenders::Male,
                exposure_counts: (10.0, 10.0),
                event_counts: (15, 0),
            },
        );
        set.age_rules.insert("AGE".into(), AgeRule::from_ages("AGE", &[48.04 + 0.0, 51.96]).map(|mut r| {
            r.low = 48.04;
            r.high = 51.96;
            r
        }).unwrap());
        set.interaction_index = InteractionIndex::new(&[
            InteractionRecord { drug_a: "X".into(), drug_b: "CUR".into(), severity: Severity::Major },
            InteractionRecord { drug_a: "W".into(), drug_b: "CUR".into(), severity: Severity::Moderate },
        ]);
        set
    }

    #[test]
    fn empty_ruleset_is_identity() {
        let c = cands(&["A", "B", "C"]);
        let out = apply_rules(&c, &patient(30.0, Gender::Female, &[]), &SafetyRuleSet::empty());
        assert_eq!(out.kept, c);
        assert!(out.removed.is_empty());
    }

    #[test]
    fn gender_rule_removes_drug() {
        let out = apply_rules(&cands(&["M", "A"]), &patient(30.0, Gender::Female, &[]), &rules());
        assert_eq!(out.kept.iter().map(|c| c.drug_name.as_str()).collect::<Vec<_>>(), vec!["A"]);
        assert!(matches!(out.removed[0].1[0], Violation::Gender { gender: Gender::Female, .. }));
        let out = apply_rules(&cands(&["M"]), &patient(30.0, Gender::Male, &[]), &rules());
        assert_eq!(out.kept.len(), 1);
    }

    #[test]
    fn age_interval_direction() {
        let r = rules();
        assert!(apply_rules(&cands(&["AGE"]), &patient(50.0, Gender::Male, &[]), &r).kept.is_empty());
        assert_eq!(apply_rules(&cands(&["AGE"]), &patient(30.0, Gender::Male, &[]), &r).kept.len(), 1);
        let require = SafetyRuleSet { age_rule_direction: AgeRuleDirection::RequireInside, ..r };
        assert_eq!(apply_rules(&cands(&["AGE"]), &patient(50.0, Gender::Male, &[]), &require).kept.len(), 1);
        assert!(apply_rules(&cands(&["AGE"]), &patient(30.0, Gender::Male, &[]), &require).kept.is_empty());
    }

    #[test]
    fn interactions_exclude_and_warn() {
        let out = apply_rules(&cands(&["X", "W", "A"]), &patient(30.0, Gender::Male, &["CUR"]), &rules());
        let kept: Vec<&str> = out.kept.iter().map(|c| c.drug_name.as_str()).collect();
        assert_eq!(kept, vec!["W", "A"]);
        assert_eq!(out.kept[0].warnings, vec![("W".to_string(), "CUR".to_string())]);
        assert!(out.kept[1].warnings.is_empty());
    }

    #[test]
    fn derive_rules_respects_switches() {
        let e = AdverseEventRecord {
            drug_name: "A".into(),
            age: 30,
            gender: Gender::Female,
            reaction: String::new(),
            events: [AdverseEvent::Death].into_iter().collect(),
            other_drugs: vec![],
        };
        let exp: Exposures = [(("A".to_string(), Gender::Female), 1.0)].into_iter().collect();
        let all = derive_rules(&[e.clone(), e.clone()], &[], &exp, &[], &RuleConfig::default()).unwrap();
        assert_eq!(all.gender_rules["A"].allowed, AllowedGenders::Male);
        assert!(all.age_rules.contains_key("A"));
        let none = RuleConfig { gender_rules: false, age_rules: false, interactions: false, ..Default::default() };
        let off = derive_rules(&[e.clone(), e], &[], &exp, &[], &none).unwrap();
        assert!(off.gender_rules.is_empty() && off.age_rules.is_empty());
    }

    proptest! {
        #[test]
        fn output_is_an_idempotent_subsequence(
            picks in prop::collection::vec(prop::sample::select(vec!["M", "AGE", "X", "W", "A", "B"]), 0..8),
            age in 0.0..100.0f64,
            female in any::<bool>(),
            on_cur in any::<bool>(),
        ) {
            let g = if female { Gender::Female } else { Gender::Male };
            let p = patient(age, g, if on_cur { &["CUR"] } else { &[] });
            let c = cands(&picks);
            let once = apply_rules(&c, &p, &rules()).kept;
            let mut it = c.iter();
            for k in &once {
                prop_assert!(it.any(|x| x.drug_name == k.drug_name && x.score == k.score));
            }
            let twice = apply_rules(&once, &p, &rules()).kept;
            prop_assert_eq!(once, twice);
        }
    }
}
