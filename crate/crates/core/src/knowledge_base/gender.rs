use crate::dataset::{AdverseEventRecord, Gender, RatingRecord};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// How the per-(drug, gender) event rate becomes a risk probability.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskMode {
    /// `1 − e^(−λ)`: probability of at least one event.
    #[default]
    AtLeastOne,
    /// `λ·e^(−λ)`: probability of exactly one event.
    PmfAtOne,
}

impl RiskMode {
    pub fn risk(self, lambda: f64) -> f64 {
        match self {
            RiskMode::AtLeastOne => 1.0 - (-lambda).exp(),
            RiskMode::PmfAtOne => lambda * (-lambda).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllowedGenders {
    None,
    Female,
    Male,
    Both,
}

impl AllowedGenders {
    pub fn from_flags(female: bool, male: bool) -> Self {
        match (female, male) {
            (true, true) => AllowedGenders::Both,
            (true, false) => AllowedGenders::Female,
            (false, true) => AllowedGenders::Male,
            (false, false) => AllowedGenders::None,
        }
    }

    /// A patient of unspecified gender is only allowed a drug allowed for both.
    pub fn permits(self, gender: Gender) -> bool {
        matches!(
            (self, gender),
            (AllowedGenders::Both, _) | (AllowedGenders::Female, Gender::Female) | (AllowedGenders::Male, Gender::Male)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenderRule {
    pub drug_name: String,
    pub lambda_female: f64,
    pub lambda_male: f64,
    pub risk_female: f64,
    pub risk_male: f64,
    pub allowed: AllowedGenders,
    /// (female, male)
    pub exposure_counts: (f64, f64),
    /// (female, male)
    pub event_counts: (usize, usize),
}

impl GenderRule {
    pub fn risk_for(&self, gender: Gender) -> Option<f64> {
        match gender {
            Gender::Female => Some(self.risk_female),
            Gender::Male => Some(self.risk_male),
            Gender::Unspecified => None,
        }
    }
}

/// Number of patients of each gender exposed to each drug.
pub type Exposures = BTreeMap<(String, Gender), f64>;

/// Per-(drug, gender) rating counts, the fallback exposure estimate when no
/// exposure table is supplied.
pub fn exposures_from_ratings(ratings: &[RatingRecord]) -> Exposures {
    let mut out = Exposures::new();
    for r in ratings {
        if r.gender != Gender::Unspecified {
            *out.entry((r.drug_name.clone(), r.gender)).or_default() += 1.0;
        }
    }
    out
}

/// `λ = events / η` per drug and gender; a gender is disallowed when its
/// risk exceeds `threshold`. One rule per drug with at least one
/// gendered adverse-event report. Reports of unspecified gender are ignored.
pub fn derive_gender_rules(
    adverse_events: &[AdverseEventRecord],
    exposures: &Exposures,
    threshold: f64,
    mode: RiskMode,
) -> Result<BTreeMap<String, GenderRule>> {
    check_threshold(threshold)?;
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for e in adverse_events {
        let c = counts.entry(e.drug_name.as_str()).or_default();
        match e.gender {
            Gender::Female => c.0 += 1,
            Gender::Male => c.1 += 1,
            Gender::Unspecified => {}
        }
    }
    let mut errors = Vec::new();
    let mut rules = BTreeMap::new();
    for (drug, (f_events, m_events)) in counts {
        if f_events + m_events == 0 {
            continue;
        }
        let eta = |g: Gender| exposures.get(&(drug.to_string(), g)).copied().unwrap_or(0.0);
        let (eta_f, eta_m) = (eta(Gender::Female), eta(Gender::Male));
        let mut lambda = |events: usize, eta: f64, g: Gender| -> f64 {
            if events == 0 {
                0.0
            } else if eta > 0.0 {
                events as f64 / eta
            } else {
                errors.push(format!(
                    "{drug}: {events} {} adverse events but no recorded exposure",
                    g.as_str()
                ));
                f64::NAN
            }
        };
        let lambda_female = lambda(f_events, eta_f, Gender::Female);
        let lambda_male = lambda(m_events, eta_m, Gender::Male);
        let (risk_female, risk_male) = (mode.risk(lambda_female), mode.risk(lambda_male));
        rules.insert(
            drug.to_string(),
            GenderRule {
                drug_name: drug.to_string(),
                lambda_female,
                lambda_male,
                risk_female,
                risk_male,
                allowed: AllowedGenders::from_flags(risk_female <= threshold, risk_male <= threshold),
                exposure_counts: (eta_f, eta_m),
                event_counts: (f_events, m_events),
            },
        );
    }
    if errors.is_empty() {
        Ok(rules)
    } else {
        Err(Error::Validation(errors))
    }
}

pub(crate) fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::arg(format!("risk threshold {threshold} outside (0, 1)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::AdverseEvent;

    fn event(drug: &str, gender: Gender, age: u32) -> AdverseEventRecord {
        AdverseEventRecord {
            drug_name: drug.into(),
            age,
            gender,
            reaction: "x".into(),
            events: [AdverseEvent::Hospitalization].into_iter().collect(),
            other_drugs: vec![],
        }
    }

    fn exposures(entries: &[(&str, Gender, f64)]) -> Exposures {
        entries.iter().map(|&(d, g, n)| ((d.to_string(), g), n)).collect()
    }

    #[test]
    fn risk_modes() {
        assert_eq!(RiskMode::AtLeastOne.risk(0.0), 0.0);
        assert_eq!(RiskMode::PmfAtOne.risk(0.0), 0.0);
        assert!((RiskMode::AtLeastOne.risk(1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((RiskMode::PmfAtOne.risk(1.0) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn unit_rate_diverges_between_modes() {
        let events = vec![event("A", Gender::Female, 40), event("A", Gender::Female, 50)];
        let exp = exposures(&[("A", Gender::Female, 2.0), ("A", Gender::Male, 4.0)]);
        let tail = derive_gender_rules(&events, &exp, 0.5, RiskMode::AtLeastOne).unwrap();
        assert_eq!(tail["A"].lambda_female, 1.0);
        assert_eq!(tail["A"].allowed, AllowedGenders::Male);
        let pmf = derive_gender_rules(&events, &exp, 0.5, RiskMode::PmfAtOne).unwrap();
        assert_eq!(pmf["A"].allowed, AllowedGenders::Both);
    }

    #[test]
    fn events_without_exposure_are_rejected() {
        let err = derive_gender_rules(&[event("A", Gender::Male, 30)], &Exposures::new(), 0.5, RiskMode::AtLeastOne)
            .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn unspecified_patients_need_both() {
        assert!(AllowedGenders::Both.permits(Gender::Unspecified));
        assert!(!AllowedGenders::Female.permits(Gender::Unspecified));
        assert!(!AllowedGenders::None.permits(Gender::Female));
        assert!(AllowedGenders::Male.permits(Gender::Male));
    }

    #[test]
    fn threshold_must_be_a_probability() {
        assert!(derive_gender_rules(&[], &Exposures::new(), 1.0, RiskMode::AtLeastOne).is_err());
        assert!(derive_gender_rules(&[], &Exposures::new(), 0.0, RiskMode::AtLeastOne).is_err());
    }
}
