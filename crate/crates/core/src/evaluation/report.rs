use super::adverse::AdverseRatios;
use super::metrics::{ClassificationMetrics, ConfusionMatrix};
use super::roc::RocPoint;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdValue {
    pub threshold: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub name: String,
    pub confusion: ConfusionMatrix,
    #[serde(flatten)]
    pub metrics: ClassificationMetrics,
    /// `None` when the test labels have a single class.
    pub auc: Option<f64>,
    pub hit_rate: f64,
    pub cumulative_hit_rate: f64,
    pub cumulative_curve: Vec<ThresholdValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdverseAblation {
    pub without_kb: Option<AdverseRatios>,
    pub with_kb: Option<AdverseRatios>,
    pub ground_truth_reports: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub proposed: ModelReport,
    pub baseline: ModelReport,
    pub adverse: AdverseAblation,
    pub test_samples: usize,
    pub test_users: usize,
    pub top_n: usize,
    pub relevance_threshold: f64,
    pub cumulative_threshold: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RocCurves {
    pub proposed: Vec<RocPoint>,
    pub baseline: Vec<RocPoint>,
}

impl RocCurves {
    /// `model,threshold,fpr,tpr`; the leading +∞ threshold is written `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,threshold,fpr,tpr\n");
        for (name, pts) in [("proposed", &self.proposed), ("baseline_mf", &self.baseline)] {
            for p in pts {
                out.push_str(&format!("{name},{},{},{}\n", p.threshold, p.fpr, p.tpr));
            }
        }
        out
    }
}

impl MetricsReport {
    /// Long format: `model,metric,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,metric,value\n");
        for m in [&self.proposed, &self.baseline] {
            let c = &m.metrics;
            let mut row = |metric: &str, v: String| out.push_str(&format!("{},{metric},{v}\n", m.name));
            row("tp", m.confusion.tp.to_string());
            row("fp", m.confusion.fp.to_string());
            row("tn", m.confusion.tn.to_string());
            row("fn", m.confusion.fn_.to_string());
            for (k, v) in [
                ("accuracy", c.accuracy),
                ("sensitivity", c.sensitivity),
                ("specificity", c.specificity),
                ("precision", c.precision),
                ("f1", c.f1),
                ("f2", c.f2),
                ("mcc", c.mcc),
                ("hit_rate", m.hit_rate),
                ("cumulative_hit_rate", m.cumulative_hit_rate),
            ] {
                row(k, v.to_string());
            }
            row("auc", m.auc.map_or_else(String::new, |v| v.to_string()));
        }
        for (name, r) in [("without_kb", &self.adverse.without_kb), ("with_kb", &self.adverse.with_kb)] {
            let cell = |f: fn(&AdverseRatios) -> f64| r.as_ref().map_or_else(String::new, |r| f(r).to_string());
            out.push_str(&format!("{name},death_ratio,{}\n", cell(|r| r.death)));
            out.push_str(&format!("{name},hospitalization_ratio,{}\n", cell(|r| r.hospitalization)));
            out.push_str(&format!("{name},disability_ratio,{}\n", cell(|r| r.disability)));
        }
        out
    }
}
