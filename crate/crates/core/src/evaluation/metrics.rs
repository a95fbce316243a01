use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Counts agreement between predicted and actual ratings after cutting
/// both at `threshold` (display scale, inclusive).
pub fn binarize_and_count(predicted: &[f64], actual: &[f64], threshold: f64) -> Result<ConfusionMatrix> {
    if predicted.len() != actual.len() {
        return Err(Error::arg(format!(
            "{} predictions for {} actual values",
            predicted.len(),
            actual.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &a) in predicted.iter().zip(actual) {
        match (p >= threshold, a >= threshold) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f1: f64,
    pub f2: f64,
    pub mcc: f64,
    /// Metrics whose denominator was zero and were reported as 0.
    pub undefined: Vec<String>,
}

fn ratio(num: f64, den: f64, name: &str, undefined: &mut Vec<String>) -> f64 {
    if den == 0.0 {
        undefined.push(name.to_string());
        0.0
    } else {
        num / den
    }
}

/// `(1+β²)·P·R / (β²·P + R)`, 0 when the denominator is 0.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let den = b2 * precision + recall;
    if den == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / den
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> ClassificationMetrics {
    let (tp, fp, tn, fn_) = (cm.tp as f64, cm.fp as f64, cm.tn as f64, cm.fn_ as f64);
    let mut undefined = Vec::new();
    let accuracy = ratio(tp + tn, tp + fp + tn + fn_, "accuracy", &mut undefined);
    let sensitivity = ratio(tp, tp + fn_, "sensitivity", &mut undefined);
    let specificity = ratio(tn, tn + fp, "specificity", &mut undefined);
    let precision = ratio(tp, tp + fp, "precision", &mut undefined);
    let mut fb = |beta: f64, name: &str| {
        let b2 = beta * beta;
        ratio(
            (1.0 + b2) * precision * sensitivity,
            b2 * precision + sensitivity,
            name,
            &mut undefined,
        )
    };
    let f1 = fb(1.0, "f1");
    let f2 = fb(2.0, "f2");
    let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    let mcc = ratio(tp * tn - fp * fn_, den, "mcc", &mut undefined);
    ClassificationMetrics {
        accuracy,
        sensitivity,
        specificity,
        precision,
        f1,
        f2,
        mcc,
        undefined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(tp: u64, fp: u64, tn: u64, fn_: u64) -> ConfusionMatrix {
        ConfusionMatrix { tp, fp, tn, fn_ }
    }

    #[test]
    fn perfect_classifier() {
        let m = metrics(&cm(1, 0, 1, 0));
        assert_eq!((m.accuracy, m.mcc), (1.0, 1.0));
        assert!(m.undefined.is_empty());
    }

    #[test]
    fn symmetric_counts() {
        let m = metrics(&cm(1, 1, 1, 1));
        assert_eq!((m.accuracy, m.mcc), (0.5, 0.0));
    }

    #[test]
    fn f2_by_hand() {
        assert!((f_beta(0.5, 1.0, 2.0) - 5.0 * 0.5 / 3.0).abs() < 1e-15);
        let m = metrics(&cm(1, 1, 0, 0));
        assert!((m.f2 - 0.8333333333333334).abs() < 1e-12);
    }

    #[test]
    fn zero_denominators_flagged() {
        let m = metrics(&cm(0, 0, 5, 0));
        assert_eq!(m.sensitivity, 0.0);
        assert_eq!(m.precision, 0.0);
        assert!(m.undefined.contains(&"sensitivity".to_string()));
        assert!(m.undefined.contains(&"mcc".to_string()));
        assert_eq!(m.accuracy, 1.0);
    }

    #[test]
    fn binarize_edges() {
        let same = binarize_and_count(&[5.0, 7.0], &[5.0, 7.0], 4.0).unwrap();
        assert_eq!((same.fp, same.fn_), (0, 0));
        let under = binarize_and_count(&[1.0, 2.0, 3.0], &[8.0, 9.0, 4.0], 4.0).unwrap();
        assert_eq!(under, cm(0, 0, 0, 3));
        assert!(binarize_and_count(&[1.0], &[], 4.0).is_err());
    }

    #[test]
    fn mcc_flip_behaviour() {
        let base = cm(7, 2, 5, 3);
        let m = metrics(&base).mcc;
        // Flip labels and predictions: tp<->tn, fp<->fn.
        assert!((metrics(&cm(5, 3, 7, 2)).mcc - m).abs() < 1e-15);
        // Flip predictions only: tp<->fn, fp<->tn.
        assert!((metrics(&cm(3, 5, 2, 7)).mcc + m).abs() < 1e-15);
    }
}
