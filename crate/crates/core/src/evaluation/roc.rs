use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Scores `>= threshold` are called positive. The first point uses +∞.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC curve by sweeping thresholds over the distinct scores (equal scores
/// move together), and its area by the trapezoid rule.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<(Vec<RocPoint>, f64)> {
    if scores.len() != labels.len() {
        return Err(Error::arg(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::arg("scores contain NaN"));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Undefined("AUC needs both positive and negative labels".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let prev = *points.last().expect("starts with one point");
        let p = RocPoint {
            threshold: s,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        };
        auc += (p.fpr - prev.fpr) * (p.tpr + prev.tpr) / 2.0;
        points.push(p);
    }
    Ok((points, auc))
}
