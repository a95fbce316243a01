use pharmarec::dataset::{generate_synthetic, SyntheticConfig};
use pharmarec::evaluation::*;
use pharmarec::recommender::PipelineConfig;
use pharmarec::seed::rng;
use proptest::prelude::*;
use rand::Rng;

/// Per-pair counting, written independently of the library.
fn oracle_counts(pred: &[f64], actual: &[f64], t: f64) -> [u64; 4] {
    let mut c = [0u64; 4];
    for i in 0..pred.len() {
        let p = !(pred[i] < t);
        let a = !(actual[i] < t);
        let slot = if p && a {
            0
        } else if p {
            1
        } else if !a {
            2
        } else {
            3
        };
        c[slot] += 1;
    }
    c
}

fn safe(n: f64, d: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        n / d
    }
}

#[test]
fn confusion_counts_and_rates_match_oracle() {
    let mut r = rng(11);
    for _ in 0..1000 {
        let n = r.random_range(1..=500);
        // Coarse grid so exact-threshold ties occur.
        let pred: Vec<f64> = (0..n).map(|_| f64::from(r.random_range(0..=20u32)) / 2.0).collect();
        let actual: Vec<f64> = (0..n).map(|_| f64::from(r.random_range(0..=20u32)) / 2.0).collect();
        let t = f64::from(r.random_range(0..=20u32)) / 2.0;
        let cm = binarize_and_count(&pred, &actual, t).unwrap();
        let [tp, fp, tn, fn_] = oracle_counts(&pred, &actual, t);
        assert_eq!((cm.tp, cm.fp, cm.tn, cm.fn_), (tp, fp, tn, fn_));
        let (tp, fp, tn, fn_) = (tp as f64, fp as f64, tn as f64, fn_ as f64);
        let m = metrics(&cm);
        let p = safe(tp, tp + fp);
        let rc = safe(tp, tp + fn_);
        let expect = [
            safe(tp + tn, n as f64),
            rc,
            safe(tn, tn + fp),
            p,
            safe(2.0 * p * rc, p + rc),
            safe(5.0 * p * rc, 4.0 * p + rc),
            safe(tp * tn - fp * fn_, ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt()),
        ];
        let got = [m.accuracy, m.sensitivity, m.specificity, m.precision, m.f1, m.f2, m.mcc];
        for (g, e) in got.iter().zip(expect) {
            assert!((g - e).abs() <= 1e-12, "{g} vs {e}");
        }
        assert!(m.mcc >= -1.0 && m.mcc <= 1.0);
    }
}

fn mann_whitney(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] && !labels[j] {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

#[test]
fn auc_matches_pair_counting() {
    let mut r = rng(5);
    let mut done = 0;
    while done < 100 {
        let n = r.random_range(2..=100);
        let scores: Vec<f64> = (0..n).map(|_| f64::from(r.random_range(0..30u32)) / 29.0).collect();
        let labels: Vec<bool> = (0..n).map(|_| r.random_bool(0.4)).collect();
        if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
            assert!(roc_auc(&scores, &labels).is_err());
            continue;
        }
        let (pts, auc) = roc_auc(&scores, &labels).unwrap();
        assert!((auc - mann_whitney(&scores, &labels)).abs() < 1e-12);
        assert_eq!(pts.first().map(|p| (p.fpr, p.tpr)), Some((0.0, 0.0)));
        assert_eq!(pts.last().map(|p| (p.fpr, p.tpr)), Some((1.0, 1.0)));
        done += 1;
    }
}

proptest! {
    #[test]
    fn auc_invariant_under_monotone_transform(
        pairs in prop::collection::vec((0u32..50, any::<bool>()), 2..60)
    ) {
        let scores: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
        let labels: Vec<bool> = pairs.iter().map(|p| p.1).collect();
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let (_, a) = roc_auc(&scores, &labels).unwrap();
        let warped: Vec<f64> = scores.iter().map(|s| (s / 7.0).exp() - 3.0).collect();
        let (_, b) = roc_auc(&warped, &labels).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn cumulative_never_exceeds_hit_rate(
        samples in prop::collection::vec((0usize..5, 0usize..8, 0.0f64..10.0), 1..80),
        threshold in 0.0f64..11.0,
    ) {
        let lists: TopNLists = (0..5)
            .map(|u| (format!("u{u}"), (0..8).filter(|d| (d + u) % 3 == 0).map(|d| format!("d{d}")).collect()))
            .collect();
        let samples: Vec<TestSample> = samples
            .into_iter()
            .map(|(u, d, r)| TestSample { user_id: format!("u{u}"), drug_name: format!("d{d}"), rating: r })
            .collect();
        let hr = hit_rate(&lists, &samples).unwrap();
        prop_assert!(cumulative_hit_rate(&lists, &samples, threshold).unwrap() <= hr);
        prop_assert_eq!(cumulative_hit_rate(&lists, &samples, 0.0).unwrap(), hr);
    }

    #[test]
    fn f1_is_harmonic_mean(tp in 1u64..50, fp in 0u64..50, tn in 0u64..50, fn_ in 0u64..50) {
        let m = metrics(&ConfusionMatrix { tp, fp, tn, fn_ });
        prop_assert!((m.f1 - 2.0 / (1.0 / m.precision + 1.0 / m.sensitivity)).abs() < 1e-12);
        prop_assert!((m.accuracy - (tp + tn) as f64 / (tp + fp + tn + fn_) as f64).abs() < 1e-15);
    }
}

fn small() -> SyntheticConfig {
    SyntheticConfig {
        users: 200,
        drugs: 20,
        user_clusters: 4,
        preferred_per_cluster: 3,
        ..SyntheticConfig::default()
    }
}

#[test]
fn harness_report_is_complete_and_deterministic() {
    let bundle = generate_synthetic(&small(), 9).unwrap();
    let cfg = PipelineConfig {
        seed: 9,
        ..PipelineConfig::default()
    };
    let (_, a) = run_evaluation(&bundle, &cfg, &EvaluationConfig::default()).unwrap();
    let (_, b) = run_evaluation(&bundle, &cfg, &EvaluationConfig::default()).unwrap();
    assert_eq!(a.report, b.report);
    let r = &a.report;
    assert_eq!(r.test_samples, 80);
    for m in [&r.proposed, &r.baseline] {
        assert_eq!(m.confusion.total(), 80);
        for c in &m.cumulative_curve {
            assert!(c.value <= m.hit_rate);
        }
        assert_eq!(m.cumulative_curve[0].value, m.hit_rate);
    }
    assert!(r.proposed.hit_rate > 2.0 * 10.0 / 20.0 * 0.5);
    let without = r.adverse.without_kb.unwrap();
    let with = r.adverse.with_kb.unwrap();
    assert!(with.death <= without.death);
    assert_eq!(without.recommendations, r.test_users * 10);

    let csv = r.to_csv();
    assert!(csv.starts_with("model,metric,value\n"));
    assert!(csv.contains("baseline_mf,hit_rate,"));
    assert!(csv.contains("with_kb,death_ratio,"));
    let roc = a.roc.to_csv();
    assert!(roc.starts_with("model,threshold,fpr,tpr\nproposed,inf,0,0\n"));
    let json = serde_json::to_value(r).unwrap();
    assert!(json["proposed"]["accuracy"].is_number());
    assert!(json["proposed"]["confusion"]["fn"].is_number());
}

#[test]
fn holdout_partitions_ratings_and_events() {
    let bundle = generate_synthetic(&small(), 2).unwrap();
    let cfg = EvaluationConfig::default();
    let h = holdout(&bundle, 2, &cfg).unwrap();
    assert_eq!(h.train.ratings.len() + h.validation.len() + h.test.len(), bundle.ratings.len());
    assert_eq!(h.train.adverse_events.len() + h.adverse_test.len(), bundle.adverse_events.len());
    let expected = (bundle.adverse_events.len() as f64 * 0.2 + 0.5).floor() as usize;
    assert_eq!(h.adverse_test.len(), expected);
    assert_eq!(h, holdout(&bundle, 2, &cfg).unwrap());
    assert!(holdout(&bundle, 2, &EvaluationConfig { top_n: 0, ..cfg }).is_err());
}
