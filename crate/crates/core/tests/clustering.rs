use pharmarec::clustering::{
    kmeans_objective, ukmeans_fit, ukmeans_fit_from, StandardScaler, UKMeans, UKMeansParams,
};
use pharmarec::dataset::gaussian_blobs;
use pharmarec::seed;
use proptest::prelude::*;
use rand::Rng;

/// Textbook Lloyd iteration: nearest center (lowest index on ties), then
/// member means; empty clusters keep their center.
fn lloyd_step(points: &[Vec<f64>], centers: &[Vec<f64>]) -> (Vec<usize>, Vec<Vec<f64>>) {
    let labels: Vec<usize> = points
        .iter()
        .map(|p| {
            let mut best = (f64::INFINITY, 0);
            for (k, c) in centers.iter().enumerate() {
                let d: f64 = p.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                if d < best.0 {
                    best = (d, k);
                }
            }
            best.1
        })
        .collect();
    let mut next = centers.to_vec();
    for (k, c) in next.iter_mut().enumerate() {
        let members: Vec<&Vec<f64>> = points.iter().zip(&labels).filter(|(_, &l)| l == k).map(|(p, _)| p).collect();
        if !members.is_empty() {
            for (j, v) in c.iter_mut().enumerate() {
                *v = members.iter().map(|m| m[j]).sum::<f64>() / members.len() as f64;
            }
        }
    }
    (labels, next)
}

fn random_instance(seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut rng = seed::rng(seed);
    let n = rng.random_range(2..=50);
    let d = rng.random_range(1..=4);
    let k = rng.random_range(1..=n.min(6));
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect();
    let centers = points[..k].to_vec();
    (points, centers)
}

#[test]
fn pinned_zero_penalties_match_lloyd_per_iteration() {
    for inst in 0..20 {
        let (points, centers) = random_instance(inst);
        let mut state = UKMeans::with_centers(&points, centers.clone(), UKMeansParams::lloyd(1e-12, 100)).unwrap();
        let mut oracle = centers;
        for _ in 0..30 {
            let (labels, next) = lloyd_step(&points, &oracle);
            state.step();
            assert_eq!(state.labels(), &labels[..], "instance {inst}");
            for (a, b) in state.centers().iter().zip(&next) {
                for (x, y) in a.iter().zip(b) {
                    assert!((x - y).abs() <= 1e-6, "instance {inst}");
                }
            }
            oracle = next;
        }
    }
}

#[test]
fn planted_gaussians_recover_three_clusters() {
    let mut hits = 0;
    for s in 0..10 {
        let (points, _) = gaussian_blobs(3, 200, 8.0, 100 + s).unwrap();
        let points = StandardScaler::fit(&points).unwrap().transform_all(&points).unwrap();
        let model = ukmeans_fit(&points, UKMeansParams { seed: s, ..Default::default() }).unwrap();
        if model.final_k == 3 {
            hits += 1;
        }
    }
    assert!(hits >= 9, "k = 3 in only {hits}/10 seeds");
}

#[test]
fn recovered_clusters_match_planted_labels() {
    let (points, truth) = gaussian_blobs(3, 200, 8.0, 7).unwrap();
    let scaled = StandardScaler::fit(&points).unwrap().transform_all(&points).unwrap();
    let model = ukmeans_fit(&scaled, UKMeansParams::default()).unwrap();
    assert_eq!(model.final_k, 3);
    for k in 0..3 {
        let planted: Vec<usize> = truth.iter().zip(&model.labels).filter(|(_, &l)| l == k).map(|(&t, _)| t).collect();
        assert!(planted.windows(2).all(|w| w[0] == w[1]), "cluster {k} mixes blobs");
    }
}

#[test]
fn model_roundtrips_through_json() {
    let (points, _) = gaussian_blobs(2, 40, 10.0, 3).unwrap();
    let model = ukmeans_fit(&points, UKMeansParams::default()).unwrap();
    let json = serde_json::to_string(&model).unwrap();
    let back: pharmarec::clustering::ClusterModel<f64> = serde_json::from_str(&json).unwrap();
    assert_eq!(model, back);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lloyd_mode_never_raises_the_plain_objective(seed in 0u64..10_000) {
        let (points, centers) = random_instance(seed);
        let mut state = UKMeans::with_centers(&points, centers, UKMeansParams::lloyd(1e-9, 200)).unwrap();
        state.step();
        let first = pharmarec::clustering::ClusterModel::from_parts(
            state.centers().to_vec(), state.mixing_weights().to_vec(), state.labels().to_vec(), 0.0).unwrap();
        let initial = kmeans_objective(&points, &first, 0.0, 0.0);
        let model = state.run();
        prop_assert!(kmeans_objective(&points, &model, 0.0, 0.0) <= initial + 1e-9);
    }

    #[test]
    fn adaptive_fit_invariants(seed in 0u64..10_000, n in 1usize..60) {
        let mut rng = seed::rng(seed);
        let points: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]).collect();
        let model = ukmeans_fit(&points, UKMeansParams { seed, ..Default::default() }).unwrap();
        prop_assert!(model.final_k >= 1 && model.final_k <= n);
        prop_assert_eq!(model.final_k, model.centers.len());
        prop_assert!((model.mixing_weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(model.mixing_weights.iter().all(|&a| a > 0.0));
        prop_assert!(model.count_trace.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn lloyd_fit_from_stops_at_fixed_point() {
    let (points, _) = gaussian_blobs(2, 30, 10.0, 1).unwrap();
    let centers = vec![points[0].clone(), points[1].clone()];
    let model = ukmeans_fit_from(&points, centers, UKMeansParams::lloyd(1e-9, 100)).unwrap();
    assert!(model.converged);
    assert_eq!(model.final_k, 2);
}
