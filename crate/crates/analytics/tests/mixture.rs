use std::collections::HashMap;

use odaframe_analytics::{Assignment, DensityScale, MixtureModel, MixtureParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const CENTERS: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

fn sample(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let mut pts = Vec::new();
    let mut truth = Vec::new();
    for (l, c) in CENTERS.iter().enumerate() {
        for _ in 0..100 {
            pts.push(c.iter().map(|v| v + noise.sample(&mut rng)).collect());
            truth.push(l);
        }
    }
    (pts, truth)
}

/// Best agreement over the majority mapping from predicted to true labels.
fn agreement(pred: &[i64], truth: &[usize]) -> f64 {
    let mut counts: HashMap<(i64, usize), usize> = HashMap::new();
    for (p, t) in pred.iter().zip(truth) {
        *counts.entry((*p, *t)).or_default() += 1;
    }
    let mut best: HashMap<i64, usize> = HashMap::new();
    for ((p, _), c) in &counts {
        let e = best.entry(*p).or_default();
        *e = (*e).max(*c);
    }
    best.values().sum::<usize>() as f64 / pred.len() as f64
}

fn gaussian_pdf(x: &[f64], mean: &[f64], cov: &[[f64; 2]; 2]) -> f64 {
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    let inv = [[cov[1][1] / det, -cov[0][1] / det], [-cov[1][0] / det, cov[0][0] / det]];
    let d = [x[0] - mean[0], x[1] - mean[1]];
    let q = d[0] * (inv[0][0] * d[0] + inv[0][1] * d[1]) + d[1] * (inv[1][0] * d[0] + inv[1][1] * d[1]);
    (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt())
}

#[test]
fn recovers_generative_clusters() {
    let (pts, truth) = sample(21);
    let model = MixtureModel::fit(&pts, &MixtureParams::with_k_max(8), 5).unwrap();
    assert_eq!(model.effective_components(), 3);
    let labels: Vec<i64> = pts.iter().map(|p| model.assign(p, 0.001).unwrap().label()).collect();
    assert!(agreement(&labels, &truth) >= 0.95);
}

#[test]
fn labels_match_direct_density_evaluation() {
    let (pts, _) = sample(8);
    let model = MixtureModel::fit(&pts, &MixtureParams::with_k_max(6), 2).unwrap();
    let comps: Vec<(f64, Vec<f64>, [[f64; 2]; 2])> = model
        .components()
        .iter()
        .map(|c| {
            let cov = [
                [c.covariance[(0, 0)], c.covariance[(0, 1)]],
                [c.covariance[(1, 0)], c.covariance[(1, 1)]],
            ];
            (c.weight, c.mean.iter().copied().collect(), cov)
        })
        .collect();
    let mut probes = pts.clone();
    probes.extend([vec![0.5, 0.5], vec![3.0, -2.0], vec![0.2, 0.1]]);
    for p in &probes {
        let dens: Vec<f64> = comps.iter().map(|(_, m, c)| gaussian_pdf(p, m, c)).collect();
        let expected = if dens.iter().all(|d| *d < 0.001) {
            Assignment::Outlier
        } else {
            let scores: Vec<f64> = comps.iter().zip(&dens).map(|((w, _, _), d)| w * d).collect();
            let k = (0..scores.len()).max_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap();
            Assignment::Cluster(k)
        };
        assert_eq!(model.assign(p, 0.001).unwrap(), expected, "point {p:?}");
    }
}

#[test]
fn far_points_are_outliers() {
    let (pts, _) = sample(3);
    let model = MixtureModel::fit(&pts, &MixtureParams::with_k_max(8), 1).unwrap();
    for far in [[10.0, 10.0], [-0.6, -0.6], [1.6, 1.6]] {
        assert_eq!(model.assign(&far, 0.001).unwrap(), Assignment::Outlier);
    }
}

#[test]
fn weights_sum_to_one_and_same_seed_repeats() {
    let (pts, _) = sample(9);
    let a = MixtureModel::fit(&pts, &MixtureParams::with_k_max(5), 42).unwrap();
    let b = MixtureModel::fit(&pts, &MixtureParams::with_k_max(5), 42).unwrap();
    assert_eq!(a, b);
    let sum: f64 = a.components().iter().map(|c| c.weight).sum();
    assert!((sum - 1.0).abs() < 1e-9);
}

/// Three groups of 20 in 3-D plus two points 10 sigma from group centers.
fn groups_with_outliers(seed: u64) -> (Vec<Vec<f64>>, Vec<i64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = 5.0;
    let noise = Normal::new(0.0, sigma).unwrap();
    let centers = [[100.0, 40.0, 900.0], [300.0, 60.0, 700.0], [200.0, 90.0, 1100.0]];
    let mut pts = Vec::new();
    let mut truth = Vec::new();
    for (g, c) in centers.iter().enumerate() {
        for _ in 0..20 {
            pts.push(c.iter().map(|v| v + noise.sample(&mut rng)).collect());
            truth.push(g as i64);
        }
    }
    for c in &centers[..2] {
        let dir: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        pts.push(c.iter().zip(&dir).map(|(v, u)| v + 10.0 * sigma * u / len).collect());
        truth.push(-1);
    }
    (pts, truth)
}

#[test]
fn flags_ten_sigma_outliers_among_fitted_points() {
    for k_max in [4, 8] {
        for seed in 0..10 {
            let (pts, truth) = groups_with_outliers(seed);
            let params = MixtureParams {
                covariance_prior_scale: 0.1,
                ..MixtureParams::with_k_max(k_max)
            };
            let model = MixtureModel::fit(&pts, &params, seed).unwrap();
            assert_eq!(model.effective_components(), 3, "k_max {k_max} seed {seed}");
            let labels: Vec<i64> = model
                .label_points(&pts, 0.001, DensityScale::Relative)
                .unwrap()
                .iter()
                .map(|a| a.label())
                .collect();
            assert_eq!(&labels[60..], &[-1, -1], "k_max {k_max} seed {seed}");
            let shifted: Vec<usize> = truth.iter().map(|t| (t + 1) as usize).collect();
            assert!(agreement(&labels, &shifted) >= 0.95, "k_max {k_max} seed {seed}");
        }
    }
}
