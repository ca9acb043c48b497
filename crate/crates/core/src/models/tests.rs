use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::testdata::blobs;
use super::*;
use crate::error::Error;

fn accuracy(pred: &[u8], truth: &[u8]) -> f64 {
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

#[test]
fn dataset_validation() {
    let x = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
    assert!(Dataset::new(x.clone(), vec![0], vec![String::new(); 2]).is_err());
    assert!(Dataset::new(x.clone(), vec![0, 2], vec![String::new(); 2]).is_err());
    let bad = Matrix::from_rows(&[[1.0, f64::NAN]]).unwrap();
    assert!(matches!(
        Dataset::ungrouped(bad, vec![1]),
        Err(Error::NonFinite { row: 0, column: 1 })
    ));
    assert!(Matrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
}

#[test]
fn forest_separates_blobs() {
    let train = blobs(200, 10, 6.0, 1);
    let test = blobs(200, 10, 6.0, 2);
    let forest = ForestModel::train(&train, &ForestConfig { seed: 9, ..Default::default() }).unwrap();
    let m = Model::Forest(forest);
    assert_eq!(accuracy(&m.predict(train.x(), 0.5).unwrap(), train.y()), 1.0);
    assert!(accuracy(&m.predict(test.x(), 0.5).unwrap(), test.y()) > 0.95);
}

#[test]
fn forest_invariants() {
    let train = blobs(120, 6, 2.0, 3);
    let f = ForestModel::train(&train, &ForestConfig { n_estimators: 15, seed: 4, ..Default::default() }).unwrap();
    assert_eq!(f.trees.len(), 15);
    assert_eq!(f.feature_subsample, 2);
    for t in &f.trees {
        for node in &t.nodes {
            match node {
                Node::Leaf { proba } => assert!((proba[0] + proba[1] - 1.0).abs() < 1e-12),
                Node::Split { threshold, left, right, .. } => {
                    assert!(threshold.is_finite());
                    assert!(*left < t.nodes.len() && *right < t.nodes.len());
                }
            }
        }
    }
}

#[test]
fn forest_leaves_are_pure_on_bootstrap_rows() {
    // Without duplicated feature rows, unlimited depth drives every leaf to purity.
    let train = blobs(80, 4, 1.0, 5);
    let f = ForestModel::train(&train, &ForestConfig { n_estimators: 5, seed: 1, ..Default::default() }).unwrap();
    for t in &f.trees {
        for node in &t.nodes {
            if let Node::Leaf { proba } = node {
                assert!(proba[0] == 0.0 || proba[1] == 0.0);
            }
        }
    }
}

#[test]
fn forest_is_deterministic() {
    let train = blobs(100, 5, 2.0, 6);
    let cfg = ForestConfig { n_estimators: 20, seed: 77, ..Default::default() };
    let a = ForestModel::train(&train, &cfg).unwrap();
    let b = ForestModel::train(&train, &cfg).unwrap();
    assert_eq!(a, b);
    let c = ForestModel::train(&train, &ForestConfig { seed: 78, ..cfg }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn single_class_is_rejected() {
    let x = Matrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
    let d = Dataset::ungrouped(x, vec![1, 1, 1]).unwrap();
    assert_eq!(ForestModel::train(&d, &ForestConfig::default()), Err(Error::SingleClassData));
    assert_eq!(LogisticModel::train(&d, &LogisticConfig::default()), Err(Error::SingleClassData));
}

#[test]
fn single_leaf_forest_predicts_leaf_probability() {
    let f = ForestModel {
        trees: vec![Tree::leaf([0.25, 0.75])],
        n_features: 3,
        n_estimators: 1,
        feature_subsample: 1,
        max_depth: None,
        min_samples_split: 2,
        seed: 0,
    };
    let x = Matrix::from_rows(&[[0.0, 1.0, 2.0], [5.0, -1.0, 3.0]]).unwrap();
    assert_eq!(f.predict_proba(&x).unwrap(), vec![0.75, 0.75]);
    let wrong = Matrix::from_rows(&[[0.0, 1.0]]).unwrap();
    assert_eq!(
        f.predict_proba(&wrong),
        Err(Error::DimensionMismatch { expected: 3, got: 2 })
    );
}

#[test]
fn logistic_learns_sign_rule() {
    let xs: Vec<[f64; 1]> = (0..40).map(|i| [if i % 2 == 0 { -1.0 - i as f64 * 0.1 } else { 1.0 + i as f64 * 0.1 }]).collect();
    let y: Vec<u8> = (0..40).map(|i| (i % 2) as u8).collect();
    let d = Dataset::ungrouped(Matrix::from_rows(&xs).unwrap(), y.clone()).unwrap();
    let m = LogisticModel::train(&d, &LogisticConfig::default()).unwrap();
    assert!(m.weights[0] > 0.0);
    let pred = Model::Logistic(m).predict(d.x(), 0.5).unwrap();
    assert_eq!(accuracy(&pred, &y), 1.0);
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    let d = blobs(60, 5, 1.5, 8);
    let y = d.y().to_vec();
    let obj = LogisticObjective::new(d.x(), &y, 1.0);
    let mut rng = crate::rng::rng_from(12);
    use rand::Rng;
    for _ in 0..20 {
        let p: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
        let g = obj.gradient(&p);
        for j in 0..6 {
            let h = 1e-4;
            let mut plus = p.clone();
            let mut minus = p.clone();
            plus[j] += h;
            minus[j] -= h;
            let fd = (obj.value(&plus) - obj.value(&minus)) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-5, "param {j}: {fd} vs {}", g[j]);
        }
    }
}

#[test]
fn logistic_zero_variance_column() {
    let rows: Vec<[f64; 2]> = (0..20).map(|i| [i as f64, 3.0]).collect();
    let y: Vec<u8> = (0..20).map(|i| u8::from(i >= 10)).collect();
    let d = Dataset::ungrouped(Matrix::from_rows(&rows).unwrap(), y).unwrap();
    let m = LogisticModel::train(&d, &LogisticConfig::default()).unwrap();
    assert_eq!(m.standardization[1].1, 1.0);
    assert!(m.weights.iter().all(|w| w.is_finite()));
    assert!(m.bias.is_finite());
}

#[test]
fn logistic_loss_decreases_monotonically() {
    let d = blobs(100, 8, 1.0, 13);
    let (_, hist) = LogisticModel::train_with_history(&d, &LogisticConfig::default()).unwrap();
    assert!(hist.len() > 2);
    assert!(hist.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn logistic_separates_blobs() {
    let train = blobs(200, 10, 6.0, 21);
    let test = blobs(200, 10, 6.0, 22);
    let m = Model::train(ClassifierKind::Logistic, &train, 0).unwrap();
    assert!(accuracy(&m.predict(test.x(), 0.5).unwrap(), test.y()) > 0.95);
}

fn zero_logistic(d: usize) -> LogisticModel {
    LogisticModel {
        weights: vec![0.0; d],
        bias: 0.0,
        standardization: vec![(0.0, 1.0); d],
        converged: true,
        iterations: 0,
        l2_strength: 1.0,
        seed: 0,
    }
}

#[test]
fn zero_logistic_is_half_and_ties_go_positive() {
    let m = Model::Logistic(zero_logistic(3));
    let x = Matrix::from_rows(&[[1.0, 2.0, 3.0], [-4.0, 0.0, 9.0]]).unwrap();
    assert_eq!(m.predict_proba(&x).unwrap(), vec![0.5, 0.5]);
    assert_eq!(m.predict(&x, 0.5).unwrap(), vec![1, 1]);
}

proptest! {
    #[test]
    fn probabilities_stay_in_unit_interval(seed in 0u64..50) {
        let train = blobs(60, 4, 1.0, seed);
        let mut rng = crate::rng::rng_from(seed + 1000);
        use rand::Rng;
        let rows: Vec<Vec<f64>> = (0..1000).map(|_| (0..4).map(|_| rng.random_range(-50.0..50.0)).collect()).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        for kind in [ClassifierKind::Forest, ClassifierKind::Logistic] {
            let m = Model::train(kind, &train, seed).unwrap();
            let p = m.predict_proba(&x).unwrap();
            prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn logistic_is_monotone_in_positive_features(delta in 0.0f64..10.0, base in -5.0f64..5.0) {
        let mut m = zero_logistic(2);
        m.weights = vec![1.3, -0.4];
        let x = Matrix::from_rows(&[[base, 1.0], [base + delta, 1.0]]).unwrap();
        let p = Model::Logistic(m).predict_proba(&x).unwrap();
        prop_assert!(p[1] >= p[0]);
    }
}
