use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use super::*;
use crate::models::testdata::normal;
use crate::rng::rng_from;
use crate::table::{FeatureRow, Split};

/// Brute-force two-sided p: enumerate every assignment of the pooled values
/// to the first sample and count U at least as extreme in each tail.
fn enumerate_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let u_of = |mask: u32| -> f64 {
        let mut u = 0.0;
        for i in 0..n {
            if mask & (1 << i) == 0 {
                continue;
            }
            for j in 0..n {
                if mask & (1 << j) != 0 {
                    continue;
                }
                if pooled[i] > pooled[j] {
                    u += 1.0;
                } else if pooled[i] == pooled[j] {
                    u += 0.5;
                }
            }
        }
        u
    };
    let observed = u_of((1u32 << a.len()) - 1);
    let (mut le, mut ge, mut total) = (0.0, 0.0, 0.0);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != a.len() {
            continue;
        }
        let u = u_of(mask);
        total += 1.0;
        if u <= observed {
            le += 1.0;
        }
        if u >= observed {
            ge += 1.0;
        }
    }
    (2.0 * f64::min(le, ge) / total).min(1.0)
}

#[test]
fn disjoint_triples() {
    let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
    assert_eq!(r.u, 0.0);
    assert_eq!(r.method, MwuMethod::Exact);
    assert!((r.p_value - 0.1).abs() < 1e-15);
    assert!((enumerate_p(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]) - 0.1).abs() < 1e-15);
}

#[test]
fn identical_multisets() {
    let a = [1.0, 2.0, 2.0, 5.0, 7.0];
    let r = mann_whitney_u(&a, &a).unwrap();
    assert_eq!(r.u, 12.5);
    assert!(r.p_value > 0.99);
}

#[test]
fn all_identical_is_degenerate() {
    let r = mann_whitney_u(&[3.0; 4], &[3.0; 6]).unwrap();
    assert!(r.degenerate);
    assert_eq!(r.p_value, 1.0);
    assert!(mann_whitney_u(&[], &[1.0]).is_err());
}

#[test]
fn exact_matches_enumeration_on_small_samples() {
    let mut rng = rng_from(2024);
    for _ in 0..300 {
        let n_a = rng.random_range(1..=6);
        let n_b = rng.random_range(1..=6);
        let mut pool: Vec<i32> = (-50..50).collect();
        pool.shuffle(&mut rng);
        let a: Vec<f64> = pool[..n_a].iter().map(|&v| v as f64).collect();
        let b: Vec<f64> = pool[n_a..n_a + n_b].iter().map(|&v| v as f64).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.method, MwuMethod::Exact);
        assert_eq!(r.p_value, enumerate_p(&a, &b), "{a:?} {b:?}");
    }
}

#[test]
fn exact_and_normal_agree_at_fifteen() {
    let mut rng = rng_from(7);
    for _ in 0..50 {
        let mut pool: Vec<f64> = (0..30).map(|_| normal(&mut rng)).collect();
        pool.shuffle(&mut rng);
        let shift = rng.random_range(0.0..1.5);
        let a: Vec<f64> = pool[..15].iter().map(|v| v + shift).collect();
        let b = &pool[15..];
        let exact = mann_whitney_u_with(&a, b, Some(MwuMethod::Exact)).unwrap();
        let approx = mann_whitney_u_with(&a, b, Some(MwuMethod::Normal)).unwrap();
        assert_eq!(exact.method, MwuMethod::Exact);
        assert!((exact.p_value - approx.p_value).abs() < 0.01, "{} vs {}", exact.p_value, approx.p_value);
    }
}

#[test]
fn null_calibration() {
    let mut rng = rng_from(31);
    let trials = 1000;
    let mut rejections = 0;
    for _ in 0..trials {
        let a: Vec<f64> = (0..50).map(|_| normal(&mut rng)).collect();
        let b: Vec<f64> = (0..50).map(|_| normal(&mut rng)).collect();
        if mann_whitney_u(&a, &b).unwrap().p_value < 0.05 {
            rejections += 1;
        }
    }
    let frac = rejections as f64 / trials as f64;
    assert!((0.03..=0.07).contains(&frac), "{frac}");
}

#[test]
fn exact_counts_sum_to_binomial() {
    let counts = exact_u_counts(3, 3);
    assert_eq!(counts.iter().sum::<f64>(), 20.0);
    assert_eq!(counts, vec![1.0, 1.0, 2.0, 3.0, 3.0, 3.0, 3.0, 2.0, 1.0, 1.0]);
}

#[test]
fn holm_hand_examples() {
    let adj = holm_correction(&[0.01, 0.04, 0.03]).unwrap();
    for (x, e) in adj.iter().zip([0.03, 0.06, 0.06]) {
        assert!((x - e).abs() < 1e-12);
    }
    assert_eq!(holm_correction(&[0.2]).unwrap(), vec![0.2]);
    assert_eq!(holm_correction(&[1.0; 4]).unwrap(), vec![1.0; 4]);
    assert!(holm_correction(&[1.2]).is_err());
}

#[test]
fn cles_examples() {
    assert_eq!(cles(&[5.0, 6.0], &[1.0, 2.0]).unwrap(), 1.0);
    assert_eq!(cles(&[1.0, 3.0, 3.0], &[1.0, 3.0, 3.0]).unwrap(), 0.5);
}

#[test]
fn cles_reproduces_loudness_direction() {
    // Log-normal classes matching the reported loudness quartiles:
    // non-abusive Q1/median/Q3 0.07/0.23/0.54, abusive 0.50/1.00/2.03.
    let z75 = 0.674_489_750_196_081_7;
    let params = |q1: f64, med: f64, q3: f64| (libm::log(med), libm::log(q3 / q1) / (2.0 * z75));
    let (mu_n, s_n) = params(0.07, 0.23, 0.54);
    let (mu_a, s_a) = params(0.50, 1.00, 2.03);
    let mut rng = rng_from(82);
    let draw = |mu: f64, s: f64, rng: &mut rand_chacha::ChaCha8Rng| libm::exp(mu + s * normal(rng));
    let calm: Vec<f64> = (0..1500).map(|_| draw(mu_n, s_n, &mut rng)).collect();
    let abusive: Vec<f64> = (0..1500).map(|_| draw(mu_a, s_a, &mut rng)).collect();
    let c = cles(&abusive, &calm).unwrap();
    assert!(c > CLES_THRESHOLD, "{c}");
    assert!((c - 0.82).abs() < 0.05, "{c}");
}

fn synthetic_table(shifted: &[bool], n_per_class: usize, shift: f64, seed: u64) -> FeatureTable {
    let mut rng = rng_from(seed);
    let names = vec!["signal".to_string(), "noise".to_string()];
    let mut rows = Vec::new();
    for (li, &is_shifted) in shifted.iter().enumerate() {
        for k in 0..2 * n_per_class {
            let label = if k % 2 == 0 { Label::Abusive } else { Label::NonAbusive };
            let bump = if is_shifted && label == Label::Abusive { shift } else { 0.0 };
            rows.push(FeatureRow {
                id: alloc::format!("{li}-{k}"),
                language: alloc::format!("lang{li:02}"),
                label,
                split: Split::Train,
                values: vec![normal(&mut rng) + bump, normal(&mut rng)],
            });
        }
    }
    FeatureTable::new(names, rows).unwrap()
}

#[test]
fn shifted_feature_is_important_everywhere() {
    let t = synthetic_table(&[true; 10], 50, 3.0, 1);
    let a = analyze_features(&t, &MeaningfulRule::default()).unwrap();
    assert_eq!(a.languages.len(), 10);
    assert_eq!(a.important_features(), vec!["signal"]);
    assert_eq!(a.results.len(), 20);
    for r in &a.results {
        assert!(r.p_adjusted >= r.p_value);
        assert_eq!(r.meaningful, MeaningfulRule::default().is_meaningful(r.p_adjusted, r.cles));
    }
}

#[test]
fn noise_feature_is_never_meaningful() {
    let mut meaningful = 0;
    for seed in 0..20 {
        let t = synthetic_table(&[false; 10], 50, 0.0, 100 + seed);
        let a = analyze_features(&t, &MeaningfulRule::default()).unwrap();
        assert!(a.important_features().is_empty());
        meaningful += a.results.iter().filter(|r| r.meaningful).count();
    }
    assert_eq!(meaningful, 0);
}

#[test]
fn nine_of_ten_is_not_important() {
    let mut flags = [true; 10];
    flags[4] = false;
    let t = synthetic_table(&flags, 50, 3.0, 5);
    let a = analyze_features(&t, &MeaningfulRule::default()).unwrap();
    assert!(a.important_features().is_empty());
    let v = &a.verdicts[0];
    assert_eq!(v.meaningful_in.len(), 9);
    assert!(!v.meaningful_in.contains(&"lang04".to_string()));
}

#[test]
fn small_language_is_skipped_and_single_language_decides_alone() {
    let mut t = synthetic_table(&[true], 40, 3.0, 9);
    t.rows.push(FeatureRow {
        id: "tiny".into(),
        language: "zz".into(),
        label: Label::Abusive,
        split: Split::Test,
        values: vec![0.0, 0.0],
    });
    let a = analyze_features(&t, &MeaningfulRule::default()).unwrap();
    assert_eq!(a.skipped.len(), 1);
    assert_eq!(a.languages, vec![String::from("lang00")]);
    let meaningful: Vec<&str> = a.results.iter().filter(|r| r.meaningful).map(|r| r.feature_name.as_str()).collect();
    assert_eq!(a.important_features(), meaningful);
    let summary = summarize_important(&t, &a);
    assert_eq!(summary.len(), 1);
    assert!(summary[0].abusive.median > summary[0].non_abusive.median);
    assert!(summary[0].mean_cles > 0.672);
}

#[test]
fn negative_direction_effects_count() {
    let rule = MeaningfulRule::default();
    assert!(rule.is_meaningful(0.001, 0.2));
    assert!(!rule.is_meaningful(0.001, 0.6));
    assert!(!rule.is_meaningful(0.2, 0.9));
}

proptest! {
    #[test]
    fn u_and_cles_identities(
        a in proptest::collection::vec(-20i32..20, 1..30),
        b in proptest::collection::vec(-20i32..20, 1..30),
    ) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        let ab = mann_whitney_u(&a, &b).unwrap();
        let ba = mann_whitney_u(&b, &a).unwrap();
        let cells = (a.len() * b.len()) as f64;
        prop_assert!((ab.u + ba.u - cells).abs() < 1e-9);
        let c_ab = cles(&a, &b).unwrap();
        let c_ba = cles(&b, &a).unwrap();
        prop_assert_eq!(c_ab + c_ba, 1.0);
        prop_assert!((c_ab - ab.u / cells).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
    }

    #[test]
    fn holm_is_monotone_and_dominates(p in proptest::collection::vec(0.0f64..=1.0, 1..60)) {
        let adj = holm_correction(&p).unwrap();
        for i in 0..p.len() {
            prop_assert!(adj[i] >= p[i]);
            prop_assert!(adj[i] <= 1.0);
            for j in 0..p.len() {
                if p[i] <= p[j] {
                    prop_assert!(adj[i] <= adj[j]);
                }
            }
        }
    }
}
