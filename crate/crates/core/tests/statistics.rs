//! Frequency and goodness-of-fit checks of the samplers against their exact laws.
use kmo_core::hardness::{gen_hard_instance_with_factor, label_probabilities, SMALL_MASS_FACTOR};
use kmo_core::metropolis::{chain_distribution, mh_sample, MhConfig, RoundMemo};
use kmo_core::seeding::{next_center_distribution, overseed_penalized, sample_tau_weighted};
use kmo_core::space::WeightSampler;
use kmo_core::{Dataset, PenaltyThreshold, RngStream};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const DRAWS: usize = 100_000;
const MIN_P_VALUE: f64 = 0.001;

fn line(xs: &[f64]) -> Dataset {
    Dataset::from_rows(xs.iter().map(|&x| vec![x]).collect()).unwrap()
}

/// p-value of Pearson's statistic for `counts` against probabilities `probs`.
fn chi_square_p(counts: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0;
    for (&c, &p) in counts.iter().zip(probs) {
        if p == 0.0 {
            assert_eq!(c, 0, "draw from a zero-probability cell");
            continue;
        }
        let e = p * total as f64;
        stat += (c as f64 - e).powi(2) / e;
        cells += 1;
    }
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn two_point_law_matches_costs() {
    let x = line(&[0.0, 0.0]);
    let nearest = [1.0, 3.0];
    let theta = PenaltyThreshold::infinite();
    let mut rng = RngStream::new(11).rng();
    let b = (0..DRAWS)
        .filter(|_| sample_tau_weighted(&x, &nearest, theta, &mut rng).unwrap() == 1)
        .count();
    let freq = b as f64 / DRAWS as f64;
    assert!((0.74..=0.76).contains(&freq), "{freq}");
}

#[test]
fn single_positive_point_is_certain() {
    let x = line(&[0.0, 0.0, 0.0]);
    let mut rng = RngStream::new(12).rng();
    for _ in 0..100 {
        assert_eq!(sample_tau_weighted(&x, &[0.0, 2.0, 0.0], PenaltyThreshold::infinite(), &mut rng).unwrap(), 1);
    }
}

#[test]
fn equal_costs_are_uniform() {
    let x = line(&[0.0; 10]);
    let nearest = [4.0; 10];
    let mut counts = [0u64; 10];
    let mut rng = RngStream::new(13).rng();
    for _ in 0..DRAWS {
        counts[sample_tau_weighted(&x, &nearest, PenaltyThreshold::new(2.0).unwrap(), &mut rng).unwrap()] += 1;
    }
    let p = chi_square_p(&counts, &[0.1; 10]);
    assert!(p > MIN_P_VALUE, "p = {p}");
}

#[test]
fn second_center_on_three_point_line() {
    let x = line(&[0.0, 1.0, 5.0]);
    let law = next_center_distribution(&x, &[0], PenaltyThreshold::infinite()).unwrap();
    assert!((law[1] - 1.0 / 26.0).abs() < 1e-15);
    assert!((law[2] - 25.0 / 26.0).abs() < 1e-15);
    let mut rng = RngStream::new(14).rng();
    let mut counts = [0u64; 3];
    for _ in 0..DRAWS {
        counts[sample_tau_weighted(&x, &[0.0, 1.0, 25.0], PenaltyThreshold::infinite(), &mut rng).unwrap()] += 1;
    }
    let p = chi_square_p(&counts, &law);
    assert!(p > MIN_P_VALUE, "p = {p}");
}

#[test]
fn overseeding_with_ell_n_covers_everything() {
    let x = line(&[0.0, 1.0, 1.0, 7.0, 9.0]);
    let mut rng = RngStream::new(15).rng();
    for _ in 0..50 {
        let s = overseed_penalized(&x, x.len(), PenaltyThreshold::infinite(), &mut rng).unwrap();
        let cost = kmo_core::cost::indexed_costs(&x, &s.centers).iter().sum::<f64>();
        assert!(cost == 0.0 && (s.exhausted || s.centers.len() == x.len()));
        let mut sorted = s.centers.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), s.centers.len());
    }
}

#[test]
fn mh_with_uniform_target_is_uniform() {
    // Every point is at the same distance from the single center, so τ is constant.
    let rows: Vec<Vec<f64>> = (0..11)
        .map(|i| {
            if i == 10 {
                vec![0.0, 0.0]
            } else {
                let a = i as f64 * std::f64::consts::TAU / 10.0;
                vec![a.cos(), a.sin()]
            }
        })
        .collect();
    let x = Dataset::from_rows(rows).unwrap();
    let sampler = WeightSampler::new(&x).unwrap();
    let mut memo = RoundMemo::new(x.len());
    let cfg = MhConfig::new(5).unwrap();
    let mut rng = RngStream::new(16).rng();
    let mut counts = [0u64; 11];
    for _ in 0..DRAWS {
        counts[mh_sample(&x, &[10], &mut memo, &sampler, PenaltyThreshold::infinite(), &cfg, &mut rng).unwrap()] += 1;
    }
    let mut probs = [0.1; 11];
    probs[10] = 0.0;
    let p = chi_square_p(&counts, &probs);
    assert!(p > MIN_P_VALUE, "p = {p}");
}

#[test]
fn one_step_chain_matches_hand_expansion() {
    // Costs 1 and 3 to the center at 0; the center itself is the third item.
    let x = line(&[1.0, 3f64.sqrt(), 0.0]);
    let tau = [1.0, 3.0, 0.0];
    let exact = chain_distribution(&tau, &[1, 1, 1], 1);
    let sampler = WeightSampler::new(&x).unwrap();
    let mut memo = RoundMemo::new(3);
    let cfg = MhConfig::new(1).unwrap();
    let mut rng = RngStream::new(17).rng();
    let mut counts = [0u64; 3];
    let mut failed = 0u64;
    for _ in 0..DRAWS {
        match mh_sample(&x, &[2], &mut memo, &sampler, PenaltyThreshold::infinite(), &cfg, &mut rng) {
            Ok(i) => counts[i] += 1,
            Err(_) => failed += 1,
        }
    }
    let draws = DRAWS as f64;
    assert_eq!(counts[2], 0);
    for i in 0..2 {
        assert!((counts[i] as f64 / draws - exact[i]).abs() <= 0.01, "{i}: {counts:?} vs {exact:?}");
    }
    // The chain ends at the zero-cost center only if it started there and rejected the move.
    assert!((failed as f64 / draws - exact[2]).abs() <= 0.01);
}

#[test]
fn two_point_chain_hand_expansion() {
    // π = (1/4, 3/4), T = 1: P(end at a) = ½·(½·1/3) + ½·½ = 1/3.
    let p = chain_distribution(&[1.0, 3.0], &[1, 1], 1);
    assert!((p[0] - 1.0 / 3.0).abs() < 1e-12);
    let x = line(&[1.0, 3f64.sqrt(), 0.0]);
    let sampler = WeightSampler::new(&line(&[1.0, 3f64.sqrt()])).unwrap();
    let mut memo = RoundMemo::new(3);
    let cfg = MhConfig::new(1).unwrap();
    let mut rng = RngStream::new(18).rng();
    let a = (0..DRAWS)
        .filter(|_| mh_sample(&x, &[2], &mut memo, &sampler, PenaltyThreshold::infinite(), &cfg, &mut rng).unwrap() == 0)
        .count();
    assert!((a as f64 / DRAWS as f64 - 1.0 / 3.0).abs() <= 0.01);
}

#[test]
fn hard_instance_labels_follow_marginals() {
    let (n, k, z) = (DRAWS, 10, 50);
    let inst = gen_hard_instance_with_factor(n, k, z, SMALL_MASS_FACTOR, &mut RngStream::new(19).rng()).unwrap();
    let probs = label_probabilities(n, k, z, SMALL_MASS_FACTOR);
    let mut counts = vec![0u64; k];
    for &l in inst.labels() {
        counts[l as usize] += 1;
    }
    let p = chi_square_p(&counts, &probs);
    assert!(p > MIN_P_VALUE, "p = {p}");
    // Expected small-cluster size is 200z/k.
    assert!((probs[0] * n as f64 - 200.0 * z as f64 / k as f64).abs() < 1e-6);
}

#[test]
fn no_big_points_when_small_clusters_take_everything() {
    let (n, k, z) = (10_000, 4, 100);
    let probs = label_probabilities(n, k, z, SMALL_MASS_FACTOR);
    assert_eq!(probs[k / 2..], [0.0, 0.0]);
    let inst = gen_hard_instance_with_factor(n, k, z, SMALL_MASS_FACTOR, &mut RngStream::new(20).rng()).unwrap();
    assert!(inst.labels().iter().all(|&l| (l as usize) < k / 2));
}
