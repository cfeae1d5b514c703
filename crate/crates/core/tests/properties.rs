use kmo_core::baselines::lloyd_outliers;
use kmo_core::cache::CostCache;
use kmo_core::cost::{indexed_costs, phi_minus_z, phi_minus_z_naive, point_costs, tau_from_costs};
use kmo_core::data::sq_dist;
use kmo_core::local_search::{cached_tau, naive_swap, swap_in};
use kmo_core::seeding::overseed_penalized;
use kmo_core::{CenterSet, CostSpace, Dataset, PenaltyThreshold, RngStream};
use proptest::prelude::*;

const REL: f64 = 1e-9;

fn leq(a: f64, b: f64) -> bool {
    a <= b + REL * b.abs().max(1.0)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL * a.abs().max(b.abs()).max(1.0)
}

fn points(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-50.0..50.0f64, 2), 2..max_n)
}

fn theta() -> impl Strategy<Value = PenaltyThreshold> {
    prop_oneof![
        Just(PenaltyThreshold::infinite()),
        (0.01..500.0f64).prop_map(|t| PenaltyThreshold::new(t).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn thresholded_distance_is_a_metric(a in prop::collection::vec(-9.0..9.0f64, 3),
                                        b in prop::collection::vec(-9.0..9.0f64, 3),
                                        c in prop::collection::vec(-9.0..9.0f64, 3),
                                        t in 0.0..20.0f64) {
        let d = |x: &[f64], y: &[f64]| sq_dist(x, y).sqrt().min(t);
        prop_assert!(leq(d(&a, &c), d(&a, &b) + d(&b, &c)));
    }

    #[test]
    fn squared_distance_relaxed_triangle(a in prop::collection::vec(-9.0..9.0f64, 3),
                                         b in prop::collection::vec(-9.0..9.0f64, 3),
                                         cs in prop::collection::vec(prop::collection::vec(-9.0..9.0f64, 3), 1..5),
                                         eps in prop::sample::select(vec![0.1, 0.5, 1.0])) {
        prop_assert!(leq(sq_dist(&a, &cs[0]), 2.0 * (sq_dist(&a, &b) + sq_dist(&b, &cs[0]))));
        let centers = CenterSet::from_rows(3, &cs).unwrap();
        let pa = centers.nearest(&a).1;
        let pb = centers.nearest(&b).1;
        prop_assert!(leq(pa - pb, eps * pb + (1.0 + 1.0 / eps) * sq_dist(&a, &b)));
    }

    #[test]
    fn cache_matches_recomputation(rows in points(30), ops in prop::collection::vec((any::<bool>(), 0usize..1000), 1..25)) {
        let x = Dataset::from_rows(rows).unwrap();
        let n = x.len();
        let mut cache = CostCache::new(&x, vec![0]);
        for (add, r) in ops {
            if add || cache.centers().len() == 1 {
                let c = r % n;
                if !cache.centers().contains(&c) {
                    cache.add(&x, c);
                }
            } else {
                cache.remove(&x, r % cache.centers().len());
            }
            let fresh = CostCache::new(&x, cache.centers().to_vec());
            prop_assert_eq!(cache.d1(), fresh.d1());
            prop_assert_eq!(cache.d2(), fresh.d2());
            prop_assert_eq!(cache.a1(), fresh.a1());
            prop_assert_eq!(cache.a2(), fresh.a2());
        }
    }

    #[test]
    fn trimmed_cost_matches_sorting(rows in points(40), k in 1usize..4, z in 0usize..10, seed in any::<u64>()) {
        let x = Dataset::from_rows(rows).unwrap();
        prop_assume!(z < x.len());
        let idx: Vec<usize> = (0..k.min(x.len())).map(|i| (seed as usize).wrapping_add(7 * i) % x.len()).collect();
        let c = CenterSet::from_indices(&x, &idx);
        prop_assert!(close(phi_minus_z(&x, &c, z as u64).unwrap(), phi_minus_z_naive(&x, &c, z)));
    }

    #[test]
    fn infinite_penalty_is_plain_cost(rows in points(30)) {
        let x = Dataset::from_rows(rows).unwrap();
        let c = CenterSet::from_indices(&x, &[0]);
        let costs = point_costs(&x, &c);
        let plain: f64 = costs.iter().sum();
        prop_assert!(close(tau_from_costs(&costs, x.weights(), PenaltyThreshold::infinite()), plain));
    }

    #[test]
    fn seeding_cost_never_increases(rows in points(40), ell in 1usize..12, t in theta(), seed in any::<u64>()) {
        let x = Dataset::from_rows(rows).unwrap();
        let s = overseed_penalized(&x, ell.min(x.len()), t, &mut RngStream::new(seed).rng()).unwrap();
        let mut prev = f64::INFINITY;
        for i in 1..=s.centers.len() {
            let cost = tau_from_costs(&indexed_costs(&x, &s.centers[..i]), x.weights(), t);
            prop_assert!(leq(cost, prev));
            prev = cost;
        }
        let mut sorted = s.centers.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), s.centers.len());
    }

    #[test]
    fn swap_agrees_with_brute_force(rows in points(25), k in 1usize..5, cand in 0usize..1000, t in theta()) {
        let x = Dataset::from_rows(rows).unwrap();
        prop_assume!(k < x.len());
        let centers: Vec<usize> = (0..k).collect();
        let c = cand % x.len();
        let mut cache = CostCache::new(&x, centers.clone());
        let before = cached_tau(&x, &cache, t);
        let o = swap_in(&x, &mut cache, c, t);
        let after = cached_tau(&x, &cache, t);
        let (_, naive) = naive_swap(&x, &centers, c, t);
        prop_assert!(leq(after, before));
        prop_assert!(close(after, naive));
        prop_assert!(close(o.cost_after, after));
        let fresh = CostCache::new(&x, cache.centers().to_vec());
        prop_assert_eq!(cache.d1(), fresh.d1());
    }

    #[test]
    fn penalty_bounds_every_cost(rows in points(25), t in 0.01..5.0f64) {
        let x = Dataset::from_rows(rows).unwrap();
        let th = PenaltyThreshold::new(t).unwrap();
        let costs = indexed_costs(&x, &[0]);
        prop_assert!(leq(tau_from_costs(&costs, x.weights(), th), x.len() as f64 * t));
    }

    #[test]
    fn lloyd_is_order_invariant_without_ties(rows in points(30), seed in any::<u64>(), shift in 1usize..29) {
        let x = Dataset::from_rows(rows.clone()).unwrap();
        let n = x.len();
        let costs: Vec<f64> = (0..n).map(|i| sq_dist(x.point(i), x.point(0))).collect();
        let mut sorted = costs.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assume!(sorted.windows(2).all(|w| w[0] < w[1]));
        let init = CenterSet::from_indices(&x, &[0]);
        let a = lloyd_outliers(&x, &init, 2.min(n as u64 - 1), 3, &mut RngStream::new(seed).rng()).unwrap();
        let mut rotated = rows;
        rotated.rotate_left(shift % n);
        let y = Dataset::from_rows(rotated).unwrap();
        let b = lloyd_outliers(&y, &init, 2.min(n as u64 - 1), 3, &mut RngStream::new(seed).rng()).unwrap();
        prop_assert!(close(a.phi_cost, b.phi_cost));
        let mut mapped: Vec<usize> = b.outliers.iter().map(|&i| (i + shift % n) % n).collect();
        mapped.sort_unstable();
        prop_assert_eq!(a.outliers, mapped);
    }

    #[test]
    fn shards_conserve_weight(rows in points(60), m in 1usize..8, t in 0.5..400.0f64, refined in any::<bool>(), seed in any::<u64>()) {
        let x = Dataset::from_rows(rows).unwrap();
        prop_assume!(m <= x.len());
        let shards = kmo_core::distributed::shard(&x, m).unwrap();
        prop_assert_eq!(shards.iter().map(|s| s.data.len()).sum::<usize>(), x.len());
        for s in &shards {
            let ell = 3.min(s.data.len());
            let sum = kmo_core::distributed::machine_overseed(
                s, ell, PenaltyThreshold::new(t).unwrap(), refined, &mut RngStream::new(seed).rng()).unwrap();
            prop_assert_eq!(sum.represented_weight(), s.data.total_weight());
            if let Some(h) = &sum.histograms {
                for (row, &w) in h.iter().zip(&sum.weights) {
                    prop_assert_eq!(row.iter().sum::<u64>(), w);
                }
            }
        }
    }
}

#[test]
fn weighted_items_count_by_weight() {
    let x = Dataset::from_rows_weighted(vec![vec![0.0], vec![3.0]], vec![1, 4]).unwrap();
    let c = CenterSet::from_rows(1, &[vec![0.0]]).unwrap();
    assert_eq!(tau_from_costs(&point_costs(&x, &c), x.weights(), PenaltyThreshold::infinite()), 36.0);
    assert_eq!(phi_minus_z(&x, &c, 3).unwrap(), 9.0);
    assert_eq!(x.total_weight(), 5);
    assert_eq!(CostSpace::total_weight(&x), 5);
}
