use kmo::config::{Algorithm, OneOrMany, OutlierSpec, RunConfig};
use kmo::run_experiment;
use kmo_core::cost::phi_excluding;
use kmo_core::planted::{gen_planted, PlantedInstance, PlantedParams};
use kmo_core::{CenterSet, RngStream};

fn contaminated() -> PlantedInstance {
    gen_planted(&PlantedParams::new(2000, 10, 200, 5), &mut RngStream::new(2024).rng()).unwrap()
}

fn config(algorithm: Algorithm) -> RunConfig {
    RunConfig {
        algorithm,
        k: OneOrMany::One(10),
        z: OutlierSpec::Fraction(0.1),
        seeds: OneOrMany::Many((0..20).collect()),
        record_timing: false,
        ..RunConfig::default()
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    0.5 * (v[9] + v[10])
}

#[test]
fn sharded_penalized_seeding_beats_kmeans_pp() {
    let inst = contaminated();
    let cost = |a| {
        let mut cfg = config(a);
        cfg.machines = 10;
        cfg.machine_ell_factor = 2;
        let r = run_experiment(&cfg, &inst.dataset).unwrap();
        assert_eq!(r.len(), 20);
        median(r.iter().map(|r| r.cost_phi_inliers).collect())
    };
    let distributed = cost(Algorithm::Distributed);
    let plain = cost(Algorithm::KmeansPP);
    assert!(distributed < plain, "{distributed} vs {plain}");
}

#[test]
fn metropolized_seeding_beats_kmeans_pp() {
    let inst = contaminated();
    let cost = |a| median(run_experiment(&config(a), &inst.dataset).unwrap().iter().map(|r| r.cost_phi_inliers).collect());
    let mh = cost(Algorithm::Metropolized);
    let plain = cost(Algorithm::KmeansPP);
    assert!(mh < plain, "{mh} vs {plain}");
}

#[test]
fn reports_rescore_from_their_centers() {
    let inst = contaminated();
    for a in [Algorithm::Penalized, Algorithm::Distributed, Algorithm::Fast, Algorithm::Coordinator] {
        let mut cfg = config(a);
        cfg.seeds = OneOrMany::One(3);
        cfg.refine_iters = 0;
        let r = &run_experiment(&cfg, &inst.dataset).unwrap()[0];
        assert!(r.error.is_none());
        let centers = CenterSet::from_rows(5, r.centers.as_ref().unwrap()).unwrap();
        assert_eq!(centers.len(), 10);
        let costs = kmo_core::cost::point_costs(&inst.dataset, &centers);
        let trimmed = kmo_core::cost::phi_minus_z_from_costs(&costs, inst.dataset.weights(), r.num_outliers);
        // For a fixed count, dropping the farthest points is optimal.
        assert!(trimmed <= r.cost_phi_inliers * (1.0 + 1e-9), "{}: {trimmed} > {}", a.name(), r.cost_phi_inliers);
        assert!(r.cost_phi_inliers <= phi_excluding(&costs, inst.dataset.weights(), &[]) * (1.0 + 1e-9));
    }
}

#[test]
fn several_k_values_in_one_batch() {
    let inst = contaminated();
    let mut cfg = config(Algorithm::Penalized);
    cfg.k = OneOrMany::Many(vec![12, 5, 8]);
    cfg.seeds = OneOrMany::Many(vec![2, 1]);
    let r = run_experiment(&cfg, &inst.dataset).unwrap();
    let keys: Vec<(usize, u64)> = r.iter().map(|r| (r.k, r.seed)).collect();
    assert_eq!(keys, [(5, 1), (5, 2), (8, 1), (8, 2), (12, 1), (12, 2)]);
    assert!(r.iter().all(|r| r.num_outliers == 200 && r.n == 2000));
}
