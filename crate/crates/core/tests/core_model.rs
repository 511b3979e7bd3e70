mod common;

use common::{instance, node};
use proptest::prelude::*;
use vrpdr_core::finder::solve_finder;
use vrpdr_core::bench::generate_instance;
use vrpdr_core::model::{
    enumerate_sequences, euclidean_distance, manhattan_distance, sequence_count, sortie_distance, FleetSpec,
    Instance, ModelOptions, Point, Sortie, VehicleKind,
};
use vrpdr_core::Error;

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

#[test]
fn manhattan_examples() {
    assert_eq!(manhattan_distance(p(0.0, 0.0), p(3.0, 4.0)), 7.0);
    assert_eq!(manhattan_distance(p(1.0, 1.0), p(1.0, 1.0)), 0.0);
    assert_eq!(manhattan_distance(p(-1.0, 2.0), p(2.0, -2.0)), 7.0);
}

#[test]
fn euclidean_examples() {
    assert_eq!(euclidean_distance(p(0.0, 0.0), p(3.0, 4.0)), 5.0);
    assert_eq!(euclidean_distance(p(2.0, 2.0), p(2.0, 2.0)), 0.0);
    assert!((euclidean_distance(p(0.0, 0.0), p(1.0, 1.0)) - 2f64.sqrt()).abs() < 1e-12);
}

fn sortie(kind: VehicleKind, launch: usize, seq: Vec<usize>, rec: usize) -> Sortie {
    Sortie {
        vehicle_kind: kind,
        vehicle_id: 0,
        launch_node: launch,
        recovery_node: rec,
        sequence: seq,
        launch_truck: 0,
        recovery_truck: 0,
        launch_time: 0.0,
    }
}

#[test]
fn sortie_distance_examples() {
    let fleet = FleetSpec::default();
    let inst = instance(&[(1.0, 0.0, 1.0), (2.0, 0.0, 1.0)], &fleet);
    assert_eq!(sortie_distance(&sortie(VehicleKind::Drone, 0, vec![1], 2), &inst).unwrap(), 2.0);

    let inst = instance(&[(1.0, 1.0, 1.0)], &fleet);
    assert_eq!(sortie_distance(&sortie(VehicleKind::Robot, 0, vec![1], 0), &inst).unwrap(), 4.0);

    let inst = instance(&[(3.0, 4.0, 1.0), (6.0, 8.0, 1.0), (6.0, 8.0, 1.0)], &fleet);
    assert_eq!(sortie_distance(&sortie(VehicleKind::Drone, 0, vec![1, 2], 3), &inst).unwrap(), 10.0);

    assert!(matches!(
        sortie_distance(&sortie(VehicleKind::Drone, 0, vec![9], 0), &inst),
        Err(Error::InvalidInstance(_))
    ));
}

#[test]
fn enumeration_examples() {
    assert_eq!(enumerate_sequences(&[1, 2], 1), vec![vec![1], vec![2]]);
    assert_eq!(enumerate_sequences(&[1, 2], 2), vec![vec![1], vec![2], vec![1, 2], vec![2, 1]]);
    assert!(enumerate_sequences(&[], 3).is_empty());
}

/// Falling-factorial sum computed without the library helper.
fn brute_count(n: usize, m: usize) -> usize {
    (1..=m.min(n)).map(|len| ((n - len + 1)..=n).product::<usize>()).sum()
}

#[test]
fn enumeration_count_matches_falling_factorials() {
    for n in 0..=6 {
        for m in 1..=4 {
            let ids: Vec<usize> = (1..=n).collect();
            let seqs = enumerate_sequences(&ids, m);
            assert_eq!(seqs.len(), brute_count(n, m), "n={n} m={m}");
            assert_eq!(sequence_count(n, m), brute_count(n, m));
            let mut sorted = seqs.clone();
            sorted.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
            assert_eq!(seqs, sorted, "order is (length, ids)");
            sorted.dedup();
            assert_eq!(sorted.len(), seqs.len());
        }
    }
}

#[test]
fn instance_json_round_trips_and_rejects_unknown_fields() {
    let fleet = FleetSpec::default();
    let inst = generate_instance(6, 11, &fleet);
    let text = inst.to_json().unwrap();
    assert_eq!(Instance::from_json(&text).unwrap(), inst);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["depot", "customers", "fleet", "seed"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["s_t", "C_d", "rho_r", "D_max_d", "W_r", "B_d", "alpha_d", "C_rate_r", "big_M", "m", "alpha"] {
        assert!(v["fleet"].get(key).is_some(), "fleet misses {key}");
    }
    let mut extra = v.clone();
    extra["colour"] = serde_json::json!("red");
    assert!(Instance::from_json(&extra.to_string()).is_err());
    let mut extra = v;
    extra["customers"][0]["colour"] = serde_json::json!(1);
    assert!(Instance::from_json(&extra.to_string()).is_err());
}

#[test]
fn instance_rejects_gapped_ids() {
    let nodes = vec![node(1, 0.0, 1.0, 1.0), node(3, 1.0, 0.0, 1.0)];
    assert!(matches!(
        Instance::new(p(0.0, 0.0), nodes, FleetSpec::default(), 0),
        Err(Error::InvalidInstance(_))
    ));
}

#[test]
fn depot_is_reachable_and_weightless() {
    let inst = generate_instance(5, 3, &FleetSpec::default());
    assert_eq!(inst.nodes[0].weight, 0.0);
    assert!(inst.nodes[0].truck_reachable);
}

#[test]
fn unreachable_customer_masks_truck_distance() {
    let fleet = FleetSpec::default();
    let mut inst = instance(&[(1.0, 0.0, 1.0), (2.0, 0.0, 1.0)], &fleet);
    inst.nodes[2].truck_reachable = false;
    assert_eq!(inst.truck_distance(&fleet, 0, 1), 1.0);
    assert_eq!(inst.truck_distance(&fleet, 1, 2), fleet.big_m);
    assert_eq!(inst.truck_distance(&fleet, 2, 0), fleet.big_m);
}

#[test]
fn plans_cover_every_customer_once() {
    let fleet = FleetSpec::default();
    for seed in 0..10 {
        let inst = generate_instance(25, 500 + seed, &fleet);
        let plan = solve_finder(&inst, &fleet, &ModelOptions::default()).unwrap();
        let counts = plan.visit_counts(inst.nodes.len());
        assert!(counts[1..].iter().all(|&c| c == 1), "seed {seed}: {counts:?}");
    }
}

fn point() -> impl Strategy<Value = Point> {
    (-100.0..100.0f64, -100.0..100.0f64).prop_map(|(x, y)| Point::new(x, y))
}

proptest! {
    #[test]
    fn metric_axioms(a in point(), b in point(), c in point()) {
        for d in [manhattan_distance, euclidean_distance] {
            prop_assert!(d(a, b) >= 0.0);
            prop_assert_eq!(d(a, b), d(b, a));
            prop_assert_eq!(d(a, a), 0.0);
            prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-9);
        }
        prop_assert!(manhattan_distance(a, b) >= euclidean_distance(a, b) - 1e-12);
    }
}
