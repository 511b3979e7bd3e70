mod common;

use common::instance;
use proptest::prelude::*;
use vrpdr_core::energy::{
    apply_charging, drone_energy, drone_sortie_energy, robot_energy, robot_power, robot_sortie_energy, BatteryLedger,
    ChargingEvent, EntryCause,
};
use vrpdr_core::model::{FleetSpec, Sortie, VehicleKind};
use vrpdr_core::Error;

fn drone_sortie(seq: Vec<usize>, rec: usize) -> Sortie {
    Sortie {
        vehicle_kind: VehicleKind::Drone,
        vehicle_id: 0,
        launch_node: 0,
        recovery_node: rec,
        sequence: seq,
        launch_truck: 0,
        recovery_truck: 0,
        launch_time: 0.0,
    }
}

/// alpha_d * sum over legs of (self weight + load still aboard) * leg length.
fn drone_oracle(alpha_d: f64, self_weight: f64, legs: &[f64], weights: &[f64]) -> f64 {
    let mut load: f64 = weights.iter().sum();
    let mut total = 0.0;
    for (q, d) in legs.iter().enumerate() {
        total += (self_weight + load) * d;
        if q < weights.len() {
            load -= weights[q];
        }
    }
    alpha_d * total
}

#[test]
fn drone_single_customer() {
    let fleet = FleetSpec::default();
    assert_eq!(drone_oracle(128.0, 18.0, &[1.0, 1.0], &[2.0]), 4864.0);
    let inst = instance(&[(1.0, 0.0, 2.0), (2.0, 0.0, 1.0)], &fleet);
    let e = drone_sortie_energy(&drone_sortie(vec![1], 2), &inst, &fleet).unwrap();
    assert!((e - 4864.0).abs() < 1e-9, "{e}");
}

#[test]
fn drone_two_customers() {
    let fleet = FleetSpec::default();
    assert_eq!(drone_oracle(128.0, 18.0, &[1.0, 1.0, 1.0], &[2.0, 3.0]), 7936.0);
    let inst = instance(&[(1.0, 0.0, 2.0), (2.0, 0.0, 3.0), (3.0, 0.0, 1.0)], &fleet);
    let e = drone_sortie_energy(&drone_sortie(vec![1, 2], 3), &inst, &fleet).unwrap();
    assert!((e - 7936.0).abs() < 1e-9, "{e}");
}

#[test]
fn zero_length_legs_use_no_energy() {
    let fleet = FleetSpec::default();
    let inst = instance(&[(0.0, 0.0, 4.0)], &fleet);
    assert_eq!(drone_energy(&inst, &fleet, 0, &[1], 0), 0.0);
    assert_eq!(robot_energy(&inst, &fleet, 0, &[1], 0), 0.0);
}

/// Hand evaluation of the robot power model at the default parameters.
fn power_oracle(payload: f64, fleet: &FleetSpec) -> f64 {
    let v = fleet.robot_speed * 1000.0 / 3600.0;
    let mass = fleet.robot_weight + payload;
    let p_mech = fleet.k1 * mass * fleet.g * v * (1.0 + fleet.g / (2.0 * fleet.l_leg * v * v));
    p_mech * (1.0 + fleet.k2)
}

#[test]
fn robot_power_at_defaults() {
    let fleet = FleetSpec::default();
    let oracle = power_oracle(0.0, &fleet);
    assert!((oracle - 147.6).abs() < 0.5, "{oracle}");
    let p = robot_power(0.0, &fleet).unwrap();
    assert!((p - oracle).abs() < 1e-9);
    assert!((p - 147.6).abs() < 0.5);
}

#[test]
fn robot_power_scales_with_mass_and_k2() {
    let fleet = FleetSpec::default();
    let ratio = robot_power(5.0, &fleet).unwrap() / robot_power(0.0, &fleet).unwrap();
    assert!((ratio - 20.0 / 15.0).abs() < 1e-12);
    let doubled = FleetSpec { k2: 0.4, ..fleet.clone() };
    let ratio = robot_power(3.0, &doubled).unwrap() / robot_power(3.0, &fleet).unwrap();
    assert!((ratio - 1.4 / 1.2).abs() < 1e-12);
}

#[test]
fn robot_power_errors() {
    let stopped = FleetSpec { robot_speed: 0.0, ..FleetSpec::default() };
    assert!(matches!(robot_power(1.0, &stopped), Err(Error::SingularGait)));
    assert!(robot_power(-1.0, &FleetSpec::default()).is_err());
}

#[test]
fn robot_single_customer_two_terms() {
    let fleet = FleetSpec::default();
    let inst = instance(&[(0.5, 0.5, 6.0)], &fleet);
    let t = 1.0 / fleet.robot_speed;
    let expected = (power_oracle(6.0, &fleet) * t + power_oracle(0.0, &fleet) * t) * fleet.robot_energy_scale;
    let s = Sortie { vehicle_kind: VehicleKind::Robot, ..drone_sortie(vec![1], 0) };
    let e = robot_sortie_energy(&s, &inst, &fleet).unwrap();
    assert!((e - expected).abs() < 1e-9 * expected);
    assert!(matches!(drone_sortie_energy(&s, &inst, &fleet), Err(Error::KindMismatch { .. })));
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(k);
        for mut p in permutations(&rest) {
            p.insert(0, first);
            out.push(p);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Customers sit on a line at fixed spacings; each permutation assigns the
    /// parcels to those positions, so legs stay fixed and only the order of
    /// weights changes. Serving heavier parcels first is never worse.
    #[test]
    fn heavier_first_never_costs_more(
        weights in prop::collection::vec(0.5..10.0f64, 1..=4),
        legs in prop::collection::vec(0.1..3.0f64, 5),
    ) {
        let fleet = FleetSpec::default();
        let k = weights.len();
        let legs = &legs[..=k];
        let mut best = f64::INFINITY;
        let mut heavy_first = f64::NAN;
        let mut desc: Vec<usize> = (0..k).collect();
        desc.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
        for perm in permutations(&(0..k).collect::<Vec<_>>()) {
            let ws: Vec<f64> = perm.iter().map(|&i| weights[i]).collect();
            let mut x = 0.0;
            let mut custs = Vec::new();
            for q in 0..k {
                x += legs[q];
                custs.push((x, 0.0, ws[q]));
            }
            custs.push((x + legs[k], 0.0, 1.0));
            let inst = instance(&custs, &fleet);
            let seq: Vec<usize> = (1..=k).collect();
            let e = drone_energy(&inst, &fleet, 0, &seq, k + 1);
            let oracle = drone_oracle(fleet.drone_energy_coeff, fleet.drone_weight, legs, &ws);
            prop_assert!((e - oracle).abs() <= 1e-9 * oracle.max(1.0));
            best = best.min(e);
            if perm == desc {
                heavy_first = e;
            }
        }
        prop_assert!(heavy_first <= best + 1e-9 * best);
    }

    #[test]
    fn drone_energy_increases_with_weight_and_distance(
        w in 0.5..10.0f64,
        extra in 0.01..5.0f64,
        x in 0.1..5.0f64,
        stretch in 1.01..2.0f64,
    ) {
        let fleet = FleetSpec::default();
        let base = instance(&[(x, 0.0, w)], &fleet);
        let heavier = instance(&[(x, 0.0, w + extra)], &fleet);
        let farther = instance(&[(x * stretch, 0.0, w)], &fleet);
        let e = drone_energy(&base, &fleet, 0, &[1], 0);
        prop_assert!(drone_energy(&heavier, &fleet, 0, &[1], 0) > e);
        prop_assert!(drone_energy(&farther, &fleet, 0, &[1], 0) > e);
        // Affine in the weight: equal steps add equal energy.
        let twice = instance(&[(x, 0.0, w + 2.0 * extra)], &fleet);
        let d1 = drone_energy(&heavier, &fleet, 0, &[1], 0) - e;
        let d2 = drone_energy(&twice, &fleet, 0, &[1], 0) - drone_energy(&heavier, &fleet, 0, &[1], 0);
        prop_assert!((d1 - d2).abs() < 1e-9 * d1.abs().max(1.0));
    }

    #[test]
    fn robot_energy_increases_with_weight(w in 0.5..10.0f64, extra in 0.01..5.0f64, x in 0.1..3.0f64, y in 0.1..3.0f64) {
        let fleet = FleetSpec::default();
        let a = instance(&[(x, y, w), (y, x, 2.0)], &fleet);
        let b = instance(&[(x, y, w + extra), (y, x, 2.0)], &fleet);
        prop_assert!(robot_energy(&b, &fleet, 0, &[1, 2], 0) > robot_energy(&a, &fleet, 0, &[1, 2], 0));
    }
}

#[derive(Clone, Debug)]
enum Op {
    Consume(f64),
    Charge { amount: f64, duration: f64 },
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0.0..9000.0f64).prop_map(Op::Consume),
        (0.0..12000.0f64, 0.0..3.0f64).prop_map(|(amount, duration)| Op::Charge { amount, duration }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ledger_stays_within_capacity(
        kind in prop_oneof![Just(VehicleKind::Drone), Just(VehicleKind::Robot)],
        ops in prop::collection::vec(op(), 1..40),
    ) {
        let fleet = FleetSpec::default();
        let cap = fleet.battery(kind);
        let rate = fleet.charge_rate(kind);
        let mut ledger = BatteryLedger::new(kind, 0, cap);
        let mut level = cap;
        for (k, op) in ops.iter().enumerate() {
            let time = k as f64;
            match *op {
                Op::Consume(amount) => {
                    let before = ledger.clone();
                    match ledger.consume(time, amount) {
                        Ok(()) => {
                            prop_assert!(amount <= level);
                            level -= amount;
                        }
                        Err(Error::InsufficientEnergy { .. }) => {
                            prop_assert!(amount > level);
                            prop_assert_eq!(&ledger, &before);
                        }
                        Err(e) => prop_assert!(false, "unexpected {e}"),
                    }
                }
                Op::Charge { amount, duration } => {
                    let event = ChargingEvent { vehicle_kind: kind, vehicle_id: 0, truck_id: 0, node: 1, duration, amount };
                    let charged = apply_charging(&ledger, &event, rate, time).unwrap();
                    let expected = amount.min(rate * duration).min(cap - level);
                    prop_assert!((charged.added - expected).abs() < 1e-6);
                    prop_assert!((charged.clamped - (amount - charged.added)).abs() < 1e-6);
                    prop_assert!(charged.added <= rate * duration + 1e-9);
                    if charged.added > 0.0 {
                        let last = charged.ledger.entries.last().unwrap();
                        prop_assert_eq!(last.cause, EntryCause::Charge);
                    }
                    level += charged.added;
                    ledger = charged.ledger;
                }
            }
            prop_assert!((ledger.level() - level).abs() < 1e-6);
            for l in ledger.levels() {
                prop_assert!(l >= -1e-6 && l <= cap + 1e-6, "level {} outside [0, {}]", l, cap);
            }
        }
    }
}

#[test]
fn charging_examples() {
    let ev = |amount: f64, duration: f64| ChargingEvent {
        vehicle_kind: VehicleKind::Drone,
        vehicle_id: 0,
        truck_id: 0,
        node: 2,
        duration,
        amount,
    };
    let mut l = BatteryLedger::new(VehicleKind::Drone, 0, 14000.0);
    l.consume(0.0, 11000.0).unwrap();
    let c = apply_charging(&l, &ev(5000.0, 1.0), 5000.0, 1.0).unwrap();
    assert_eq!(c.ledger.level(), 8000.0);

    let full = BatteryLedger::new(VehicleKind::Drone, 0, 14000.0);
    let c = apply_charging(&full, &ev(300.0, 1.0), 5000.0, 1.0).unwrap();
    assert_eq!((c.ledger.level(), c.added, c.clamped), (14000.0, 0.0, 300.0));

    let c = apply_charging(&l, &ev(300.0, 0.0), 5000.0, 1.0).unwrap();
    assert_eq!(c.added, 0.0);
    assert!(matches!(apply_charging(&l, &ev(1.0, -1.0), 5000.0, 1.0), Err(Error::InvalidEvent(_))));
}
