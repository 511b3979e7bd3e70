mod common;

use common::instance;
use proptest::prelude::*;
use vrpdr_core::bench::{generate_instance, generate_instance_with};
use vrpdr_core::exact::{solve_exact, SearchBudget};
use vrpdr_core::finder::solve_finder;
use vrpdr_core::milp::groups as g;
use vrpdr_core::milp::{build_model, objective_value};
use vrpdr_core::model::{FleetSpec, Instance, ModelOptions, Plan, Sortie, VehicleKind};
use vrpdr_core::validator::{replay_arrivals, simulated_makespan, validate};
use vrpdr_core::Error;

fn no_charge() -> ModelOptions {
    ModelOptions { charging: false, ..ModelOptions::default() }
}

/// A plan over the given routes and sorties with waiting-replay arrivals and
/// launch times at the launching truck's arrival.
fn plan_of(routes: Vec<Vec<usize>>, mut sorties: Vec<Sortie>, inst: &Instance, fleet: &FleetSpec) -> Plan {
    let arrivals = replay_arrivals(&routes, &sorties, inst, fleet).expect("replayable");
    for s in sorties.iter_mut() {
        let route = &routes[s.launch_truck];
        let p = if s.launch_node == 0 { 0 } else { route.iter().position(|&v| v == s.launch_node).unwrap() };
        s.launch_time = arrivals[s.launch_truck][p];
    }
    let mut plan = Plan { truck_routes: routes, sorties, truck_arrivals: arrivals, ..Plan::default() };
    plan.objective_breakdown = objective_value(&plan, inst, fleet);
    plan
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

/// Truck 0 → 1 (9 km, 0.2 h) → 2 (4.5 km, 0.1 h) → 0 (13.5 km, 0.3 h). A
/// robot launched at 1 serves 3 and meets the truck at 2 after 5 km, 0.2 h,
/// so the truck waits 0.1 h at node 2.
fn waiting_case() -> (Instance, FleetSpec, Plan) {
    let fleet = FleetSpec::default();
    let inst = instance(&[(9.0, 0.0, 1.0), (9.0, 4.5, 1.0), (9.25, 2.0, 2.0)], &fleet);
    let plan = plan_of(vec![vec![0, 1, 2, 0]], vec![sortie(VehicleKind::Robot, 1, vec![3], 2)], &inst, &fleet);
    (inst, fleet, plan)
}

#[test]
fn known_wait_adds_a_tenth_of_an_hour() {
    let (inst, fleet, plan) = waiting_case();
    let expected = [0.0, 0.2, 0.4, 0.7];
    for (a, e) in plan.truck_arrivals[0].iter().zip(expected) {
        assert!((a - e).abs() < 1e-12, "{:?}", plan.truck_arrivals);
    }
    assert!((plan.objective_breakdown.makespan - 0.6).abs() < 1e-12);
    assert!((simulated_makespan(&plan, &inst, &fleet) - 0.7).abs() < 1e-12);
    let report = validate(&plan, &inst, &fleet, &ModelOptions::default()).unwrap();
    assert!(report.feasible, "{:?}", report.violations);
    assert!((report.model_makespan - 0.6).abs() < 1e-12);
    assert!((report.simulated_makespan - (report.model_makespan + 0.1)).abs() < 1e-12);
}

#[test]
fn truck_only_plan_has_no_wait() {
    let fleet = FleetSpec { num_drones: 0, num_robots: 0, ..FleetSpec::default() };
    let inst = generate_instance(6, 8, &fleet);
    let plan = solve_finder(&inst, &fleet, &ModelOptions::default()).unwrap();
    let report = validate(&plan, &inst, &fleet, &ModelOptions::default()).unwrap();
    assert!(report.feasible);
    assert!((report.simulated_makespan - report.model_makespan).abs() < 1e-12);
}

#[test]
fn duplicate_service_is_one_visit_violation() {
    let fleet = FleetSpec::default();
    let inst = instance(&[(2.0, 0.0, 1.0), (4.0, 0.0, 1.0)], &fleet);
    let plan = plan_of(vec![vec![0, 1, 2, 0]], vec![sortie(VehicleKind::Drone, 0, vec![1], 2)], &inst, &fleet);
    let report = validate(&plan, &inst, &fleet, &no_charge()).unwrap();
    assert_eq!(report.families(), vec![g::VISIT_ONCE]);
    assert_eq!(report.violations[0].involved_ids, vec![1]);
    assert!(!report.feasible);
}

#[test]
fn early_launch_breaks_launch_sync() {
    let (inst, fleet, mut plan) = waiting_case();
    assert!(validate(&plan, &inst, &fleet, &ModelOptions::default()).unwrap().feasible);
    plan.sorties[0].launch_time -= 0.01;
    let report = validate(&plan, &inst, &fleet, &ModelOptions::default()).unwrap();
    assert!(report.families().contains(&g::LAUNCH_SYNC), "{:?}", report.violations);
    assert!(!report.feasible);
}

#[test]
fn return_after_truck_breaks_return_sync() {
    let (inst, fleet, mut plan) = waiting_case();
    plan.truck_arrivals[0][2] -= 0.05;
    plan.truck_arrivals[0][3] -= 0.05;
    let report = validate(&plan, &inst, &fleet, &ModelOptions::default()).unwrap();
    assert!(report.families().contains(&g::RETURN_SYNC), "{:?}", report.violations);
}

#[test]
fn range_payload_and_capacity_limits() {
    let fleet = FleetSpec { m: 2, ..FleetSpec::default() };
    let inst = instance(&[(1.0, 0.0, 9.0), (1.0, 1.0, 9.0), (0.0, 1.0, 9.0), (2.0, 2.0, 1.0)], &fleet);
    let plan = plan_of(vec![vec![0, 4, 0]], vec![sortie(VehicleKind::Robot, 0, vec![1, 2, 3], 4)], &inst, &fleet);
    let report = validate(&plan, &inst, &fleet, &no_charge()).unwrap();
    let fam = report.families();
    assert!(fam.contains(&g::SORTIE_CAPACITY) && fam.contains(&g::PAYLOAD), "{fam:?}");

    let far = FleetSpec { robot_range: 1.0, ..FleetSpec::default() };
    let inst = instance(&[(1.0, 1.0, 1.0), (2.0, 0.0, 1.0)], &far);
    let plan = plan_of(vec![vec![0, 2, 0]], vec![sortie(VehicleKind::Robot, 0, vec![1], 2)], &inst, &far);
    assert!(validate(&plan, &inst, &far, &no_charge()).unwrap().families().contains(&g::RANGE));
}

#[test]
fn dangling_ids_are_structural_errors() {
    let (inst, fleet, mut plan) = waiting_case();
    plan.sorties[0].sequence = vec![42];
    assert!(matches!(validate(&plan, &inst, &fleet, &ModelOptions::default()), Err(Error::InvalidInstance(_) | Error::MalformedPlan(_))));
    let (inst, fleet, mut plan) = waiting_case();
    plan.truck_routes[0][1] = 99;
    assert!(matches!(validate(&plan, &inst, &fleet, &ModelOptions::default()), Err(Error::MalformedPlan(_))));
    let (inst, fleet, mut plan) = waiting_case();
    plan.truck_arrivals[0].pop();
    assert!(matches!(validate(&plan, &inst, &fleet, &ModelOptions::default()), Err(Error::MalformedPlan(_))));
}

#[test]
fn exact_plans_validate_cleanly() {
    let fleet = FleetSpec::default();
    let mut solved = 0;
    for seed in 0..8 {
        let inst = generate_instance_with(4, 300 + seed, &fleet, 0.25).unwrap();
        let out = solve_exact(&inst, &fleet, &ModelOptions::default(), &SearchBudget::default()).unwrap();
        let Some(plan) = out.plan() else {
            // No sortie reaches some truck-unreachable customer.
            assert!(matches!(solve_finder(&inst, &fleet, &ModelOptions::default()), Err(Error::Unservable(_))));
            continue;
        };
        let report = validate(plan, &inst, &fleet, &ModelOptions::default()).unwrap();
        assert!(report.feasible && report.violations.is_empty());
        assert!(report.simulated_makespan >= report.model_makespan - 1e-9);
        solved += 1;
    }
    assert!(solved >= 4);
}

/// Plans broken in assorted ways, for naming and metamorphic checks.
fn broken_variants(plan: &Plan) -> Vec<Plan> {
    let mut out = Vec::new();
    let mut p = plan.clone();
    if let Some(s) = p.sorties.first_mut() {
        s.launch_time -= 0.01;
        out.push(p.clone());
    }
    let mut p = plan.clone();
    if let Some(s) = p.sorties.first_mut() {
        s.vehicle_kind = match s.vehicle_kind {
            VehicleKind::Drone => VehicleKind::Robot,
            VehicleKind::Robot => VehicleKind::Drone,
        };
        out.push(p.clone());
    }
    let mut p = plan.clone();
    if p.truck_routes[0].len() > 3 {
        p.truck_routes[0].swap(1, 2);
        out.push(p);
    }
    let mut p = plan.clone();
    if p.truck_routes[0].len() > 2 {
        p.truck_routes[0].remove(1);
        p.truck_arrivals[0].remove(1);
        out.push(p);
    }
    let mut p = plan.clone();
    for a in p.truck_arrivals.iter_mut().flatten() {
        *a *= 0.9;
    }
    out.push(p);
    let mut p = plan.clone();
    p.objective_breakdown.makespan += 1.0;
    out.push(p);
    let mut p = plan.clone();
    for e in p.charging_events.iter_mut() {
        e.amount *= 50.0;
    }
    out.push(p);
    out
}

fn translated(inst: &Instance, dx: f64, dy: f64) -> Instance {
    let mut t = inst.clone();
    for nd in t.nodes.iter_mut() {
        nd.x += dx;
        nd.y += dy;
    }
    t
}

#[test]
fn violation_families_are_model_groups() {
    let fleet = FleetSpec { num_trucks: 2, ..FleetSpec::default() };
    let mut seen = std::collections::BTreeSet::new();
    for seed in 0..8 {
        let inst = generate_instance(20, 600 + seed, &fleet);
        for options in [ModelOptions::default(), no_charge()] {
            let plan = solve_finder(&inst, &fleet, &options).unwrap();
            let small = generate_instance(2, seed, &fleet);
            let groups = build_model(&small, &fleet, &options).unwrap().groups;
            for bad in broken_variants(&plan) {
                let report = validate(&bad, &inst, &fleet, &options).unwrap();
                for f in report.families() {
                    assert!(g::ALL.contains(&f), "{f}");
                    assert!(groups.iter().any(|x| x == f), "{f} is not emitted with these options");
                    seen.insert(f.to_string());
                }
            }
        }
    }
    assert!(seen.len() >= 4, "{seen:?}");
}

#[test]
fn validation_is_pure() {
    let fleet = FleetSpec::default();
    let inst = generate_instance(30, 17, &fleet);
    let plan = solve_finder(&inst, &fleet, &ModelOptions::default()).unwrap();
    for bad in std::iter::once(plan.clone()).chain(broken_variants(&plan)) {
        let a = validate(&bad, &inst, &fleet, &ModelOptions::default()).unwrap();
        let b = validate(&bad, &inst, &fleet, &ModelOptions::default()).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn translation_keeps_verdicts(seed in 0u64..1000, dx in -50.0..50.0f64, dy in -50.0..50.0f64) {
        let fleet = FleetSpec::default();
        let inst = generate_instance(12, seed, &fleet);
        let plan = solve_finder(&inst, &fleet, &ModelOptions::default()).unwrap();
        let moved = translated(&inst, dx.round(), dy.round());
        for p in std::iter::once(plan.clone()).chain(broken_variants(&plan)) {
            let a = validate(&p, &inst, &fleet, &ModelOptions::default()).unwrap();
            let b = validate(&p, &moved, &fleet, &ModelOptions::default()).unwrap();
            prop_assert_eq!(a.feasible, b.feasible);
        }
    }

    #[test]
    fn simulated_never_below_model(seed in 0u64..1000, size in 5usize..40) {
        let fleet = FleetSpec { num_trucks: 1 + (seed % 2) as usize, ..FleetSpec::default() };
        let inst = generate_instance(size, seed, &fleet);
        let plan = solve_finder(&inst, &fleet, &ModelOptions::default()).unwrap();
        let report = validate(&plan, &inst, &fleet, &ModelOptions::default()).unwrap();
        prop_assert!(report.feasible);
        prop_assert!(report.simulated_makespan >= report.model_makespan - 1e-9);
    }
}
