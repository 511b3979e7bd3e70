//! Three-phase construction heuristic: nearest-neighbour truck routes,
//! synchronized drone and robot sorties with en-route charging, then
//! cheapest insertion of whatever is left.

mod assign;
mod charging;
mod construct;

pub use assign::{assign_sorties, assign_sorties_after, Assignment, Location, VehicleState, NEAREST_CANDIDATES};
pub use charging::{apply_enroute_charging, carried_leg_limit, level_after_ride, ChargeReplay};
pub use construct::{build_timeline, construct_truck_routes, insert_unserved, insertion_delta, route_size_cap, Timeline};

use crate::error::{Error, Result};
use crate::milp::objective_value;
use crate::model::{launch_position, recovery_position, FleetSpec, Instance, ModelOptions, Plan, Sortie};
use crate::validator::{sortie_duration, validate};

/// Runs all phases and returns a plan the validator accepts. After the
/// insertion phase the sorties are re-timed against the new timeline; any
/// that no longer fits in time or energy is dropped and its customers are
/// inserted into the routes instead.
pub fn solve_finder(inst: &Instance, fleet: &FleetSpec, options: &ModelOptions) -> Result<Plan> {
    fleet.validate()?;
    let mut routes = construct_truck_routes(inst, fleet)?;
    let routed: Vec<bool> = {
        let mut seen = vec![false; inst.nodes.len()];
        for &v in routes.iter().flatten() {
            seen[v] = true;
        }
        seen
    };
    let unserved: Vec<usize> = inst.customer_ids().filter(|&c| !routed[c]).collect();
    let timeline = build_timeline(&routes, inst, fleet);
    let mut assignment = assign_sorties(&routes, &timeline, &unserved, VehicleState::initial(fleet), inst, fleet, options);
    if assignment.unserved.iter().any(|&c| !inst.reachable(c)) {
        // Give customers no truck can reach first call on fresh vehicles.
        let (stranded, rest): (Vec<usize>, Vec<usize>) = unserved.iter().partition(|&&c| !inst.reachable(c));
        let first = assign_sorties(&routes, &timeline, &stranded, VehicleState::initial(fleet), inst, fleet, options);
        let mut second = assign_sorties_after(&first.sorties, &routes, &timeline, &rest, first.states, inst, fleet, options);
        second.sorties.splice(0..0, first.sorties);
        second.unserved.extend(first.unserved);
        second.unserved.sort_unstable();
        if second.unserved.iter().filter(|&&c| !inst.reachable(c)).count()
            < assignment.unserved.iter().filter(|&&c| !inst.reachable(c)).count()
        {
            assignment = second;
        }
    }
    let mut sorties = assignment.sorties;
    let mut leftover = assignment.unserved;

    loop {
        insert_unserved(&mut routes, &leftover, inst, fleet)?;
        leftover.clear();
        let timeline = build_timeline(&routes, inst, fleet);
        if let Some(i) = first_late_sortie(&routes, &timeline, &mut sorties, inst, fleet) {
            leftover = sorties.remove(i).sequence;
            continue;
        }
        let replay = apply_enroute_charging(&routes, &timeline, &sorties, inst, fleet, options);
        if let Some(&i) = replay.failed.first() {
            leftover = sorties.remove(i).sequence;
            continue;
        }
        let mut plan = Plan {
            truck_routes: routes,
            sorties,
            truck_arrivals: timeline.arrivals(),
            charging_events: replay.events,
            ledgers: Vec::new(),
            ..Plan::default()
        };
        plan.objective_breakdown = objective_value(&plan, inst, fleet);
        let report = validate(&plan, inst, fleet, options)?;
        if !report.feasible {
            return Err(Error::Domain(format!("heuristic plan failed validation: {:?}", report.violations)));
        }
        plan.ledgers = report.battery_ledgers;
        return Ok(plan);
    }
}

/// Sets each launch time to the launching truck's arrival and returns the
/// first sortie, in launch order, that would come back after its recovery
/// truck arrives.
fn first_late_sortie(routes: &[Vec<usize>], timeline: &Timeline, sorties: &mut [Sortie], inst: &Instance, fleet: &FleetSpec) -> Option<usize> {
    let mut late: Option<(f64, usize)> = None;
    for (i, s) in sorties.iter_mut().enumerate() {
        let lp = launch_position(&routes[s.launch_truck], s.launch_node)?;
        let rp = recovery_position(&routes[s.recovery_truck], s.recovery_node)?;
        s.launch_time = timeline.arrival(s.launch_truck, lp);
        let back = s.launch_time + sortie_duration(s, inst, fleet);
        let fits = back <= timeline.arrival(s.recovery_truck, rp) && (s.launch_truck != s.recovery_truck || rp > lp);
        if !fits && late.is_none_or(|(t, _)| s.launch_time < t) {
            late = Some((s.launch_time, i));
        }
    }
    late.map(|(_, i)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Node, Point, VehicleKind};

    fn node(id: usize, x: f64, y: f64) -> Node {
        Node { id, x, y, weight: 1.0, truck_reachable: true }
    }

    fn line(n: usize, fleet: &FleetSpec) -> Instance {
        let custs = (1..=n).map(|i| node(i, i as f64, 0.0)).collect();
        Instance::new(Point::new(0.0, 0.0), custs, fleet.clone(), 0).unwrap()
    }

    #[test]
    fn sizing_rule() {
        assert_eq!(route_size_cap(30, 2), 7);
        assert_eq!(route_size_cap(4, 2), 3);
        assert_eq!(route_size_cap(0, 1), 3);
    }

    #[test]
    fn construction_fills_trucks_in_order() {
        let fleet = FleetSpec { num_trucks: 2, ..FleetSpec::default() };
        let inst = line(4, &fleet);
        let routes = construct_truck_routes(&inst, &fleet).unwrap();
        assert_eq!(routes, vec![vec![0, 1, 2, 3, 0], vec![0, 4, 0]]);
        let empty = line(0, &fleet);
        assert_eq!(construct_truck_routes(&empty, &fleet).unwrap(), vec![vec![0, 0], vec![0, 0]]);
    }

    #[test]
    fn zero_trucks_with_customers_is_a_config_error() {
        let fleet = FleetSpec { num_trucks: 0, ..FleetSpec::default() };
        let inst = line(2, &fleet);
        assert!(matches!(construct_truck_routes(&inst, &fleet), Err(Error::Config(_))));
    }

    #[test]
    fn timeline_of_single_stop() {
        let fleet = FleetSpec::default();
        let custs = vec![node(1, 4.0, 5.0)];
        let inst = Instance::new(Point::new(0.0, 0.0), custs, fleet.clone(), 0).unwrap();
        let tl = build_timeline(&[vec![0, 1, 0]], &inst, &fleet);
        assert_eq!(tl.trucks[0], vec![(0, 0.0), (1, 0.2), (0, 0.4)]);
    }

    #[test]
    fn insertion_delta_and_ties() {
        let fleet = FleetSpec::default();
        let custs = vec![node(1, 4.0, 0.0), node(2, 2.0, 2.0), node(3, 2.0, 0.0)];
        let inst = Instance::new(Point::new(0.0, 0.0), custs, fleet.clone(), 0).unwrap();
        assert_eq!(insertion_delta(&inst, &fleet, 0, 2, 1), 4.0);
        assert_eq!(insertion_delta(&inst, &fleet, 0, 3, 1), 0.0);
        let mut routes = vec![vec![0, 1, 0]];
        insert_unserved(&mut routes, &[3], &inst, &fleet).unwrap();
        assert_eq!(routes, vec![vec![0, 3, 1, 0]]);
        // Both legs of [0, 1, 0] cost the same extra distance for node 2.
        let mut routes = vec![vec![0, 1, 0]];
        insert_unserved(&mut routes, &[2], &inst, &fleet).unwrap();
        assert_eq!(routes, vec![vec![0, 2, 1, 0]]);
    }

    #[test]
    fn unreachable_leftover_is_unservable() {
        let fleet = FleetSpec { num_drones: 0, num_robots: 0, ..FleetSpec::default() };
        let mut custs = vec![node(1, 1.0, 0.0), node(2, 2.0, 0.0)];
        custs[1].truck_reachable = false;
        let inst = Instance::new(Point::new(0.0, 0.0), custs, fleet.clone(), 0).unwrap();
        match solve_finder(&inst, &fleet, &ModelOptions::default()) {
            Err(Error::Unservable(ids)) => assert_eq!(ids, vec![2]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_range_customer_gets_no_sortie() {
        let fleet = FleetSpec { drone_range: 20.0, num_robots: 0, ..FleetSpec::default() };
        let mut custs: Vec<Node> = (1..=3).map(|i| node(i, i as f64 * 0.1, 0.0)).collect();
        let mut far = node(4, 30.0, 30.0);
        far.truck_reachable = true;
        custs.push(far);
        let inst = Instance::new(Point::new(0.0, 0.0), custs, fleet.clone(), 0).unwrap();
        let routes = construct_truck_routes(&inst, &fleet).unwrap();
        let tl = build_timeline(&routes, &inst, &fleet);
        let a = assign_sorties(&routes, &tl, &[4], VehicleState::initial(&fleet), &inst, &fleet, &ModelOptions::default());
        assert!(a.sorties.is_empty());
        assert_eq!(a.unserved, vec![4]);
    }

    #[test]
    fn charging_on_a_carried_leg() {
        let fleet = FleetSpec::default();
        let custs = vec![node(1, 0.0, 10.0), node(2, 0.0, 32.5)];
        let inst = Instance::new(Point::new(0.0, 0.0), custs, fleet.clone(), 0).unwrap();
        // The leg 1 -> 2 is 22.5 km, half an hour at 45 km/h.
        let level = level_after_ride(&[0, 1, 2, 0], &inst, &fleet, &ModelOptions::default(), VehicleKind::Drone, 0, 2, 10_000.0);
        assert!((level - 12_500.0).abs() < 1e-9);
        let off = ModelOptions { charging: false, ..ModelOptions::default() };
        assert_eq!(level_after_ride(&[0, 1, 2, 0], &inst, &fleet, &off, VehicleKind::Drone, 0, 2, 10_000.0), 10_000.0);
    }
}
