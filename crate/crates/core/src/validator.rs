//! Plan feasibility checking against every constraint group of the model,
//! plus an earliest-time replay used for the simulated makespan.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::energy::{path_energy, BatteryLedger, EntryCause, LedgerEntry};
use crate::error::{Error, Result};
use crate::milp::groups as g;
use crate::milp::objective_value;
use crate::model::{launch_position, recovery_position, FleetSpec, Instance, ModelOptions, Plan, Sortie, VehicleKind, DEPOT};

pub const TIME_TOL: f64 = 1e-6;
pub const ENERGY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub constraint_family: String,
    pub detail: String,
    pub involved_ids: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
    pub model_makespan: f64,
    pub simulated_makespan: f64,
    pub battery_ledgers: Vec<BatteryLedger>,
}

impl ValidationReport {
    pub fn families(&self) -> Vec<&str> {
        self.violations.iter().map(|v| v.constraint_family.as_str()).collect()
    }
}

pub fn sortie_duration(s: &Sortie, inst: &Instance, fleet: &FleetSpec) -> f64 {
    inst.path_distance(s.vehicle_kind, s.launch_node, &s.sequence, s.recovery_node) / fleet.speed(s.vehicle_kind)
}

/// Launch and recovery route positions of each sortie, when both exist.
pub fn sortie_positions(routes: &[Vec<usize>], sorties: &[Sortie]) -> Vec<Option<(usize, usize)>> {
    sorties
        .iter()
        .map(|s| {
            let lp = routes.get(s.launch_truck).and_then(|r| launch_position(r, s.launch_node))?;
            let rp = routes.get(s.recovery_truck).and_then(|r| recovery_position(r, s.recovery_node))?;
            Some((lp, rp))
        })
        .collect()
}

/// Earliest arrival times when trucks wait at recovery stops for returning
/// sorties and every sortie launches as soon as its truck arrives. Returns
/// `None` when a sortie endpoint is off-route or the waits form a cycle.
pub fn replay_arrivals(routes: &[Vec<usize>], sorties: &[Sortie], inst: &Instance, fleet: &FleetSpec) -> Option<Vec<Vec<f64>>> {
    let positions = sortie_positions(routes, sorties);
    let mut incoming: Vec<Vec<Vec<(usize, usize, f64)>>> = routes.iter().map(|r| vec![Vec::new(); r.len()]).collect();
    for (s, pos) in sorties.iter().zip(&positions) {
        let (lp, rp) = (*pos)?;
        incoming[s.recovery_truck][rp].push((s.launch_truck, lp, sortie_duration(s, inst, fleet)));
    }
    let legs: Vec<Vec<f64>> = routes
        .iter()
        .map(|r| r.windows(2).map(|w| inst.truck_distance(fleet, w[0], w[1]) / fleet.truck_speed).collect())
        .collect();
    let mut arr: Vec<Vec<f64>> = routes.iter().map(|r| vec![0.0; r.len()]).collect();
    let rounds = sorties.len() + 2;
    for _ in 0..=rounds {
        let mut changed = false;
        for t in 0..routes.len() {
            for p in 1..routes[t].len() {
                let mut a = arr[t][p - 1] + legs[t][p - 1];
                for &(lt, lp, dur) in &incoming[t][p] {
                    a = a.max(arr[lt][lp] + dur);
                }
                if a > arr[t][p] {
                    arr[t][p] = a;
                    changed = true;
                }
            }
        }
        if !changed {
            return Some(arr);
        }
    }
    None
}

/// Last depot return under the waiting replay. Falls back to the plan's own
/// arrival times when the replay is undefined.
pub fn simulated_makespan(plan: &Plan, inst: &Instance, fleet: &FleetSpec) -> f64 {
    let last = |arr: &[Vec<f64>]| arr.iter().filter_map(|a| a.last().copied()).fold(0.0, f64::max);
    match replay_arrivals(&plan.truck_routes, &plan.sorties, inst, fleet) {
        Some(arr) => last(&arr),
        None => last(&plan.truck_arrivals),
    }
}

fn check_structure(plan: &Plan, inst: &Instance, fleet: &FleetSpec) -> Result<()> {
    let bad = |msg: String| Err(Error::MalformedPlan(msg));
    if plan.truck_routes.len() != fleet.num_trucks {
        return bad(format!("{} routes for {} trucks", plan.truck_routes.len(), fleet.num_trucks));
    }
    if plan.truck_arrivals.len() != plan.truck_routes.len() {
        return bad("truck_arrivals must have one list per route".into());
    }
    for (t, (route, arr)) in plan.truck_routes.iter().zip(&plan.truck_arrivals).enumerate() {
        if route.is_empty() {
            return bad(format!("route of truck {t} is empty"));
        }
        if arr.len() != route.len() {
            return bad(format!("truck {t} has {} arrival times for {} stops", arr.len(), route.len()));
        }
        if arr.iter().any(|a| !a.is_finite()) {
            return bad(format!("truck {t} has a non-finite arrival time"));
        }
        if let Some(v) = route.iter().find(|&&v| !inst.contains(v)) {
            return bad(format!("route of truck {t} references unknown node {v}"));
        }
    }
    for s in &plan.sorties {
        if s.vehicle_id >= fleet.count(s.vehicle_kind) {
            return bad(format!("{} {} does not exist", s.vehicle_kind, s.vehicle_id));
        }
        if s.launch_truck >= fleet.num_trucks || s.recovery_truck >= fleet.num_trucks {
            return bad(format!("sortie {:?} references a missing truck", s.sequence));
        }
        if !s.launch_time.is_finite() {
            return bad(format!("sortie {:?} has a non-finite launch time", s.sequence));
        }
        s.check_shape(inst)?;
    }
    for e in &plan.charging_events {
        if e.vehicle_id >= fleet.count(e.vehicle_kind) {
            return bad(format!("charging event for missing {} {}", e.vehicle_kind, e.vehicle_id));
        }
        if e.truck_id >= fleet.num_trucks || !inst.contains(e.node) {
            return bad(format!("charging event references truck {} / node {}", e.truck_id, e.node));
        }
        if !e.duration.is_finite() || !e.amount.is_finite() || e.duration < 0.0 || e.amount < 0.0 {
            return bad(format!("charging event at node {} has a negative or non-finite value", e.node));
        }
    }
    Ok(())
}

struct Report {
    violations: Vec<Violation>,
}

impl Report {
    fn add(&mut self, family: &str, detail: String, ids: Vec<usize>) {
        self.violations.push(Violation { constraint_family: family.to_string(), detail, involved_ids: ids });
    }
}

/// Checks `plan` against every constraint family. Dangling ids and other
/// shape errors are returned as `Err` before any family is checked.
pub fn validate(plan: &Plan, inst: &Instance, fleet: &FleetSpec, options: &ModelOptions) -> Result<ValidationReport> {
    check_structure(plan, inst, fleet)?;
    let mut r = Report { violations: Vec::new() };
    let routes = &plan.truck_routes;
    let arr = &plan.truck_arrivals;
    let tau = |a: usize, b: usize| inst.truck_distance(fleet, a, b) / fleet.truck_speed;

    // Routes.
    let mut route_ok = vec![true; routes.len()];
    for (t, route) in routes.iter().enumerate() {
        let closed = route.len() >= 2 && route[0] == DEPOT && route[route.len() - 1] == DEPOT;
        let interior_depot = route.len() > 2 && route[1..route.len() - 1].contains(&DEPOT);
        if !closed || interior_depot {
            route_ok[t] = false;
            r.add(g::DEPOT_START_END, format!("route of truck {t} must start and end at the depot only"), vec![t]);
        }
        for &v in route.iter().filter(|&&v| v != DEPOT) {
            if !inst.reachable(v) {
                r.add(g::TRUCK_UNREACHABLE, format!("truck {t} visits unreachable customer {v}"), vec![t, v]);
            }
        }
    }

    let counts = plan.visit_counts(inst.nodes.len());
    for j in inst.customer_ids() {
        if counts[j] != 1 {
            r.add(g::VISIT_ONCE, format!("customer {j} is served {} times", counts[j]), vec![j]);
        }
    }

    // Arrival recurrence.
    for (t, route) in routes.iter().enumerate() {
        if arr[t][0].abs() > TIME_TOL {
            r.add(g::TRUCK_TIMING, format!("truck {t} leaves the depot at {} instead of 0", arr[t][0]), vec![t]);
        }
        for p in 1..route.len() {
            let need = arr[t][p - 1] + tau(route[p - 1], route[p]);
            if arr[t][p] < need - TIME_TOL {
                r.add(
                    g::TRUCK_TIMING,
                    format!("truck {t} reaches position {p} at {} before {need}", arr[t][p]),
                    vec![t, route[p]],
                );
            }
        }
    }

    let positions = sortie_positions(routes, &plan.sorties);
    let max_len = options.max_sequence_len(fleet);
    let mut launch_use: BTreeMap<(VehicleKind, usize, usize, usize), usize> = BTreeMap::new();
    let mut recovery_use: BTreeMap<(VehicleKind, usize, usize, usize), usize> = BTreeMap::new();
    for (s, pos) in plan.sorties.iter().zip(&positions) {
        let ids = s.sequence.clone();
        let lr = routes[s.launch_truck].len() > 2;
        let rr = routes[s.recovery_truck].len() > 2;
        let lp = launch_position(&routes[s.launch_truck], s.launch_node);
        let rp = recovery_position(&routes[s.recovery_truck], s.recovery_node);
        if lp.is_none() || !lr {
            r.add(
                g::SORTIE_LAUNCH_PRESENCE,
                format!("truck {} does not visit launch node {}", s.launch_truck, s.launch_node),
                vec![s.launch_node],
            );
        }
        if rp.is_none() || !rr {
            r.add(
                g::SORTIE_RECOVERY_PRESENCE,
                format!("truck {} does not visit recovery node {}", s.recovery_truck, s.recovery_node),
                vec![s.recovery_node],
            );
        }
        *launch_use.entry((s.vehicle_kind, s.launch_node, s.launch_truck, s.recovery_truck)).or_default() += 1;
        *recovery_use.entry((s.vehicle_kind, s.recovery_node, s.launch_truck, s.recovery_truck)).or_default() += 1;

        if s.sequence.len() > max_len {
            r.add(g::SORTIE_CAPACITY, format!("sortie serves {} customers, limit {max_len}", s.sequence.len()), ids.clone());
        }
        let payload = s.payload(inst);
        if payload > fleet.payload(s.vehicle_kind) + ENERGY_TOL {
            r.add(g::PAYLOAD, format!("payload {payload} exceeds {}", fleet.payload(s.vehicle_kind)), ids.clone());
        }
        let dist = inst.path_distance(s.vehicle_kind, s.launch_node, &s.sequence, s.recovery_node);
        if dist > fleet.range(s.vehicle_kind) + TIME_TOL {
            r.add(g::RANGE, format!("distance {dist} exceeds {}", fleet.range(s.vehicle_kind)), ids.clone());
        }
        if !options.flexible_docking && s.launch_truck != s.recovery_truck {
            r.add(g::FIXED_DOCKING, format!("sortie {:?} changes truck", s.sequence), ids.clone());
        }
        if let Some((lp, rp)) = *pos {
            if s.launch_truck == s.recovery_truck && rp <= lp {
                r.add(
                    g::SORTIE_PRECEDENCE,
                    format!("sortie {:?} is recovered at position {rp}, not after launch position {lp}", s.sequence),
                    vec![s.launch_node, s.recovery_node],
                );
            }
            let ready = arr[s.launch_truck][lp];
            if s.launch_time < ready - TIME_TOL {
                r.add(
                    g::LAUNCH_SYNC,
                    format!("sortie {:?} launches at {} before its truck arrives at {ready}", s.sequence, s.launch_time),
                    vec![s.launch_node],
                );
            }
            let back = s.launch_time + dist / fleet.speed(s.vehicle_kind);
            let meet = arr[s.recovery_truck][rp];
            if back > meet + TIME_TOL {
                r.add(
                    g::RETURN_SYNC,
                    format!("sortie {:?} returns at {back} after its truck arrives at {meet}", s.sequence),
                    vec![s.recovery_node],
                );
            }
        }
    }
    for ((kind, node, ti, tk), c) in launch_use {
        if c > 1 {
            r.add(g::SORTIE_LAUNCH_PRESENCE, format!("{c} {kind} sorties launch at node {node} for trucks ({ti},{tk})"), vec![node]);
        }
    }
    for ((kind, node, ti, tk), c) in recovery_use {
        if c > 1 {
            r.add(g::SORTIE_RECOVERY_PRESENCE, format!("{c} {kind} sorties recover at node {node} for trucks ({ti},{tk})"), vec![node]);
        }
    }

    let replay = if positions.iter().all(Option::is_some) && route_ok.iter().all(|&ok| ok) {
        replay_arrivals(routes, &plan.sorties, inst, fleet)
    } else {
        None
    };
    if positions.iter().all(Option::is_some) && route_ok.iter().all(|&ok| ok) && replay.is_none() {
        r.add(g::SORTIE_PRECEDENCE, "sorties form a cyclic wait between trucks".into(), vec![]);
    }

    // Vehicles: chains, charging and battery ledgers.
    let mut ledgers = Vec::new();
    for kind in VehicleKind::ALL {
        for v in 0..fleet.count(kind) {
            let ledger = check_vehicle(plan, inst, fleet, options, kind, v, &positions, &mut r);
            ledgers.push(ledger);
        }
    }
    if options.single_trip {
        for kind in VehicleKind::ALL {
            for v in 0..fleet.count(kind) {
                let n = plan.sorties.iter().filter(|s| s.vehicle_kind == kind && s.vehicle_id == v).count();
                if n > 1 {
                    r.add(g::SINGLE_TRIP, format!("{kind} {v} flies {n} sorties"), vec![v]);
                }
            }
        }
    }

    let breakdown = objective_value(plan, inst, fleet);
    if plan.objective_breakdown.makespan < breakdown.makespan - TIME_TOL {
        r.add(
            g::MAKESPAN,
            format!("reported makespan {} is below {}", plan.objective_breakdown.makespan, breakdown.makespan),
            vec![],
        );
    }

    let simulated = match &replay {
        Some(a) => a.iter().filter_map(|x| x.last().copied()).fold(0.0, f64::max),
        None => arr.iter().filter_map(|x| x.last().copied()).fold(0.0, f64::max),
    };
    Ok(ValidationReport {
        feasible: r.violations.is_empty(),
        violations: r.violations,
        model_makespan: breakdown.makespan,
        simulated_makespan: simulated,
        battery_ledgers: ledgers,
    })
}

#[allow(clippy::too_many_arguments)]
fn check_vehicle(
    plan: &Plan,
    inst: &Instance,
    fleet: &FleetSpec,
    options: &ModelOptions,
    kind: VehicleKind,
    v: usize,
    positions: &[Option<(usize, usize)>],
    r: &mut Report,
) -> BatteryLedger {
    let routes = &plan.truck_routes;
    let arr = &plan.truck_arrivals;
    let cap = fleet.battery(kind);
    let rate = fleet.charge_rate(kind);
    let mut ledger = BatteryLedger::new(kind, v, cap);

    let mut chain: Vec<(&Sortie, Option<(usize, usize)>)> = plan
        .sorties
        .iter()
        .zip(positions)
        .filter(|(s, _)| s.vehicle_kind == kind && s.vehicle_id == v)
        .map(|(s, p)| (s, *p))
        .collect();
    chain.sort_by(|a, b| {
        a.0.launch_time
            .total_cmp(&b.0.launch_time)
            .then(a.1.map(|p| p.0).cmp(&b.1.map(|p| p.0)))
    });
    let events: Vec<_> = plan
        .charging_events
        .iter()
        .filter(|e| e.vehicle_kind == kind && e.vehicle_id == v)
        .collect();

    // Carried segments: (truck, first position, last position); legs p in [first, last) are carried.
    let carrier = chain
        .first()
        .map(|c| c.0.launch_truck)
        .or_else(|| events.first().map(|e| e.truck_id))
        .unwrap_or(0);
    let mut segments: Vec<(usize, usize, usize)> = Vec::new();
    let mut chain_ok = chain.iter().all(|c| c.1.is_some()) && !routes.is_empty();
    if chain_ok {
        let mut truck = carrier;
        let mut from = 0;
        for (s, pos) in &chain {
            let (lp, rp) = pos.unwrap();
            if s.launch_truck != truck || lp < from {
                r.add(
                    g::VEHICLE_ABOARD,
                    format!("{kind} {v} launches sortie {:?} from truck {} position {lp} while aboard truck {truck} from position {from}", s.sequence, s.launch_truck),
                    s.sequence.clone(),
                );
                chain_ok = false;
                break;
            }
            segments.push((truck, from, lp));
            truck = s.recovery_truck;
            from = rp;
        }
        if chain_ok {
            segments.push((truck, from, routes[truck].len() - 1));
        }
    }

    // Charging events.
    let mut per_leg: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    for e in &events {
        if !options.charging {
            r.add(g::CHARGING_DISABLED, format!("{kind} {v} charges at node {} with charging disabled", e.node), vec![e.node]);
            continue;
        }
        let route = &routes[e.truck_id];
        if e.node == DEPOT {
            r.add(g::NO_DEPOT_CHARGE, format!("{kind} {v} charges on the depot departure leg of truck {}", e.truck_id), vec![DEPOT]);
            continue;
        }
        let Some(p) = launch_position(route, e.node).filter(|&p| p + 1 < route.len()) else {
            r.add(g::CHARGING_PRESENCE, format!("truck {} does not leave node {}", e.truck_id, e.node), vec![e.node]);
            continue;
        };
        let entry = per_leg.entry((e.truck_id, p)).or_default();
        entry.0 += e.amount;
        entry.1 += e.duration;
        if e.amount > rate * e.duration + ENERGY_TOL {
            r.add(
                g::CHARGING_RATE,
                format!("{kind} {v} gains {} in {} h at node {}", e.amount, e.duration, e.node),
                vec![e.node],
            );
        }
        if chain_ok && !segments.iter().any(|&(t, a, b)| t == e.truck_id && a <= p && p < b) {
            r.add(
                g::CHARGING_ABOARD,
                format!("{kind} {v} is not aboard truck {} when it leaves node {}", e.truck_id, e.node),
                vec![e.node],
            );
        }
    }
    for (&(t, p), &(amount, duration)) in &per_leg {
        let leg = inst.truck_distance(fleet, routes[t][p], routes[t][p + 1]) / fleet.truck_speed;
        if duration > leg + TIME_TOL {
            r.add(
                g::CHARGING_TIME,
                format!("{kind} {v} charges {duration} h on a {leg} h leg from node {}", routes[t][p]),
                vec![routes[t][p]],
            );
        }
        if amount > rate * leg + ENERGY_TOL {
            r.add(
                g::CHARGING_RATE,
                format!("{kind} {v} gains {amount} on a {leg} h leg from node {}", routes[t][p]),
                vec![routes[t][p]],
            );
        }
    }

    // Ledger replay along the carried segments.
    if chain_ok {
        for (k, &(t, from, to)) in segments.iter().enumerate() {
            for p in from..to {
                if let Some(&(amount, _)) = per_leg.get(&(t, p)) {
                    if amount > 0.0 {
                        ledger.entries.push(LedgerEntry { time: arr[t][p], delta: amount, cause: EntryCause::Charge });
                        let level = ledger.level();
                        if level > cap + ENERGY_TOL {
                            r.add(
                                g::OVERCHARGE,
                                format!("{kind} {v} reaches {level} of {cap} after charging at node {}", routes[t][p]),
                                vec![routes[t][p]],
                            );
                        }
                    }
                }
            }
            if let Some((s, _)) = chain.get(k) {
                let e = path_energy(kind, inst, fleet, s.launch_node, &s.sequence, s.recovery_node);
                ledger.entries.push(LedgerEntry { time: s.launch_time, delta: -e, cause: EntryCause::Sortie });
                let level = ledger.level();
                if level < -ENERGY_TOL {
                    r.add(
                        g::BATTERY_BALANCE,
                        format!("{kind} {v} needs {e} for sortie {:?} and is left at {level}", s.sequence),
                        s.sequence.clone(),
                    );
                }
            }
        }
    }
    ledger
}
