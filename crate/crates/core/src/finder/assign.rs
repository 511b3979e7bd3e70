use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::energy::{apply_charging, path_energy, BatteryLedger, ChargingEvent};
use crate::model::{enumerate_sequences, FleetSpec, Instance, ModelOptions, Sortie, VehicleKind};

use super::charging::carried_leg_limit;
use super::construct::{insertion_delta, Timeline};

/// Candidate customers considered around each launch node.
pub const NEAREST_CANDIDATES: usize = 10;

/// Margin kept below the tracked level when accepting a sortie, so that the
/// final ledger replay, which sums in a different order, agrees.
const ENERGY_MARGIN: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Aboard { truck: usize, position: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub vehicle_kind: VehicleKind,
    pub vehicle_id: usize,
    pub available_from: f64,
    pub location: Location,
    /// Level at `location`, before any charging on later legs.
    pub level: f64,
    pub ledger: BatteryLedger,
    pub served: BTreeSet<usize>,
    pub trips: usize,
}

impl VehicleState {
    /// Every drone, then every robot, placed on the trucks round-robin with
    /// a full battery.
    pub fn initial(fleet: &FleetSpec) -> Vec<VehicleState> {
        let mut out = Vec::new();
        for kind in VehicleKind::ALL {
            for v in 0..fleet.count(kind) {
                let cap = fleet.battery(kind);
                out.push(VehicleState {
                    vehicle_kind: kind,
                    vehicle_id: v,
                    available_from: 0.0,
                    location: Location::Aboard { truck: v % fleet.num_trucks.max(1), position: 0 },
                    level: cap,
                    ledger: BatteryLedger::new(kind, v, cap),
                    served: BTreeSet::new(),
                    trips: 0,
                });
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub sorties: Vec<Sortie>,
    pub states: Vec<VehicleState>,
    pub unserved: Vec<usize>,
}

struct Candidate {
    stranded: usize,
    score: f64,
    recovery_truck: usize,
    recovery_pos: usize,
    seq: Vec<usize>,
    energy: f64,
    return_time: f64,
}

/// Walks all truck stops in time order and, at each stop, offers every
/// vehicle riding that truck the feasible sortie with the least energy per
/// customer among sequences over its nearest unserved customers. Sequences
/// covering more truck-unreachable customers win first.
pub fn assign_sorties(
    routes: &[Vec<usize>],
    timeline: &Timeline,
    unserved: &[usize],
    states: Vec<VehicleState>,
    inst: &Instance,
    fleet: &FleetSpec,
    options: &ModelOptions,
) -> Assignment {
    assign_sorties_after(&[], routes, timeline, unserved, states, inst, fleet, options)
}

/// Same as [`assign_sorties`] on top of `prior` sorties, whose launch and
/// recovery slots stay taken. `states` must already reflect them. Only the
/// new sorties are returned.
#[allow(clippy::too_many_arguments)]
pub fn assign_sorties_after(
    prior: &[Sortie],
    routes: &[Vec<usize>],
    timeline: &Timeline,
    unserved: &[usize],
    mut states: Vec<VehicleState>,
    inst: &Instance,
    fleet: &FleetSpec,
    options: &ModelOptions,
) -> Assignment {
    let mut open: BTreeSet<usize> = unserved.iter().copied().collect();
    let mut sorties = Vec::new();
    let mut launch_used: HashSet<(VehicleKind, usize, usize, usize)> =
        prior.iter().map(|s| (s.vehicle_kind, s.launch_node, s.launch_truck, s.recovery_truck)).collect();
    let mut recovery_used: HashSet<(VehicleKind, usize, usize, usize)> =
        prior.iter().map(|s| (s.vehicle_kind, s.recovery_node, s.launch_truck, s.recovery_truck)).collect();

    let mut stops: Vec<(f64, usize, usize)> = Vec::new();
    for (t, route) in routes.iter().enumerate() {
        if route.len() <= 2 {
            continue;
        }
        for p in 0..route.len() - 1 {
            stops.push((timeline.arrival(t, p), t, p));
        }
    }
    stops.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let max_len = options.max_sequence_len(fleet);

    for &(now, t, p) in &stops {
        for state in states.iter_mut() {
            if open.is_empty() {
                break;
            }
            let Location::Aboard { truck, position } = state.location;
            if truck != t || position > p || (options.single_trip && state.trips > 0) {
                continue;
            }
            let kind = state.vehicle_kind;
            ride(state, &routes[t], timeline, t, position, p, inst, fleet, options);
            state.location = Location::Aboard { truck: t, position: p };
            state.available_from = state.available_from.max(now);

            let launch = routes[t][p];
            let pool = nearby(inst, fleet, kind, launch, &open);
            let truck_value: Vec<f64> = (0..inst.nodes.len())
                .map(|c| if pool.contains(&c) { truck_service_value(routes, inst, fleet, c) } else { 0.0 })
                .collect();
            let mut best: Option<Candidate> = None;
            for seq in enumerate_sequences(&pool, max_len) {
                let payload: f64 = seq.iter().map(|&c| inst.weight(c)).sum();
                if payload > fleet.payload(kind) {
                    continue;
                }
                for (tk, route_k) in routes.iter().enumerate() {
                    if route_k.len() <= 2 || (tk != t && !options.flexible_docking) {
                        continue;
                    }
                    let first = if tk == t { p + 1 } else { 1 };
                    for q in first..route_k.len() {
                        let recovery = route_k[q];
                        if launch_used.contains(&(kind, launch, t, tk)) || recovery_used.contains(&(kind, recovery, t, tk)) {
                            continue;
                        }
                        let dist = inst.path_distance(kind, launch, &seq, recovery);
                        if dist > fleet.range(kind) {
                            continue;
                        }
                        let return_time = now + dist / fleet.speed(kind);
                        if return_time > timeline.arrival(tk, q) {
                            continue;
                        }
                        let energy = path_energy(kind, inst, fleet, launch, &seq, recovery);
                        if energy > state.level - ENERGY_MARGIN {
                            continue;
                        }
                        let saved: f64 = seq.iter().map(|&c| truck_value[c]).sum();
                        let spent = fleet.alpha * (fleet.unit_cost(kind) * dist + fleet.fixed_cost(kind));
                        if spent >= saved {
                            continue;
                        }
                        let score = energy / seq.len() as f64;
                        let stranded = seq.iter().filter(|&&c| !inst.reachable(c)).count();
                        let better = match &best {
                            None => true,
                            Some(b) => stranded > b.stranded || (stranded == b.stranded && score < b.score),
                        };
                        if better {
                            best = Some(Candidate { stranded, score, recovery_truck: tk, recovery_pos: q, seq: seq.clone(), energy, return_time });
                        }
                    }
                }
            }
            let Some(c) = best else { continue };
            let recovery = routes[c.recovery_truck][c.recovery_pos];
            launch_used.insert((kind, launch, t, c.recovery_truck));
            recovery_used.insert((kind, recovery, t, c.recovery_truck));
            for cust in &c.seq {
                open.remove(cust);
                state.served.insert(*cust);
            }
            state
                .ledger
                .consume(now, c.energy)
                .expect("energy was checked against the tracked level");
            state.level = state.ledger.level();
            state.trips += 1;
            state.available_from = c.return_time;
            state.location = Location::Aboard { truck: c.recovery_truck, position: c.recovery_pos };
            sorties.push(Sortie {
                vehicle_kind: kind,
                vehicle_id: state.vehicle_id,
                launch_node: launch,
                recovery_node: recovery,
                sequence: c.seq,
                launch_truck: t,
                recovery_truck: c.recovery_truck,
                launch_time: now,
            });
        }
    }
    Assignment { sorties, states, unserved: open.into_iter().collect() }
}

/// Weighted objective of serving `c` by the cheapest truck insertion into
/// `routes`: distance cost plus the added truck travel time.
pub fn truck_service_value(routes: &[Vec<usize>], inst: &Instance, fleet: &FleetSpec, c: usize) -> f64 {
    if !inst.reachable(c) {
        return f64::INFINITY;
    }
    let delta = routes
        .iter()
        .flat_map(|r| r.windows(2).map(|w| insertion_delta(inst, fleet, w[0], c, w[1])))
        .fold(f64::INFINITY, f64::min);
    fleet.alpha * fleet.truck_unit_cost * delta + (1.0 - fleet.alpha) * delta / fleet.truck_speed
}

/// Moves a riding vehicle from route position `from` to `to`, charging on
/// each leg that leaves a customer.
#[allow(clippy::too_many_arguments)]
fn ride(
    state: &mut VehicleState,
    route: &[usize],
    timeline: &Timeline,
    truck: usize,
    from: usize,
    to: usize,
    inst: &Instance,
    fleet: &FleetSpec,
    options: &ModelOptions,
) {
    if !options.charging {
        return;
    }
    let kind = state.vehicle_kind;
    for p in from.max(1)..to {
        let hours = inst.truck_distance(fleet, route[p], route[p + 1]) / fleet.truck_speed;
        let event = ChargingEvent {
            vehicle_kind: kind,
            vehicle_id: state.vehicle_id,
            truck_id: truck,
            node: route[p],
            duration: hours,
            amount: carried_leg_limit(fleet, kind, hours),
        };
        let charged = apply_charging(&state.ledger, &event, fleet.charge_rate(kind), timeline.arrival(truck, p))
            .expect("leg durations are nonnegative");
        state.ledger = charged.ledger;
    }
    state.level = state.ledger.level();
}

/// Up to [`NEAREST_CANDIDATES`] open customers within the vehicle's range of
/// `launch`, nearest first, ties by id.
fn nearby(inst: &Instance, fleet: &FleetSpec, kind: VehicleKind, launch: usize, open: &BTreeSet<usize>) -> Vec<usize> {
    let mut near: Vec<(f64, usize)> = open
        .iter()
        .map(|&c| (inst.leg_distance(kind, launch, c), c))
        .filter(|&(d, _)| d <= fleet.range(kind))
        .collect();
    near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    near.truncate(NEAREST_CANDIDATES);
    let mut ids: Vec<usize> = near.into_iter().map(|(_, c)| c).collect();
    ids.sort_unstable();
    ids
}
