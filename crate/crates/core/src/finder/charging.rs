use crate::energy::{apply_charging, path_energy, BatteryLedger, ChargingEvent};
use crate::model::{launch_position, recovery_position, FleetSpec, Instance, ModelOptions, Sortie, VehicleKind};

use super::construct::Timeline;

/// Most energy a vehicle can take on while riding a leg of `hours`. Matches
/// the model's rate and presence rows.
pub fn carried_leg_limit(fleet: &FleetSpec, kind: VehicleKind, hours: f64) -> f64 {
    fleet.charge_rate(kind) * hours.min(2.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChargeReplay {
    pub events: Vec<ChargingEvent>,
    pub ledgers: Vec<BatteryLedger>,
    /// Sorties whose vehicle lacks the energy, or is not aboard the
    /// launching truck, when they launch.
    pub failed: Vec<usize>,
}

/// Replays every vehicle's battery along its carried legs, charging as much
/// as allowed on each leg that leaves a customer. Sorties of one vehicle run
/// in launch-time order.
pub fn apply_enroute_charging(
    routes: &[Vec<usize>],
    timeline: &Timeline,
    sorties: &[Sortie],
    inst: &Instance,
    fleet: &FleetSpec,
    options: &ModelOptions,
) -> ChargeReplay {
    let mut out = ChargeReplay { events: Vec::new(), ledgers: Vec::new(), failed: Vec::new() };
    for kind in VehicleKind::ALL {
        for v in 0..fleet.count(kind) {
            let mut chain: Vec<(usize, usize, usize)> = Vec::new();
            for (i, s) in sorties.iter().enumerate().filter(|(_, s)| s.vehicle_kind == kind && s.vehicle_id == v) {
                match (
                    launch_position(&routes[s.launch_truck], s.launch_node),
                    recovery_position(&routes[s.recovery_truck], s.recovery_node),
                ) {
                    (Some(lp), Some(rp)) => chain.push((i, lp, rp)),
                    _ => out.failed.push(i),
                }
            }
            chain.sort_by(|a, b| sorties[a.0].launch_time.total_cmp(&sorties[b.0].launch_time).then(a.1.cmp(&b.1)));
            let mut ledger = BatteryLedger::new(kind, v, fleet.battery(kind));
            let mut truck = chain.first().map_or(v % routes.len().max(1), |c| sorties[c.0].launch_truck);
            let mut from = 0;
            for &(i, lp, rp) in &chain {
                let s = &sorties[i];
                if s.launch_truck != truck || lp < from {
                    out.failed.push(i);
                    continue;
                }
                carry(&mut out.events, &mut ledger, routes, timeline, inst, fleet, options, truck, from, lp);
                let energy = path_energy(kind, inst, fleet, s.launch_node, &s.sequence, s.recovery_node);
                if ledger.consume(s.launch_time, energy).is_err() {
                    out.failed.push(i);
                    continue;
                }
                truck = s.recovery_truck;
                from = rp;
            }
            if let Some(route) = routes.get(truck) {
                carry(&mut out.events, &mut ledger, routes, timeline, inst, fleet, options, truck, from, route.len() - 1);
            }
            out.ledgers.push(ledger);
        }
    }
    out.failed.sort_unstable();
    out
}

#[allow(clippy::too_many_arguments)]
fn carry(
    events: &mut Vec<ChargingEvent>,
    ledger: &mut BatteryLedger,
    routes: &[Vec<usize>],
    timeline: &Timeline,
    inst: &Instance,
    fleet: &FleetSpec,
    options: &ModelOptions,
    truck: usize,
    from: usize,
    to: usize,
) {
    if !options.charging {
        return;
    }
    let route = &routes[truck];
    let kind = ledger.vehicle_kind;
    for p in from.max(1)..to {
        let hours = inst.truck_distance(fleet, route[p], route[p + 1]) / fleet.truck_speed;
        let event = ChargingEvent {
            vehicle_kind: kind,
            vehicle_id: ledger.vehicle_id,
            truck_id: truck,
            node: route[p],
            duration: hours,
            amount: carried_leg_limit(fleet, kind, hours),
        };
        let charged = apply_charging(ledger, &event, fleet.charge_rate(kind), timeline.arrival(truck, p))
            .expect("leg durations are nonnegative");
        if charged.added > 0.0 {
            events.push(ChargingEvent { amount: charged.added, ..event });
            *ledger = charged.ledger;
        }
    }
}

/// Energy level a vehicle would have after riding from `from` to `to` on one
/// truck, starting at `level`.
#[allow(clippy::too_many_arguments)]
pub fn level_after_ride(
    route: &[usize],
    inst: &Instance,
    fleet: &FleetSpec,
    options: &ModelOptions,
    kind: VehicleKind,
    from: usize,
    to: usize,
    level: f64,
) -> f64 {
    if !options.charging {
        return level;
    }
    let cap = fleet.battery(kind);
    let mut level = level;
    for p in from.max(1)..to {
        let hours = inst.truck_distance(fleet, route[p], route[p + 1]) / fleet.truck_speed;
        level += carried_leg_limit(fleet, kind, hours).min((cap - level).max(0.0));
    }
    level
}
