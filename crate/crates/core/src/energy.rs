//! Load-dependent sortie energy for drones and robots, and per-vehicle battery ledgers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FleetSpec, Instance, Sortie, VehicleKind};

/// Sum over legs of `f(payload carried on the leg) * leg length`, where the
/// payload starts at the full sequence weight and drops after each delivery.
fn payload_weighted_sum(
    inst: &Instance,
    kind: VehicleKind,
    launch: usize,
    sequence: &[usize],
    recovery: usize,
    mut per_km: impl FnMut(f64) -> f64,
) -> f64 {
    let mut remaining: f64 = sequence.iter().map(|&c| inst.weight(c)).sum();
    let mut prev = launch;
    let mut total = 0.0;
    for &c in sequence {
        total += per_km(remaining) * inst.leg_distance(kind, prev, c);
        remaining -= inst.weight(c);
        prev = c;
    }
    total + per_km(0.0) * inst.leg_distance(kind, prev, recovery)
}

/// Drone energy for a path, in battery units. Euclidean legs.
pub fn drone_energy(inst: &Instance, fleet: &FleetSpec, launch: usize, sequence: &[usize], recovery: usize) -> f64 {
    let w = fleet.drone_weight;
    fleet.drone_energy_coeff
        * payload_weighted_sum(inst, VehicleKind::Drone, launch, sequence, recovery, |p| w + p)
}

/// Robot energy for a path, in battery units. Manhattan legs.
/// Assumes a positive robot speed (checked by `FleetSpec::validate`).
pub fn robot_energy(inst: &Instance, fleet: &FleetSpec, launch: usize, sequence: &[usize], recovery: usize) -> f64 {
    let hours_per_km = 1.0 / fleet.robot_speed;
    let wh = payload_weighted_sum(inst, VehicleKind::Robot, launch, sequence, recovery, |p| {
        robot_power_unchecked(p, fleet) * hours_per_km
    });
    wh * fleet.robot_energy_scale
}

pub fn path_energy(
    kind: VehicleKind,
    inst: &Instance,
    fleet: &FleetSpec,
    launch: usize,
    sequence: &[usize],
    recovery: usize,
) -> f64 {
    match kind {
        VehicleKind::Drone => drone_energy(inst, fleet, launch, sequence, recovery),
        VehicleKind::Robot => robot_energy(inst, fleet, launch, sequence, recovery),
    }
}

fn check_nodes(s: &Sortie, inst: &Instance) -> Result<()> {
    for id in [s.launch_node, s.recovery_node].iter().chain(s.sequence.iter()) {
        inst.node(*id)?;
    }
    Ok(())
}

pub fn drone_sortie_energy(s: &Sortie, inst: &Instance, fleet: &FleetSpec) -> Result<f64> {
    if s.vehicle_kind != VehicleKind::Drone {
        return Err(Error::KindMismatch { expected: VehicleKind::Drone, found: s.vehicle_kind });
    }
    check_nodes(s, inst)?;
    Ok(drone_energy(inst, fleet, s.launch_node, &s.sequence, s.recovery_node))
}

pub fn robot_sortie_energy(s: &Sortie, inst: &Instance, fleet: &FleetSpec) -> Result<f64> {
    if s.vehicle_kind != VehicleKind::Robot {
        return Err(Error::KindMismatch { expected: VehicleKind::Robot, found: s.vehicle_kind });
    }
    if fleet.robot_speed <= 0.0 {
        return Err(Error::SingularGait);
    }
    check_nodes(s, inst)?;
    Ok(robot_energy(inst, fleet, s.launch_node, &s.sequence, s.recovery_node))
}

pub fn sortie_energy(s: &Sortie, inst: &Instance, fleet: &FleetSpec) -> Result<f64> {
    match s.vehicle_kind {
        VehicleKind::Drone => drone_sortie_energy(s, inst, fleet),
        VehicleKind::Robot => robot_sortie_energy(s, inst, fleet),
    }
}

fn robot_power_unchecked(payload: f64, fleet: &FleetSpec) -> f64 {
    let v = fleet.robot_speed / 3.6;
    let gait = 1.0 + fleet.g / (2.0 * fleet.l_leg * v * v);
    let mechanical = fleet.k1 * (fleet.robot_weight + payload) * fleet.g * v * gait;
    (1.0 + fleet.k2) * mechanical
}

/// Electrical power draw in watts of a walking robot carrying `payload` kg.
pub fn robot_power(payload: f64, fleet: &FleetSpec) -> Result<f64> {
    if fleet.robot_speed <= 0.0 || fleet.l_leg <= 0.0 {
        return Err(Error::SingularGait);
    }
    if !(payload >= 0.0) {
        return Err(Error::Domain(format!("payload must be nonnegative, got {payload}")));
    }
    Ok(robot_power_unchecked(payload, fleet))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargingEvent {
    pub vehicle_kind: VehicleKind,
    pub vehicle_id: usize,
    pub truck_id: usize,
    /// Node where the carrying leg starts.
    pub node: usize,
    pub duration: f64,
    pub amount: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryCause {
    Sortie,
    Charge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerEntry {
    pub time: f64,
    pub delta: f64,
    pub cause: EntryCause,
}

/// Battery history of one vehicle. The level starts at `capacity`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryLedger {
    pub vehicle_kind: VehicleKind,
    pub vehicle_id: usize,
    pub capacity: f64,
    pub entries: Vec<LedgerEntry>,
}

impl BatteryLedger {
    pub fn new(vehicle_kind: VehicleKind, vehicle_id: usize, capacity: f64) -> Self {
        BatteryLedger { vehicle_kind, vehicle_id, capacity, entries: Vec::new() }
    }

    pub fn level(&self) -> f64 {
        self.capacity + self.entries.iter().map(|e| e.delta).sum::<f64>()
    }

    /// Running levels after each entry.
    pub fn levels(&self) -> Vec<f64> {
        let mut level = self.capacity;
        self.entries
            .iter()
            .map(|e| {
                level += e.delta;
                level
            })
            .collect()
    }

    /// Deducts a sortie's energy, refusing if the battery would go below zero.
    pub fn consume(&mut self, time: f64, amount: f64) -> Result<()> {
        if !(amount >= 0.0) {
            return Err(Error::Domain(format!("consumption must be nonnegative, got {amount}")));
        }
        let available = self.level();
        if amount > available {
            return Err(Error::InsufficientEnergy { required: amount, available });
        }
        self.entries.push(LedgerEntry { time, delta: -amount, cause: EntryCause::Sortie });
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Charged {
    pub ledger: BatteryLedger,
    /// Energy actually added.
    pub added: f64,
    /// Requested energy that was not added (rate cap plus capacity cap).
    pub clamped: f64,
}

/// Adds a charge of at most `min(event.amount, rate * event.duration)`, further
/// clamped so the level never exceeds capacity.
pub fn apply_charging(ledger: &BatteryLedger, event: &ChargingEvent, rate: f64, time: f64) -> Result<Charged> {
    if !event.duration.is_finite() || event.duration < 0.0 {
        return Err(Error::InvalidEvent(format!("duration {} is negative or not finite", event.duration)));
    }
    if !event.amount.is_finite() || event.amount < 0.0 {
        return Err(Error::InvalidEvent(format!("amount {} is negative or not finite", event.amount)));
    }
    let allowed = event.amount.min(rate * event.duration);
    let headroom = (ledger.capacity - ledger.level()).max(0.0);
    let added = allowed.min(headroom);
    let mut out = ledger.clone();
    if added > 0.0 {
        out.entries.push(LedgerEntry { time, delta: added, cause: EntryCause::Charge });
    }
    Ok(Charged { ledger: out, added, clamped: event.amount - added })
}
