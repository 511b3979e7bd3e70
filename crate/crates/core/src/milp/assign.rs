use std::collections::HashMap;

use super::build::{
    aboard_name, arrival_name, carrier_name, charge_name, charge_time_name, eprime_name, launch_time_name,
    level_name, onboard_arrival_name, sortie_suffix, sortie_var_name, u_name, vtag, x_name, Stop, GAMMA,
};
use super::{objective_value, MilpModel};
use crate::energy::path_energy;
use crate::error::{Error, Result};
use crate::model::{launch_position, recovery_position, FleetSpec, Instance, Plan, Sortie, VehicleKind};

fn stop_of(route: &[usize], p: usize) -> Stop {
    if p == 0 {
        Stop::Start
    } else if p + 1 == route.len() {
        Stop::End
    } else {
        Stop::Cust(route[p])
    }
}

struct Values<'a> {
    model: &'a MilpModel,
    values: Vec<f64>,
}

impl Values<'_> {
    fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let id = self
            .model
            .var(name)
            .ok_or_else(|| Error::MalformedPlan(format!("plan needs variable {name}, which the model does not have")))?;
        self.values[id.0] = value;
        Ok(())
    }

    fn add(&mut self, name: &str, value: f64) -> Result<()> {
        let id = self
            .model
            .var(name)
            .ok_or_else(|| Error::MalformedPlan(format!("plan needs variable {name}, which the model does not have")))?;
        self.values[id.0] += value;
        Ok(())
    }

    fn set_if_present(&mut self, name: &str, value: f64) {
        if let Some(id) = self.model.var(name) {
            self.values[id.0] = value;
        }
    }
}

/// Maps a plan onto the model's variables. The plan is expected to be
/// structurally valid; a sortie the model cannot represent is an error.
pub fn induced_assignment(
    model: &MilpModel,
    plan: &Plan,
    inst: &Instance,
    fleet: &FleetSpec,
) -> Result<Vec<f64>> {
    let n = inst.num_customers();
    let nt = fleet.num_trucks;
    if plan.truck_routes.len() != nt {
        return Err(Error::MalformedPlan("route count differs from truck count".into()));
    }
    let mut vals = Values { model, values: vec![0.0; model.variables.len()] };
    let cap_of = |kind: VehicleKind| fleet.battery(kind);

    // Defaults for variables that a plan leaves free.
    for j in 1..=n {
        vals.set_if_present(&u_name(j), 1.0);
    }
    for kind in VehicleKind::ALL {
        for v in 0..fleet.count(kind) {
            let tag = vtag(kind, v);
            for t in 0..nt {
                for idx in 0..n + 2 {
                    let s = super::build::stop_at(idx, n);
                    vals.set_if_present(&level_name(&tag, t, s), cap_of(kind));
                }
            }
        }
    }

    for (t, route) in plan.truck_routes.iter().enumerate() {
        let arrivals = &plan.truck_arrivals[t];
        for p in 0..route.len() {
            let s = stop_of(route, p);
            vals.set(&arrival_name(t, s), arrivals[p])?;
            if let Stop::Cust(j) = s {
                vals.set(&u_name(j), p as f64)?;
            }
        }
        if route.len() > 2 {
            for p in 0..route.len() - 1 {
                vals.set(&x_name(t, stop_of(route, p), stop_of(route, p + 1)), 1.0)?;
                let s = stop_of(route, p);
                if let Stop::Cust(_) = s {
                    let tau = inst.truck_distance(fleet, route[p], route[p + 1]) / fleet.truck_speed;
                    vals.set_if_present(&charge_time_name(t, s), tau);
                }
            }
        }
    }

    vals.set(GAMMA, objective_value(plan, inst, fleet).makespan)?;

    let pos = |s: &Sortie| -> Result<(usize, usize)> {
        let lp = launch_position(&plan.truck_routes[s.launch_truck], s.launch_node);
        let rp = recovery_position(&plan.truck_routes[s.recovery_truck], s.recovery_node);
        match (lp, rp) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::MalformedPlan("sortie endpoint is not on its truck route".into())),
        }
    };

    let energy = |s: &Sortie| path_energy(s.vehicle_kind, inst, fleet, s.launch_node, &s.sequence, s.recovery_node);

    for s in &plan.sorties {
        let (lp, rp) = pos(s)?;
        let launch = stop_of(&plan.truck_routes[s.launch_truck], lp);
        let rec = stop_of(&plan.truck_routes[s.recovery_truck], rp);
        let suffix = sortie_suffix(s.vehicle_kind, s.vehicle_id, s.launch_truck, s.recovery_truck, launch, &s.sequence, rec);
        vals.set(&sortie_var_name(s.vehicle_kind, &suffix), 1.0)?;
        vals.set(&launch_time_name(&suffix), s.launch_time)?;
        if s.vehicle_kind == VehicleKind::Robot {
            vals.set(&eprime_name(&suffix), energy(s))?;
        }
    }

    // Charge amounts per (vehicle, truck, position).
    let mut charges: HashMap<(VehicleKind, usize, usize, usize), f64> = HashMap::new();
    for e in &plan.charging_events {
        let route = &plan.truck_routes[e.truck_id];
        let p = launch_position(route, e.node)
            .ok_or_else(|| Error::MalformedPlan(format!("charging node {} is not on truck {}", e.node, e.truck_id)))?;
        let s = stop_of(route, p);
        let tag = vtag(e.vehicle_kind, e.vehicle_id);
        vals.add(&charge_name(&tag, e.truck_id, s), e.amount)?;
        *charges.entry((e.vehicle_kind, e.vehicle_id, e.truck_id, p)).or_default() += e.amount;
    }

    for kind in VehicleKind::ALL {
        for v in 0..fleet.count(kind) {
            let tag = vtag(kind, v);
            let mut chain: Vec<(&Sortie, usize, usize)> = Vec::new();
            for s in plan.sorties.iter().filter(|s| s.vehicle_kind == kind && s.vehicle_id == v) {
                let (lp, rp) = pos(s)?;
                chain.push((s, lp, rp));
            }
            chain.sort_by(|a, b| a.0.launch_time.total_cmp(&b.0.launch_time).then(a.1.cmp(&b.1)));
            let carrier = chain.first().map(|c| c.0.launch_truck).unwrap_or(0);
            if nt > 0 {
                vals.set(&carrier_name(&tag, carrier), 1.0)?;
            }

            // Aboard state along each truck route.
            for (t, route) in plan.truck_routes.iter().enumerate() {
                let launches_at = |p: usize| chain.iter().filter(|c| c.0.launch_truck == t && c.1 == p).count() as f64;
                let recoveries_at = |p: usize| chain.iter().filter(|c| c.0.recovery_truck == t && c.2 == p).count() as f64;
                let b = if t == carrier { 1.0 } else { 0.0 };
                let mut aboard = b - launches_at(0);
                vals.set(&aboard_name(&tag, t, Stop::Start), aboard)?;
                for p in 1..route.len() {
                    let s = stop_of(route, p);
                    let h = aboard + recoveries_at(p);
                    vals.set(&onboard_arrival_name(&tag, t, s), h)?;
                    if s != Stop::End {
                        aboard = h - launches_at(p);
                        vals.set(&aboard_name(&tag, t, s), aboard)?;
                    }
                }
            }

            // Battery level along the vehicle's carried segments.
            let cap = cap_of(kind);
            let charge_at = |t: usize, p: usize| charges.get(&(kind, v, t, p)).copied().unwrap_or(0.0);
            let mut truck = carrier;
            let mut from = 0;
            let mut level = cap;
            let walk = |vals: &mut Values, t: usize, from: usize, to: usize, level: &mut f64| -> Result<()> {
                let route = &plan.truck_routes[t];
                for p in from..=to {
                    vals.set(&level_name(&tag, t, stop_of(route, p)), *level)?;
                    if p < to {
                        *level += charge_at(t, p);
                    }
                }
                Ok(())
            };
            for (s, lp, rp) in &chain {
                if nt > 0 && s.launch_truck == truck && *lp >= from {
                    walk(&mut vals, truck, from, *lp, &mut level)?;
                }
                level -= energy(s);
                truck = s.recovery_truck;
                from = *rp;
            }
            if nt > 0 {
                let last = plan.truck_routes[truck].len() - 1;
                walk(&mut vals, truck, from, last, &mut level)?;
            }
        }
    }

    Ok(vals.values)
}
