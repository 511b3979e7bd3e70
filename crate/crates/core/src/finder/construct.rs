use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{euclidean_distance, FleetSpec, Instance, DEPOT};

/// Per-truck list of (node, arrival hour) aligned with route positions.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub trucks: Vec<Vec<(usize, f64)>>,
}

impl Timeline {
    pub fn arrivals(&self) -> Vec<Vec<f64>> {
        self.trucks.iter().map(|t| t.iter().map(|&(_, a)| a).collect()).collect()
    }

    pub fn arrival(&self, truck: usize, position: usize) -> f64 {
        self.trucks[truck][position].1
    }
}

/// Customers each truck takes in the construction phase.
pub fn route_size_cap(num_customers: usize, num_trucks: usize) -> usize {
    (num_customers / (2 * num_trucks)).max(3)
}

/// Nearest-neighbour routes, one truck after another, each capped at
/// [`route_size_cap`] customers. Truck-unreachable customers are skipped and
/// whatever is left stays unassigned.
pub fn construct_truck_routes(inst: &Instance, fleet: &FleetSpec) -> Result<Vec<Vec<usize>>> {
    let n = inst.num_customers();
    if fleet.num_trucks == 0 {
        if n > 0 {
            return Err(Error::Config("customers cannot be served without a truck".into()));
        }
        return Ok(Vec::new());
    }
    let cap = route_size_cap(n, fleet.num_trucks);
    let mut taken = vec![false; n + 1];
    let mut routes = Vec::with_capacity(fleet.num_trucks);
    for _ in 0..fleet.num_trucks {
        let mut route = vec![DEPOT];
        let mut last = DEPOT;
        while route.len() - 1 < cap {
            let here = inst.point(last);
            let mut best: Option<(f64, usize)> = None;
            for c in inst.customer_ids() {
                if taken[c] || !inst.reachable(c) {
                    continue;
                }
                let d = euclidean_distance(here, inst.point(c));
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, c));
                }
            }
            let Some((_, c)) = best else { break };
            taken[c] = true;
            route.push(c);
            last = c;
        }
        route.push(DEPOT);
        routes.push(route);
    }
    Ok(routes)
}

pub fn build_timeline(routes: &[Vec<usize>], inst: &Instance, fleet: &FleetSpec) -> Timeline {
    let trucks = routes
        .iter()
        .map(|route| {
            let mut t = 0.0;
            let mut out = Vec::with_capacity(route.len());
            for (p, &v) in route.iter().enumerate() {
                if p > 0 {
                    t += inst.truck_distance(fleet, route[p - 1], v) / fleet.truck_speed;
                }
                out.push((v, t));
            }
            out
        })
        .collect();
    Timeline { trucks }
}

/// Extra truck distance from putting `c` between `a` and `b`.
pub fn insertion_delta(inst: &Instance, fleet: &FleetSpec, a: usize, c: usize, b: usize) -> f64 {
    inst.truck_distance(fleet, a, c) + inst.truck_distance(fleet, c, b) - inst.truck_distance(fleet, a, b)
}

/// Cheapest insertion of each leftover customer, in the given order. Equal
/// costs go to the lower (truck, position). Customers a truck cannot reach
/// are reported together as unservable.
pub fn insert_unserved(routes: &mut [Vec<usize>], unserved: &[usize], inst: &Instance, fleet: &FleetSpec) -> Result<()> {
    let blocked: Vec<usize> = unserved.iter().copied().filter(|&c| !inst.reachable(c)).collect();
    if !blocked.is_empty() {
        return Err(Error::Unservable(blocked));
    }
    if routes.is_empty() && !unserved.is_empty() {
        return Err(Error::Config("customers cannot be served without a truck".into()));
    }
    for &c in unserved {
        let mut best: Option<(f64, usize, usize)> = None;
        for (t, route) in routes.iter().enumerate() {
            for p in 1..route.len() {
                let d = insertion_delta(inst, fleet, route[p - 1], c, route[p]);
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, t, p));
                }
            }
        }
        let (_, t, p) = best.expect("routes are depot-closed");
        routes[t].insert(p, c);
    }
    Ok(())
}
