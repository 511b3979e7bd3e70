//! Exhaustive search for the optimum of tiny single-truck instances.
//!
//! Candidates are truck tours (every ordered subset of truck-reachable
//! customers) times non-overlapping sortie chains per drone and robot.
//! Each vehicle charges as much as allowed on every carried leg, which never
//! hurts feasibility, and launch times come from the waiting replay.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{path_energy, ChargingEvent};
use crate::error::{Error, Result};
use crate::finder::carried_leg_limit;
use crate::milp::objective_value;
use crate::model::{enumerate_sequences, FleetSpec, Instance, ModelOptions, Plan, Sortie, VehicleKind, DEPOT};
use crate::validator::{replay_arrivals, validate};

const PRUNE_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_customers: usize,
    /// Upper bound on sortie placements explored.
    pub max_candidates: u64,
    /// Seconds.
    pub time_limit: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { max_customers: 8, max_candidates: 200_000_000, time_limit: 600.0 }
    }
}

impl SearchBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_customers == 0 || self.max_candidates == 0 || !(self.time_limit > 0.0) {
            return Err(Error::Config("search budget fields must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExactOutcome {
    Optimal(Box<Plan>),
    Infeasible,
    BudgetExceeded(String),
}

impl ExactOutcome {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            ExactOutcome::Optimal(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
struct Template {
    kind: VehicleKind,
    seq: Vec<usize>,
    mask: u64,
}

#[derive(Clone, Debug)]
struct Placed {
    vehicle: usize,
    launch_pos: usize,
    template: usize,
    recovery_pos: usize,
}

struct Shared<'a> {
    inst: &'a Instance,
    fleet: &'a FleetSpec,
    options: &'a ModelOptions,
    budget: &'a SearchBudget,
    vehicles: Vec<(VehicleKind, usize)>,
    templates: Vec<Template>,
    all_mask: u64,
    best_bits: AtomicU64,
    explored: AtomicU64,
    stop: AtomicBool,
    started: Instant,
}

impl Shared<'_> {
    fn bound(&self) -> f64 {
        f64::from_bits(self.best_bits.load(Ordering::Relaxed))
    }

    fn offer(&self, obj: f64) {
        // Non-negative floats order like their bit patterns.
        self.best_bits.fetch_min(obj.to_bits(), Ordering::Relaxed);
    }

    fn tick(&self) -> bool {
        if self.stop.load(Ordering::Relaxed) {
            return false;
        }
        let n = self.explored.fetch_add(1, Ordering::Relaxed) + 1;
        if n > self.budget.max_candidates {
            self.stop.store(true, Ordering::Relaxed);
            return false;
        }
        if n % 4096 == 0 && self.started.elapsed() > Duration::from_secs_f64(self.budget.time_limit) {
            self.stop.store(true, Ordering::Relaxed);
            return false;
        }
        true
    }
}

struct RouteSearch<'s, 'a> {
    sh: &'s Shared<'a>,
    route: Vec<usize>,
    legs: Vec<f64>,
    truck_cost: f64,
    truck_time: f64,
    placed: Vec<Placed>,
    best: Option<(f64, String, Plan)>,
}

fn mask_of(seq: &[usize]) -> u64 {
    seq.iter().fold(0, |m, &c| m | 1u64 << c)
}

/// Exhaustive optimum for instances with one truck and at most one drone and
/// one robot.
pub fn solve_exact(inst: &Instance, fleet: &FleetSpec, options: &ModelOptions, budget: &SearchBudget) -> Result<ExactOutcome> {
    budget.validate()?;
    fleet.validate()?;
    let n = inst.num_customers();
    if n > budget.max_customers {
        return Ok(ExactOutcome::BudgetExceeded(format!("{n} customers exceed the limit of {}", budget.max_customers)));
    }
    if n >= 63 {
        return Err(Error::Config("exact search supports at most 62 customers".into()));
    }
    if fleet.num_trucks > 1 || fleet.num_drones > 1 || fleet.num_robots > 1 {
        return Err(Error::Config("exact search handles at most one truck, one drone and one robot".into()));
    }
    if fleet.num_trucks == 0 {
        if n > 0 {
            return Ok(ExactOutcome::Infeasible);
        }
        let mut plan = Plan::default();
        plan.objective_breakdown = objective_value(&plan, inst, fleet);
        return Ok(ExactOutcome::Optimal(Box::new(plan)));
    }

    let max_len = options.max_sequence_len(fleet);
    let mut vehicles = Vec::new();
    let mut templates = Vec::new();
    let customers: Vec<usize> = inst.customer_ids().collect();
    for kind in VehicleKind::ALL {
        for v in 0..fleet.count(kind) {
            vehicles.push((kind, v));
        }
        if fleet.count(kind) > 0 {
            for seq in enumerate_sequences(&customers, max_len) {
                let payload: f64 = seq.iter().map(|&c| inst.weight(c)).sum();
                if payload <= fleet.payload(kind) {
                    templates.push(Template { kind, mask: mask_of(&seq), seq });
                }
            }
        }
    }
    let sh = Shared {
        inst,
        fleet,
        options,
        budget,
        vehicles,
        templates,
        all_mask: mask_of(&customers),
        best_bits: AtomicU64::new(f64::INFINITY.to_bits()),
        explored: AtomicU64::new(0),
        stop: AtomicBool::new(false),
        started: Instant::now(),
    };

    let reachable: Vec<usize> = customers.iter().copied().filter(|&c| inst.reachable(c)).collect();
    let tours: Vec<Vec<usize>> = if n == 0 { vec![Vec::new()] } else { enumerate_sequences(&reachable, reachable.len()) };

    let best = tours
        .par_iter()
        .filter_map(|tour| {
            let mut route = Vec::with_capacity(tour.len() + 2);
            route.push(DEPOT);
            route.extend_from_slice(tour);
            route.push(DEPOT);
            let legs: Vec<f64> = route.windows(2).map(|w| inst.truck_distance(fleet, w[0], w[1])).collect();
            let length: f64 = legs.iter().sum();
            let fixed = if tour.is_empty() { 0.0 } else { fleet.truck_fixed_cost };
            let mut rs = RouteSearch {
                sh: &sh,
                legs: legs.iter().map(|d| d / fleet.truck_speed).collect(),
                truck_cost: fleet.truck_unit_cost * length + fixed,
                truck_time: length / fleet.truck_speed,
                route,
                placed: Vec::new(),
                best: None,
            };
            rs.run(mask_of(tour));
            rs.best
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    if sh.stop.load(Ordering::Relaxed) {
        let reason = if sh.explored.load(Ordering::Relaxed) > budget.max_candidates {
            format!("more than {} candidates", budget.max_candidates)
        } else {
            format!("time limit of {} s", budget.time_limit)
        };
        return Ok(ExactOutcome::BudgetExceeded(reason));
    }
    match best {
        None => Ok(ExactOutcome::Infeasible),
        Some((_, _, mut plan)) => {
            let report = validate(&plan, inst, fleet, options)?;
            if !report.feasible {
                return Err(Error::Domain(format!("exact search produced an infeasible plan: {:?}", report.violations)));
            }
            plan.ledgers = report.battery_ledgers;
            Ok(ExactOutcome::Optimal(Box::new(plan)))
        }
    }
}

impl RouteSearch<'_, '_> {
    fn run(&mut self, route_mask: u64) {
        let sh = self.sh;
        let alpha = sh.fleet.alpha;
        if alpha * self.truck_cost + (1.0 - alpha) * self.truck_time > sh.bound() + PRUNE_SLACK {
            return;
        }
        if self.route.len() == 2 && sh.all_mask != 0 {
            // An idle truck cannot host sorties.
            return;
        }
        let durations = vec![0.0; sh.vehicles.len()];
        self.chain(0, 0, sh.fleet.battery(sh.vehicles.first().map_or(VehicleKind::Drone, |v| v.0)), 0, route_mask, self.truck_cost, &durations);
    }

    fn lower_bound(&self, cost: f64, durations: &[f64]) -> f64 {
        let alpha = self.sh.fleet.alpha;
        let span = durations.iter().fold(self.truck_time, |a, &b| a.max(b));
        alpha * cost + (1.0 - alpha) * span
    }

    /// Charge gained on the carried leg leaving route position `p`.
    fn leg_charge(&self, kind: VehicleKind, p: usize, level: f64) -> f64 {
        let sh = self.sh;
        if !sh.options.charging || p == 0 || p + 1 >= self.route.len() {
            return 0.0;
        }
        let cap = sh.fleet.battery(kind);
        carried_leg_limit(sh.fleet, kind, self.legs[p]).min(cap - level).max(0.0)
    }

    #[allow(clippy::too_many_arguments)]
    fn chain(&mut self, vi: usize, pos: usize, level: f64, trips: usize, served: u64, cost: f64, durations: &[f64]) {
        let sh = self.sh;
        if !sh.tick() {
            return;
        }
        if self.lower_bound(cost, durations) > sh.bound() + PRUNE_SLACK {
            return;
        }
        if vi == sh.vehicles.len() {
            if served == sh.all_mask {
                self.leaf();
            }
            return;
        }
        // Close this vehicle's chain.
        let next_cap = sh.vehicles.get(vi + 1).map_or(0.0, |v| sh.fleet.battery(v.0));
        self.chain(vi + 1, 0, next_cap, 0, served, cost, durations);
        if served == sh.all_mask || (sh.options.single_trip && trips >= 1) {
            return;
        }

        let (kind, _) = sh.vehicles[vi];
        let last = self.route.len() - 1;
        let mut lvl = level;
        for lp in pos..last {
            if lp > pos {
                lvl += self.leg_charge(kind, lp - 1, lvl);
            }
            let launch = self.route[lp];
            for ti in 0..sh.templates.len() {
                let t = &sh.templates[ti];
                if t.kind != kind || t.mask & served != 0 {
                    continue;
                }
                for rp in lp + 1..=last {
                    let recovery = self.route[rp];
                    let dist = sh.inst.path_distance(kind, launch, &t.seq, recovery);
                    if dist > sh.fleet.range(kind) {
                        continue;
                    }
                    let energy = path_energy(kind, sh.inst, sh.fleet, launch, &t.seq, recovery);
                    if energy > lvl {
                        continue;
                    }
                    let add_cost = sh.fleet.unit_cost(kind) * dist + sh.fleet.fixed_cost(kind);
                    let mut d = durations.to_vec();
                    d[vi] += dist / sh.fleet.speed(kind);
                    self.placed.push(Placed { vehicle: vi, launch_pos: lp, template: ti, recovery_pos: rp });
                    self.chain(vi, rp, lvl - energy, trips + 1, served | t.mask, cost + add_cost, &d);
                    self.placed.pop();
                }
            }
        }
    }

    fn leaf(&mut self) {
        let plan = self.build_plan();
        let obj = plan.objective_breakdown.weighted_objective;
        if let Some((b, _, _)) = &self.best {
            if obj > *b {
                return;
            }
        }
        let enc = encode(&plan);
        let better = match &self.best {
            None => true,
            Some((b, e, _)) => obj < *b || (obj == *b && enc < *e),
        };
        if better {
            self.sh.offer(obj);
            self.best = Some((obj, enc, plan));
        }
    }

    fn build_plan(&self) -> Plan {
        let sh = self.sh;
        let route = &self.route;
        let mut sorties: Vec<Sortie> = self
            .placed
            .iter()
            .map(|p| {
                let (kind, v) = sh.vehicles[p.vehicle];
                Sortie {
                    vehicle_kind: kind,
                    vehicle_id: v,
                    launch_node: route[p.launch_pos],
                    recovery_node: route[p.recovery_pos],
                    sequence: sh.templates[p.template].seq.clone(),
                    launch_truck: 0,
                    recovery_truck: 0,
                    launch_time: 0.0,
                }
            })
            .collect();
        let routes = vec![route.clone()];
        let arrivals = replay_arrivals(&routes, &sorties, sh.inst, sh.fleet).expect("single-truck sortie waits are acyclic");
        for (s, p) in sorties.iter_mut().zip(&self.placed) {
            s.launch_time = arrivals[0][p.launch_pos];
        }

        // Greedy charging along each vehicle's carried legs.
        let mut events = Vec::new();
        for (vi, &(kind, v)) in sh.vehicles.iter().enumerate() {
            let rate = sh.fleet.charge_rate(kind);
            let mut level = sh.fleet.battery(kind);
            let mut from = 0;
            let chain: Vec<&Placed> = self.placed.iter().filter(|p| p.vehicle == vi).collect();
            let carry = |from: usize, to: usize, level: &mut f64, events: &mut Vec<ChargingEvent>| {
                for p in from..to {
                    let add = self.leg_charge(kind, p, *level);
                    if add > 0.0 {
                        *level += add;
                        events.push(ChargingEvent {
                            vehicle_kind: kind,
                            vehicle_id: v,
                            truck_id: 0,
                            node: route[p],
                            duration: add / rate,
                            amount: add,
                        });
                    }
                }
            };
            for p in &chain {
                carry(from, p.launch_pos, &mut level, &mut events);
                let t = &sh.templates[p.template];
                level -= path_energy(kind, sh.inst, sh.fleet, route[p.launch_pos], &t.seq, route[p.recovery_pos]);
                from = p.recovery_pos;
            }
            carry(from, route.len() - 1, &mut level, &mut events);
        }

        let mut plan = Plan {
            truck_routes: routes,
            sorties,
            truck_arrivals: arrivals,
            charging_events: events,
            ..Plan::default()
        };
        plan.objective_breakdown = objective_value(&plan, sh.inst, sh.fleet);
        plan
    }
}

/// Canonical text form of a plan's combinatorial choices, used to break ties.
pub fn encode(plan: &Plan) -> String {
    let mut out = String::new();
    for r in &plan.truck_routes {
        out.push_str(&format!("{r:?}"));
    }
    for s in &plan.sorties {
        out.push_str(&format!(
            "|{}{}:{}>{:?}>{}:{}>{}",
            s.vehicle_kind, s.vehicle_id, s.launch_node, s.sequence, s.recovery_node, s.launch_truck, s.recovery_truck
        ));
    }
    out
}
