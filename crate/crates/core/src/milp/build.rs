use std::collections::BTreeMap;

use super::groups as g;
use super::{MilpModel, Sense, VarId, VarKind};
use crate::energy::path_energy;
use crate::error::{Error, Result};
use crate::model::{enumerate_sequences, manhattan_distance, FleetSpec, Instance, ModelOptions, VehicleKind, DEPOT};

/// A truck stop. The depot appears twice per truck: once as the route start
/// and once as the route end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Stop {
    Start,
    Cust(usize),
    End,
}

impl Stop {
    pub(crate) fn node(self) -> usize {
        match self {
            Stop::Start | Stop::End => DEPOT,
            Stop::Cust(j) => j,
        }
    }

    pub(crate) fn label(self) -> String {
        match self {
            Stop::Start => "0".to_string(),
            Stop::Cust(j) => j.to_string(),
            Stop::End => "f".to_string(),
        }
    }

    pub(crate) fn index(self, n: usize) -> usize {
        match self {
            Stop::Start => 0,
            Stop::Cust(j) => j,
            Stop::End => n + 1,
        }
    }
}

pub(crate) fn vtag(kind: VehicleKind, v: usize) -> String {
    match kind {
        VehicleKind::Drone => format!("d{v}"),
        VehicleKind::Robot => format!("r{v}"),
    }
}

pub(crate) fn x_name(t: usize, i: Stop, j: Stop) -> String {
    format!("x_t{t}_{}_{}", i.label(), j.label())
}

pub(crate) fn u_name(j: usize) -> String {
    format!("u_{j}")
}

pub(crate) fn arrival_name(t: usize, s: Stop) -> String {
    format!("A_t{t}_{}", s.label())
}

pub(crate) const GAMMA: &str = "G";

pub(crate) fn sortie_suffix(kind: VehicleKind, v: usize, ti: usize, tk: usize, launch: Stop, seq: &[usize], rec: Stop) -> String {
    let seq: Vec<String> = seq.iter().map(|c| c.to_string()).collect();
    format!("{}_t{ti}_t{tk}_{}_{}_{}", vtag(kind, v), launch.label(), seq.join("."), rec.label())
}

pub(crate) fn sortie_var_name(kind: VehicleKind, suffix: &str) -> String {
    match kind {
        VehicleKind::Drone => format!("y_{suffix}"),
        VehicleKind::Robot => format!("z_{suffix}"),
    }
}

pub(crate) fn launch_time_name(suffix: &str) -> String {
    format!("L_{suffix}")
}

pub(crate) fn eprime_name(suffix: &str) -> String {
    format!("q_{suffix}")
}

pub(crate) fn carrier_name(tag: &str, t: usize) -> String {
    format!("b_{tag}_t{t}")
}

pub(crate) fn onboard_arrival_name(tag: &str, t: usize, s: Stop) -> String {
    format!("h_{tag}_t{t}_{}", s.label())
}

pub(crate) fn aboard_name(tag: &str, t: usize, s: Stop) -> String {
    format!("a_{tag}_t{t}_{}", s.label())
}

pub(crate) fn level_name(tag: &str, t: usize, s: Stop) -> String {
    format!("lv_{tag}_t{t}_{}", s.label())
}

pub(crate) fn charge_name(tag: &str, t: usize, s: Stop) -> String {
    format!("c_{tag}_t{t}_{}", s.label())
}

pub(crate) fn charge_time_name(t: usize, s: Stop) -> String {
    format!("ct_t{t}_{}", s.label())
}

/// One (launch, sequence, recovery) triple with its precomputed geometry.
#[derive(Clone, Debug)]
pub(crate) struct Template {
    pub launch: Stop,
    pub seq: Vec<usize>,
    pub rec: Stop,
    pub dist: f64,
    pub weight: f64,
    pub energy: f64,
    pub duration: f64,
}

pub(crate) fn templates(inst: &Instance, fleet: &FleetSpec, kind: VehicleKind, max_len: usize) -> Vec<Template> {
    let n = inst.num_customers();
    let mut out = Vec::new();
    let launches = std::iter::once(Stop::Start).chain((1..=n).map(Stop::Cust));
    for launch in launches {
        let pool: Vec<usize> = (1..=n).filter(|&c| Stop::Cust(c) != launch).collect();
        for seq in enumerate_sequences(&pool, max_len) {
            let recs = (1..=n).map(Stop::Cust).chain(std::iter::once(Stop::End));
            for rec in recs {
                if rec == launch || matches!(rec, Stop::Cust(c) if seq.contains(&c)) {
                    continue;
                }
                let dist = inst.path_distance(kind, launch.node(), &seq, rec.node());
                out.push(Template {
                    launch,
                    rec,
                    dist,
                    weight: seq.iter().map(|&c| inst.weight(c)).sum(),
                    energy: path_energy(kind, inst, fleet, launch.node(), &seq, rec.node()),
                    duration: dist / fleet.speed(kind),
                    seq: seq.clone(),
                });
            }
        }
    }
    out
}

/// Sortie variables the builder would create, saturating on overflow.
pub fn sortie_var_count(n_customers: usize, n_trucks: usize, n_vehicles: usize, max_len: usize) -> usize {
    let n = n_customers as u128;
    let mut per_pair: u128 = 0;
    let mut perms: u128 = 1;
    for len in 1..=max_len.min(n_customers) as u128 {
        perms = perms.saturating_mul(n - len + 1);
        let free = n - len;
        let pairs = (free + 1) * (free + 1) - free;
        per_pair = per_pair.saturating_add(perms.saturating_mul(pairs));
    }
    let total = per_pair
        .saturating_mul((n_trucks * n_trucks) as u128)
        .saturating_mul(n_vehicles as u128);
    total.min(usize::MAX as u128) as usize
}

fn horizon_and_energy(inst: &Instance, fleet: &FleetSpec, tpls: &[(VehicleKind, Vec<Template>)]) -> (f64, f64) {
    let n = inst.num_customers();
    let mut leg: f64 = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            if inst.reachable(i) && inst.reachable(j) {
                leg = leg.max(manhattan_distance(inst.point(i), inst.point(j)));
            }
        }
    }
    let tau_max = if fleet.truck_speed > 0.0 { leg / fleet.truck_speed } else { 0.0 };
    let mut dur_max: f64 = 0.0;
    let mut robot_energy_max: f64 = 0.0;
    for (kind, list) in tpls {
        for t in list {
            dur_max = dur_max.max(t.duration);
            if *kind == VehicleKind::Robot {
                robot_energy_max = robot_energy_max.max(t.energy);
            }
        }
    }
    ((n as f64 + 1.0) * tau_max + n as f64 * dur_max, robot_energy_max)
}

fn required_from(inst: &Instance, fleet: &FleetSpec, tpls: &[(VehicleKind, Vec<Template>)]) -> f64 {
    let (horizon, robot_energy_max) = horizon_and_energy(inst, fleet, tpls);
    (2.0 * horizon).max(inst.num_customers() as f64 + 2.0).max(robot_energy_max)
}

/// Smallest big-M value the builder accepts for this instance.
pub fn required_big_m(inst: &Instance, fleet: &FleetSpec, options: &ModelOptions) -> f64 {
    let max_len = options.max_sequence_len(fleet);
    let tpls: Vec<_> = VehicleKind::ALL
        .iter()
        .filter(|&&k| fleet.count(k) > 0)
        .map(|&k| (k, templates(inst, fleet, k, max_len)))
        .collect();
    required_from(inst, fleet, &tpls)
}

struct Arc {
    from: Stop,
    to: Stop,
    var: VarId,
    tau: f64,
}

struct SortieVar {
    kind: VehicleKind,
    v: usize,
    ti: usize,
    tk: usize,
    tpl: usize,
    y: VarId,
    launch_time: VarId,
    eprime: Option<VarId>,
    suffix: String,
}

/// Per-vehicle battery and carrier-state variables on every truck stop.
struct VehicleVars {
    kind: VehicleKind,
    v: usize,
    tag: String,
    carrier: Vec<VarId>,
    /// `[truck][stop index]`
    aboard: Vec<Vec<Option<VarId>>>,
    onboard_arrival: Vec<Vec<Option<VarId>>>,
    level: Vec<Vec<VarId>>,
    charge: Vec<Vec<Option<VarId>>>,
}

pub fn build_model(inst: &Instance, fleet: &FleetSpec, options: &ModelOptions) -> Result<MilpModel> {
    fleet.validate()?;
    let n = inst.num_customers();
    let nt = fleet.num_trucks;
    if nt == 0 && n > 0 {
        return Err(Error::Config("at least one truck is required".into()));
    }
    let max_len = options.max_sequence_len(fleet);
    let n_aux = fleet.num_drones + fleet.num_robots;
    let count = sortie_var_count(n, nt, n_aux, max_len);
    if count > options.max_sortie_vars {
        return Err(Error::ModelTooLarge { sorties: count, budget: options.max_sortie_vars });
    }
    let tpls: Vec<(VehicleKind, Vec<Template>)> = VehicleKind::ALL
        .iter()
        .filter(|&&k| fleet.count(k) > 0)
        .map(|&k| (k, templates(inst, fleet, k, max_len)))
        .collect();
    let required = required_from(inst, fleet, &tpls);
    if fleet.big_m < required {
        return Err(Error::BigMTooSmall { big_m: fleet.big_m, required });
    }
    let tpl_of = |kind: VehicleKind| -> &Vec<Template> { &tpls.iter().find(|(k, _)| *k == kind).unwrap().1 };

    let big = fleet.big_m;
    let time_ub = big / 2.0;
    let alpha = fleet.alpha;
    let charging = options.charging;
    let mut model = MilpModel::new();
    let mut obj: Vec<(VarId, f64)> = Vec::new();

    let gamma = model.add_var(GAMMA.to_string(), VarKind::Continuous, 0.0, f64::INFINITY);
    obj.push((gamma, 1.0 - alpha));

    let customers: Vec<Stop> = (1..=n).map(Stop::Cust).collect();
    let from_stops: Vec<Stop> = std::iter::once(Stop::Start).chain(customers.iter().copied()).collect();
    let to_stops: Vec<Stop> = customers.iter().copied().chain(std::iter::once(Stop::End)).collect();

    // Truck arcs, indexed [truck][stop index] for outgoing and incoming lists.
    let mut arcs: Vec<Vec<Arc>> = Vec::with_capacity(nt);
    for t in 0..nt {
        let mut list = Vec::new();
        for &i in &from_stops {
            for &j in &to_stops {
                if i == j || (i == Stop::Start && j == Stop::End) {
                    continue;
                }
                let var = model.add_var(x_name(t, i, j), VarKind::Binary, 0.0, 1.0);
                let dist = inst.truck_distance(fleet, i.node(), j.node());
                let tau = dist / fleet.truck_speed;
                let mut coef = fleet.truck_unit_cost * dist;
                if i == Stop::Start {
                    coef += fleet.truck_fixed_cost;
                }
                obj.push((var, alpha * coef));
                list.push(Arc { from: i, to: j, var, tau });
            }
        }
        arcs.push(list);
    }
    let out_arcs = |t: usize, s: Stop| arcs[t].iter().filter(move |a| a.from == s);
    let in_arcs = |t: usize, s: Stop| arcs[t].iter().filter(move |a| a.to == s);

    let u: Vec<Option<VarId>> = (0..=n)
        .map(|j| {
            (j > 0 && nt > 0).then(|| model.add_var(u_name(j), VarKind::Continuous, 1.0, n as f64))
        })
        .collect();

    let mut arrival: Vec<Vec<VarId>> = Vec::with_capacity(nt);
    for t in 0..nt {
        let mut row = Vec::with_capacity(n + 2);
        for idx in 0..n + 2 {
            let s = stop_at(idx, n);
            let ub = if s == Stop::Start { 0.0 } else { time_ub };
            row.push(model.add_var(arrival_name(t, s), VarKind::Continuous, 0.0, ub));
        }
        arrival.push(row);
    }

    let mut svars: Vec<SortieVar> = Vec::new();
    for &kind in &VehicleKind::ALL {
        if fleet.count(kind) == 0 {
            continue;
        }
        let list = tpl_of(kind);
        for v in 0..fleet.count(kind) {
            for ti in 0..nt {
                for tk in 0..nt {
                    for (k, tp) in list.iter().enumerate() {
                        let suffix = sortie_suffix(kind, v, ti, tk, tp.launch, &tp.seq, tp.rec);
                        let y = model.add_var(sortie_var_name(kind, &suffix), VarKind::Binary, 0.0, 1.0);
                        obj.push((y, alpha * (fleet.unit_cost(kind) * tp.dist + fleet.fixed_cost(kind))));
                        let launch_time = model.add_var(launch_time_name(&suffix), VarKind::Continuous, 0.0, time_ub);
                        let eprime = (kind == VehicleKind::Robot)
                            .then(|| model.add_var(eprime_name(&suffix), VarKind::Continuous, 0.0, f64::INFINITY));
                        svars.push(SortieVar { kind, v, ti, tk, tpl: k, y, launch_time, eprime, suffix });
                    }
                }
            }
        }
    }

    let mut vehicles: Vec<VehicleVars> = Vec::new();
    for &kind in &VehicleKind::ALL {
        for v in 0..fleet.count(kind) {
            let tag = vtag(kind, v);
            let cap = fleet.battery(kind);
            let carrier = (0..nt)
                .map(|t| model.add_var(carrier_name(&tag, t), VarKind::Binary, 0.0, 1.0))
                .collect();
            let mut aboard = Vec::new();
            let mut onboard_arrival = Vec::new();
            let mut level = Vec::new();
            let mut charge = Vec::new();
            for t in 0..nt {
                let mut a_row = Vec::new();
                let mut h_row = Vec::new();
                let mut l_row = Vec::new();
                let mut c_row = Vec::new();
                for idx in 0..n + 2 {
                    let s = stop_at(idx, n);
                    a_row.push((s != Stop::End).then(|| model.add_var(aboard_name(&tag, t, s), VarKind::Binary, 0.0, 1.0)));
                    h_row.push(
                        (s != Stop::Start)
                            .then(|| model.add_var(onboard_arrival_name(&tag, t, s), VarKind::Continuous, 0.0, 1.0)),
                    );
                    l_row.push(model.add_var(level_name(&tag, t, s), VarKind::Continuous, 0.0, cap));
                    c_row.push(
                        (charging && s != Stop::End)
                            .then(|| model.add_var(charge_name(&tag, t, s), VarKind::Continuous, 0.0, cap)),
                    );
                }
                aboard.push(a_row);
                onboard_arrival.push(h_row);
                level.push(l_row);
                charge.push(c_row);
            }
            vehicles.push(VehicleVars { kind, v, tag, carrier, aboard, onboard_arrival, level, charge });
        }
    }

    let charge_time: Vec<Vec<Option<VarId>>> = (0..nt)
        .map(|t| {
            (0..=n)
                .map(|j| {
                    (charging && n_aux > 0 && j > 0)
                        .then(|| model.add_var(charge_time_name(t, Stop::Cust(j)), VarKind::Continuous, 0.0, f64::INFINITY))
                })
                .collect()
        })
        .collect();

    model.objective.terms = obj;

    let tpl = |sv: &SortieVar| -> &Template { &tpl_of(sv.kind)[sv.tpl] };
    let vidx = |kind: VehicleKind, v: usize| -> usize {
        match kind {
            VehicleKind::Drone => v,
            VehicleKind::Robot => fleet.num_drones + v,
        }
    };

    // makespan
    for t in 0..nt {
        let mut terms = vec![(gamma, 1.0)];
        terms.extend(arcs[t].iter().map(|a| (a.var, -a.tau)));
        model.add_constraint(g::MAKESPAN, format!("makespan_t{t}"), terms, Sense::Ge, 0.0);
    }
    {
        let mut per_pair: BTreeMap<(usize, usize, usize), Vec<(VarId, f64)>> = BTreeMap::new();
        for sv in &svars {
            per_pair
                .entry((vidx(sv.kind, sv.v), sv.ti, sv.tk))
                .or_default()
                .push((sv.y, -tpl(sv).duration));
        }
        for ((vi, ti, tk), terms) in per_pair {
            let vv = &vehicles[vi];
            let mut row = vec![(gamma, 1.0)];
            row.extend(terms);
            model.add_constraint(g::MAKESPAN, format!("makespan_{}_t{ti}_t{tk}", vv.tag), row, Sense::Ge, 0.0);
        }
    }
    model.register_group(g::MAKESPAN);

    // visit_once
    {
        let mut serve: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); n + 1];
        for t in 0..nt {
            for a in &arcs[t] {
                if let Stop::Cust(j) = a.to {
                    serve[j].push((a.var, 1.0));
                }
            }
        }
        for sv in &svars {
            for &c in &tpl(sv).seq {
                serve[c].push((sv.y, 1.0));
            }
        }
        model.register_group(g::VISIT_ONCE);
        for j in 1..=n {
            let terms = std::mem::take(&mut serve[j]);
            model.add_constraint(g::VISIT_ONCE, format!("visit_once_{j}"), terms, Sense::Eq, 1.0);
        }
    }

    // depot_start_end, flow_conservation, subtour_elimination
    model.register_group(g::DEPOT_START_END);
    for t in 0..nt {
        let starts: Vec<_> = out_arcs(t, Stop::Start).map(|a| (a.var, 1.0)).collect();
        model.add_constraint(g::DEPOT_START_END, format!("depot_start_end_t{t}_start"), starts.clone(), Sense::Le, 1.0);
        let mut balance: Vec<_> = in_arcs(t, Stop::End).map(|a| (a.var, 1.0)).collect();
        balance.extend(starts.iter().map(|&(v, _)| (v, -1.0)));
        model.add_constraint(g::DEPOT_START_END, format!("depot_start_end_t{t}_end"), balance, Sense::Eq, 0.0);
    }
    model.register_group(g::FLOW_CONSERVATION);
    for t in 0..nt {
        for &s in &customers {
            let mut terms: Vec<_> = in_arcs(t, s).map(|a| (a.var, 1.0)).collect();
            terms.extend(out_arcs(t, s).map(|a| (a.var, -1.0)));
            model.add_constraint(g::FLOW_CONSERVATION, format!("flow_conservation_t{t}_{}", s.label()), terms, Sense::Eq, 0.0);
        }
    }
    model.register_group(g::SUBTOUR_ELIMINATION);
    for t in 0..nt {
        for a in &arcs[t] {
            if let (Stop::Cust(i), Stop::Cust(j)) = (a.from, a.to) {
                let terms = vec![(u[i].unwrap(), 1.0), (u[j].unwrap(), -1.0), (a.var, n as f64)];
                model.add_constraint(g::SUBTOUR_ELIMINATION, format!("subtour_elimination_t{t}_{i}_{j}"), terms, Sense::Le, n as f64 - 1.0);
            }
        }
    }

    // sortie presence on launch and recovery trucks
    let presence = |t: usize, s: Stop| -> Vec<(VarId, f64)> {
        match s {
            Stop::Start => out_arcs(t, s).map(|a| (a.var, -1.0)).collect(),
            _ => in_arcs(t, s).map(|a| (a.var, -1.0)).collect(),
        }
    };
    model.register_group(g::SORTIE_LAUNCH_PRESENCE);
    model.register_group(g::SORTIE_RECOVERY_PRESENCE);
    {
        let mut launches: BTreeMap<(VehicleKind, usize, usize, Stop), Vec<(VarId, f64)>> = BTreeMap::new();
        let mut recoveries: BTreeMap<(VehicleKind, usize, usize, Stop), Vec<(VarId, f64)>> = BTreeMap::new();
        for sv in &svars {
            let tp = tpl(sv);
            launches.entry((sv.kind, sv.ti, sv.tk, tp.launch)).or_default().push((sv.y, 1.0));
            recoveries.entry((sv.kind, sv.ti, sv.tk, tp.rec)).or_default().push((sv.y, 1.0));
        }
        for ((kind, ti, tk, s), mut terms) in launches {
            terms.extend(presence(ti, s));
            let name = format!("sortie_launch_presence_{kind}_t{ti}_t{tk}_{}", s.label());
            model.add_constraint(g::SORTIE_LAUNCH_PRESENCE, name, terms, Sense::Le, 0.0);
        }
        for ((kind, ti, tk, s), mut terms) in recoveries {
            terms.extend(presence(tk, s));
            let name = format!("sortie_recovery_presence_{kind}_t{ti}_t{tk}_{}", s.label());
            model.add_constraint(g::SORTIE_RECOVERY_PRESENCE, name, terms, Sense::Le, 0.0);
        }
    }

    // sortie_precedence (same-truck sorties only; cross-truck order follows from timing)
    model.register_group(g::SORTIE_PRECEDENCE);
    for sv in svars.iter().filter(|sv| sv.ti == sv.tk) {
        let tp = tpl(sv);
        if tp.launch == Stop::Start && tp.rec == Stop::End {
            continue;
        }
        let mut terms = vec![(sv.y, -big)];
        let mut rhs = 1.0 - big;
        match tp.rec {
            Stop::Cust(k) => terms.push((u[k].unwrap(), 1.0)),
            _ => rhs -= n as f64 + 1.0,
        }
        if let Stop::Cust(i) = tp.launch {
            terms.push((u[i].unwrap(), -1.0));
        }
        model.add_constraint(g::SORTIE_PRECEDENCE, format!("sortie_precedence_{}", sv.suffix), terms, Sense::Ge, rhs);
    }
    model.register_group(g::SORTIE_CAPACITY);

    // payload, range
    model.register_group(g::PAYLOAD);
    for sv in &svars {
        let w = tpl(sv).weight;
        model.add_constraint(g::PAYLOAD, format!("payload_{}", sv.suffix), vec![(sv.y, w)], Sense::Le, fleet.payload(sv.kind));
    }
    model.register_group(g::RANGE);
    for sv in &svars {
        let d = tpl(sv).dist;
        model.add_constraint(g::RANGE, format!("range_{}", sv.suffix), vec![(sv.y, d)], Sense::Le, fleet.range(sv.kind));
    }
    model.register_group(g::DRONE_ENERGY);

    // robot_energy_linearization
    model.register_group(g::ROBOT_ENERGY_LINEARIZATION);
    for sv in &svars {
        if let Some(q) = sv.eprime {
            let e = tpl(sv).energy;
            let name = |p: &str| format!("robot_energy_linearization_{}_{p}", sv.suffix);
            model.add_constraint(g::ROBOT_ENERGY_LINEARIZATION, name("a"), vec![(q, 1.0), (sv.y, -big)], Sense::Le, 0.0);
            model.add_constraint(g::ROBOT_ENERGY_LINEARIZATION, name("b"), vec![(q, 1.0)], Sense::Le, e);
            model.add_constraint(g::ROBOT_ENERGY_LINEARIZATION, name("c"), vec![(q, 1.0), (sv.y, -big)], Sense::Ge, e - big);
        }
    }

    // truck_unreachable
    model.register_group(g::TRUCK_UNREACHABLE);
    for t in 0..nt {
        for a in &arcs[t] {
            if !inst.reachable(a.from.node()) || !inst.reachable(a.to.node()) {
                let name = format!("truck_unreachable_t{t}_{}_{}", a.from.label(), a.to.label());
                model.add_constraint(g::TRUCK_UNREACHABLE, name, vec![(a.var, 1.0)], Sense::Eq, 0.0);
            }
        }
    }

    // battery: depot full charge
    let energy_terms = |vv: &VehicleVars, filter: &dyn Fn(&SortieVar) -> bool| -> Vec<(VarId, f64)> {
        svars
            .iter()
            .filter(|sv| sv.kind == vv.kind && sv.v == vv.v && filter(sv))
            .map(|sv| match sv.eprime {
                Some(q) => (q, 1.0),
                None => (sv.y, tpl(sv).energy),
            })
            .collect()
    };
    model.register_group(g::DEPOT_FULL_CHARGE);
    for vv in &vehicles {
        let cap = fleet.battery(vv.kind);
        for t in 0..nt {
            let name = format!("depot_full_charge_{}_t{t}", vv.tag);
            model.add_constraint(g::DEPOT_FULL_CHARGE, name, vec![(vv.level[t][0], 1.0)], Sense::Eq, cap);
        }
        let terms = energy_terms(vv, &|sv| tpl(sv).launch == Stop::Start);
        model.add_constraint(g::DEPOT_FULL_CHARGE, format!("depot_full_charge_{}_total", vv.tag), terms, Sense::Le, cap);
    }

    if charging {
        model.register_group(g::NO_DEPOT_CHARGE);
        for vv in &vehicles {
            for t in 0..nt {
                let c = vv.charge[t][0].unwrap();
                model.add_constraint(g::NO_DEPOT_CHARGE, format!("no_depot_charge_{}_t{t}", vv.tag), vec![(c, 1.0)], Sense::Eq, 0.0);
            }
        }
        model.register_group(g::CHARGING_PRESENCE);
        for vv in &vehicles {
            let rate = fleet.charge_rate(vv.kind);
            for t in 0..nt {
                for &s in &customers {
                    let mut terms = vec![(vv.charge[t][s.index(n)].unwrap(), 1.0)];
                    terms.extend(in_arcs(t, s).chain(out_arcs(t, s)).map(|a| (a.var, -rate)));
                    let name = format!("charging_presence_{}_t{t}_{}", vv.tag, s.label());
                    model.add_constraint(g::CHARGING_PRESENCE, name, terms, Sense::Le, 0.0);
                }
            }
        }
    }

    // battery_balance
    model.register_group(g::BATTERY_BALANCE);
    for vv in &vehicles {
        let cap = fleet.battery(vv.kind);
        let m1 = 2.0 * cap;
        for t in 0..nt {
            for a in &arcs[t] {
                let (i, j) = (a.from.index(n), a.to.index(n));
                let aboard = vv.aboard[t][i].unwrap();
                let mut base = vec![(vv.level[t][j], 1.0), (vv.level[t][i], -1.0)];
                if let Some(c) = vv.charge[t][i] {
                    base.push((c, -1.0));
                }
                let stem = format!("battery_balance_{}_t{t}_{}_{}", vv.tag, a.from.label(), a.to.label());
                let mut ub = base.clone();
                ub.extend([(a.var, m1), (aboard, m1)]);
                model.add_constraint(g::BATTERY_BALANCE, format!("{stem}_ub"), ub, Sense::Le, 2.0 * m1);
                let mut lb = base;
                lb.extend([(a.var, -m1), (aboard, -m1)]);
                model.add_constraint(g::BATTERY_BALANCE, format!("{stem}_lb"), lb, Sense::Ge, -2.0 * m1);
            }
        }
    }
    for sv in &svars {
        let vv = &vehicles[vidx(sv.kind, sv.v)];
        let tp = tpl(sv);
        let cap = fleet.battery(sv.kind);
        let m2 = cap + tp.energy;
        let lk = vv.level[sv.tk][tp.rec.index(n)];
        let li = vv.level[sv.ti][tp.launch.index(n)];
        let stem = format!("battery_balance_{}", sv.suffix);
        model.add_constraint(
            g::BATTERY_BALANCE,
            format!("{stem}_ub"),
            vec![(lk, 1.0), (li, -1.0), (sv.y, m2)],
            Sense::Le,
            m2 - tp.energy,
        );
        model.add_constraint(
            g::BATTERY_BALANCE,
            format!("{stem}_lb"),
            vec![(lk, 1.0), (li, -1.0), (sv.y, -m2)],
            Sense::Ge,
            -tp.energy - m2,
        );
    }
    for vv in &vehicles {
        let mut terms = energy_terms(vv, &|_| true);
        for t in 0..nt {
            for &s in &customers {
                if let Some(c) = vv.charge[t][s.index(n)] {
                    terms.push((c, -1.0));
                }
            }
        }
        let name = format!("battery_balance_{}_total", vv.tag);
        model.add_constraint(g::BATTERY_BALANCE, name, terms, Sense::Le, fleet.battery(vv.kind));
    }

    if charging {
        model.register_group(g::CHARGING_TIME);
        for t in 0..nt {
            for &s in &customers {
                if let Some(ct) = charge_time[t][s.index(n)] {
                    let mut terms = vec![(ct, 1.0)];
                    terms.extend(out_arcs(t, s).map(|a| (a.var, -a.tau)));
                    model.add_constraint(g::CHARGING_TIME, format!("charging_time_t{t}_{}", s.label()), terms, Sense::Le, 0.0);
                }
            }
        }
        model.register_group(g::CHARGING_RATE);
        for vv in &vehicles {
            let rate = fleet.charge_rate(vv.kind);
            for t in 0..nt {
                for &s in &customers {
                    let idx = s.index(n);
                    let terms = vec![(vv.charge[t][idx].unwrap(), 1.0), (charge_time[t][idx].unwrap(), -rate)];
                    let name = format!("charging_rate_{}_t{t}_{}", vv.tag, s.label());
                    model.add_constraint(g::CHARGING_RATE, name, terms, Sense::Le, 0.0);
                }
            }
        }
        model.register_group(g::OVERCHARGE);
        for vv in &vehicles {
            let cap = fleet.battery(vv.kind);
            for t in 0..nt {
                for &s in &customers {
                    let idx = s.index(n);
                    let terms = vec![(vv.level[t][idx], 1.0), (vv.charge[t][idx].unwrap(), 1.0)];
                    let name = format!("overcharge_{}_t{t}_{}", vv.tag, s.label());
                    model.add_constraint(g::OVERCHARGE, name, terms, Sense::Le, cap);
                }
            }
        }
    }

    // truck_timing
    model.register_group(g::TRUCK_TIMING);
    for t in 0..nt {
        for a in &arcs[t] {
            let terms = vec![
                (arrival[t][a.to.index(n)], 1.0),
                (arrival[t][a.from.index(n)], -1.0),
                (a.var, -big),
            ];
            let name = format!("truck_timing_t{t}_{}_{}", a.from.label(), a.to.label());
            model.add_constraint(g::TRUCK_TIMING, name, terms, Sense::Ge, a.tau - big);
        }
    }

    // launch_sync, return_sync
    model.register_group(g::LAUNCH_SYNC);
    for sv in &svars {
        let tp = tpl(sv);
        let terms = vec![(sv.launch_time, 1.0), (arrival[sv.ti][tp.launch.index(n)], -1.0), (sv.y, -big)];
        model.add_constraint(g::LAUNCH_SYNC, format!("launch_sync_{}", sv.suffix), terms, Sense::Ge, -big);
    }
    model.register_group(g::RETURN_SYNC);
    for sv in &svars {
        let tp = tpl(sv);
        let terms = vec![(sv.launch_time, 1.0), (arrival[sv.tk][tp.rec.index(n)], -1.0), (sv.y, big)];
        model.add_constraint(g::RETURN_SYNC, format!("return_sync_{}", sv.suffix), terms, Sense::Le, big - tp.duration);
    }

    // vehicle_aboard
    model.register_group(g::VEHICLE_ABOARD);
    let mh = nt as f64 + 2.0;
    for vv in &vehicles {
        let mine: Vec<&SortieVar> = svars.iter().filter(|sv| sv.kind == vv.kind && sv.v == vv.v).collect();
        let launches_at = |t: usize, s: Stop| -> Vec<(VarId, f64)> {
            mine.iter().filter(|sv| sv.ti == t && tpl(sv).launch == s).map(|sv| (sv.y, 1.0)).collect()
        };
        let recoveries_at = |t: usize, s: Stop| -> Vec<(VarId, f64)> {
            mine.iter().filter(|sv| sv.tk == t && tpl(sv).rec == s).map(|sv| (sv.y, -1.0)).collect()
        };
        let carrier_terms = vv.carrier.iter().map(|&b| (b, 1.0)).collect();
        model.add_constraint(g::VEHICLE_ABOARD, format!("vehicle_aboard_{}_carrier", vv.tag), carrier_terms, Sense::Eq, 1.0);
        for t in 0..nt {
            let mut terms = vec![(vv.aboard[t][0].unwrap(), 1.0), (vv.carrier[t], -1.0)];
            terms.extend(launches_at(t, Stop::Start));
            model.add_constraint(g::VEHICLE_ABOARD, format!("vehicle_aboard_{}_t{t}_0", vv.tag), terms, Sense::Eq, 0.0);
            for a in &arcs[t] {
                let (i, j) = (a.from.index(n), a.to.index(n));
                let mut base = vec![(vv.onboard_arrival[t][j].unwrap(), 1.0), (vv.aboard[t][i].unwrap(), -1.0)];
                base.extend(recoveries_at(t, a.to));
                let stem = format!("vehicle_aboard_{}_t{t}_{}_{}", vv.tag, a.from.label(), a.to.label());
                let mut ub = base.clone();
                ub.push((a.var, mh));
                model.add_constraint(g::VEHICLE_ABOARD, format!("{stem}_ub"), ub, Sense::Le, mh);
                let mut lb = base;
                lb.push((a.var, -mh));
                model.add_constraint(g::VEHICLE_ABOARD, format!("{stem}_lb"), lb, Sense::Ge, -mh);
            }
            for &s in &customers {
                let idx = s.index(n);
                let mut terms = vec![(vv.aboard[t][idx].unwrap(), 1.0), (vv.onboard_arrival[t][idx].unwrap(), -1.0)];
                terms.extend(launches_at(t, s));
                let name = format!("vehicle_aboard_{}_t{t}_{}", vv.tag, s.label());
                model.add_constraint(g::VEHICLE_ABOARD, name, terms, Sense::Eq, 0.0);
            }
        }
    }

    if charging {
        model.register_group(g::CHARGING_ABOARD);
        for vv in &vehicles {
            let rate = fleet.charge_rate(vv.kind);
            for t in 0..nt {
                for &s in &customers {
                    let idx = s.index(n);
                    let tau_max = out_arcs(t, s).map(|a| a.tau).fold(0.0, f64::max);
                    let terms = vec![(vv.charge[t][idx].unwrap(), 1.0), (vv.aboard[t][idx].unwrap(), -rate * tau_max)];
                    let name = format!("charging_aboard_{}_t{t}_{}", vv.tag, s.label());
                    model.add_constraint(g::CHARGING_ABOARD, name, terms, Sense::Le, 0.0);
                }
            }
        }
    }

    model.register_group(g::SINGLE_TRIP);
    if options.single_trip {
        for vv in &vehicles {
            let terms = svars
                .iter()
                .filter(|sv| sv.kind == vv.kind && sv.v == vv.v)
                .map(|sv| (sv.y, 1.0))
                .collect();
            model.add_constraint(g::SINGLE_TRIP, format!("single_trip_{}", vv.tag), terms, Sense::Le, 1.0);
        }
    }
    model.register_group(g::FIXED_DOCKING);
    if !options.flexible_docking {
        for vv in &vehicles {
            let terms: Vec<_> = svars
                .iter()
                .filter(|sv| sv.kind == vv.kind && sv.v == vv.v && sv.ti != sv.tk)
                .map(|sv| (sv.y, 1.0))
                .collect();
            if !terms.is_empty() {
                model.add_constraint(g::FIXED_DOCKING, format!("fixed_docking_{}", vv.tag), terms, Sense::Le, 0.0);
            }
        }
    }
    if !charging {
        model.register_group(g::CHARGING_DISABLED);
    }

    model.check_invariants()?;
    Ok(model)
}

pub(crate) fn stop_at(idx: usize, n: usize) -> Stop {
    if idx == 0 {
        Stop::Start
    } else if idx == n + 1 {
        Stop::End
    } else {
        Stop::Cust(idx)
    }
}
