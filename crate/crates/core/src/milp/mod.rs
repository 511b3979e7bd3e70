//! Mixed-integer model of the routing problem: an abstract variable/constraint
//! container, the builder, LP export, and plan-to-assignment substitution.

mod assign;
mod build;
pub mod groups;
mod lp;

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::model::{FleetSpec, Instance, ObjectiveBreakdown, Plan, DEPOT};

pub use assign::induced_assignment;
pub use build::{build_model, required_big_m, sortie_var_count};
pub use lp::{export_lp, parse_lp, sanitize_name, ParsedConstraint, ParsedLp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub group: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn lhs(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    pub fn is_satisfied(&self, values: &[f64], tol: f64) -> bool {
        let lhs = self.lhs(values);
        match self.sense {
            Sense::Le => lhs <= self.rhs + tol,
            Sense::Ge => lhs >= self.rhs - tol,
            Sense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Objective {
    /// Always minimized.
    pub terms: Vec<(VarId, f64)>,
}

#[derive(Clone, Debug, Default)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Objective,
    /// Group names in emission order, including groups that emit no rows.
    pub groups: Vec<String>,
    index: HashMap<String, VarId>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: String, kind: VarKind, lower: f64, upper: f64) -> VarId {
        let id = VarId(self.variables.len());
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            VarKind::Continuous => (lower, upper),
        };
        let previous = self.index.insert(name.clone(), id);
        assert!(previous.is_none(), "duplicate variable name {name}");
        self.variables.push(Variable { name, kind, lower, upper });
        id
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn register_group(&mut self, group: &str) {
        if !self.groups.iter().any(|g| g == group) {
            self.groups.push(group.to_string());
        }
    }

    /// Rows without terms are dropped when trivially satisfied.
    pub fn add_constraint(&mut self, group: &str, name: String, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) {
        self.register_group(group);
        let terms: Vec<(VarId, f64)> = terms.into_iter().filter(|&(_, c)| c != 0.0).collect();
        if terms.is_empty() {
            let ok = match sense {
                Sense::Le => 0.0 <= rhs,
                Sense::Ge => 0.0 >= rhs,
                Sense::Eq => rhs == 0.0,
            };
            if ok {
                return;
            }
        }
        self.constraints.push(Constraint { name, group: group.to_string(), terms, sense, rhs });
    }

    pub fn group_counts(&self) -> BTreeMap<String, usize> {
        let mut counts: BTreeMap<String, usize> = self.groups.iter().map(|g| (g.clone(), 0)).collect();
        for c in &self.constraints {
            *counts.entry(c.group.clone()).or_default() += 1;
        }
        counts
    }

    pub fn group_count(&self, group: &str) -> usize {
        self.constraints.iter().filter(|c| c.group == group).count()
    }

    pub fn count_vars(&self, prefix: &str) -> usize {
        self.variables.iter().filter(|v| v.name.starts_with(prefix)).count()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Names of violated rows, bounds and integrality conditions.
    pub fn violations(&self, values: &[f64], tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (v, val) in self.variables.iter().zip(values) {
            if *val < v.lower - tol || *val > v.upper + tol {
                out.push(format!("bound:{}", v.name));
            }
            if v.kind == VarKind::Binary && (val - val.round()).abs() > tol {
                out.push(format!("integrality:{}", v.name));
            }
        }
        for c in &self.constraints {
            if !c.is_satisfied(values, tol) {
                out.push(c.name.clone());
            }
        }
        out
    }

    pub fn check_invariants(&self) -> Result<()> {
        let n = self.variables.len();
        for v in &self.variables {
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(Error::Config(format!("binary {} has bounds outside [0,1]", v.name)));
            }
        }
        let terms = self.constraints.iter().flat_map(|c| c.terms.iter()).chain(self.objective.terms.iter());
        for (v, _) in terms {
            if v.0 >= n {
                return Err(Error::Config(format!("term references undeclared variable {}", v.0)));
            }
        }
        if self.index.len() != n {
            return Err(Error::Config("variable names are not unique".into()));
        }
        Ok(())
    }
}

/// Cost, makespan and weighted objective of a plan, using the model's definitions:
/// the makespan is the largest summed travel time of any truck, or of any
/// auxiliary vehicle over the sorties it flies between one (launch, recovery) truck pair.
pub fn objective_value(plan: &Plan, inst: &Instance, fleet: &FleetSpec) -> ObjectiveBreakdown {
    let mut variable_cost = 0.0;
    let mut fixed_cost = 0.0;
    let mut makespan: f64 = 0.0;
    for route in &plan.truck_routes {
        let length: f64 = route.windows(2).map(|w| inst.truck_distance(fleet, w[0], w[1])).sum();
        variable_cost += fleet.truck_unit_cost * length;
        if route.len() > 1 && route[1] != DEPOT {
            fixed_cost += fleet.truck_fixed_cost;
        }
        makespan = makespan.max(length / fleet.truck_speed);
    }
    let mut per_pair: BTreeMap<(crate::model::VehicleKind, usize, usize, usize), f64> = BTreeMap::new();
    for s in &plan.sorties {
        let d = inst.path_distance(s.vehicle_kind, s.launch_node, &s.sequence, s.recovery_node);
        variable_cost += fleet.unit_cost(s.vehicle_kind) * d;
        fixed_cost += fleet.fixed_cost(s.vehicle_kind);
        *per_pair
            .entry((s.vehicle_kind, s.vehicle_id, s.launch_truck, s.recovery_truck))
            .or_default() += d / fleet.speed(s.vehicle_kind);
    }
    for t in per_pair.values() {
        makespan = makespan.max(*t);
    }
    let weighted_objective = fleet.alpha * (variable_cost + fixed_cost) + (1.0 - fleet.alpha) * makespan;
    ObjectiveBreakdown { variable_cost, fixed_cost, makespan, weighted_objective }
}
