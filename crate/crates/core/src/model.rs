//! Instance, fleet and plan types, distance metrics and sortie sequence enumeration.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::{BatteryLedger, ChargingEvent};
use crate::error::{Error, Result};

pub const DEPOT: usize = 0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

pub fn manhattan_distance(a: Point, b: Point) -> f64 {
    (a.x - b.x).abs() + (a.y - b.y).abs()
}

pub fn euclidean_distance(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub weight: f64,
    #[serde(default = "default_true")]
    pub truck_reachable: bool,
}

fn default_true() -> bool {
    true
}

impl Node {
    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleKind {
    Drone,
    Robot,
}

impl VehicleKind {
    pub const ALL: [VehicleKind; 2] = [VehicleKind::Drone, VehicleKind::Robot];
}

impl fmt::Display for VehicleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VehicleKind::Drone => f.write_str("drone"),
            VehicleKind::Robot => f.write_str("robot"),
        }
    }
}

/// Fleet composition and per-modality parameters. Defaults follow the
/// reference parameter table (one truck, one drone, one robot).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetSpec {
    pub num_trucks: usize,
    pub num_drones: usize,
    pub num_robots: usize,
    #[serde(rename = "s_t")]
    pub truck_speed: f64,
    #[serde(rename = "s_d")]
    pub drone_speed: f64,
    #[serde(rename = "s_r")]
    pub robot_speed: f64,
    #[serde(rename = "C_t")]
    pub truck_unit_cost: f64,
    #[serde(rename = "C_d")]
    pub drone_unit_cost: f64,
    #[serde(rename = "C_r")]
    pub robot_unit_cost: f64,
    #[serde(rename = "f_t")]
    pub truck_fixed_cost: f64,
    #[serde(rename = "f_d")]
    pub drone_fixed_cost: f64,
    #[serde(rename = "f_r")]
    pub robot_fixed_cost: f64,
    #[serde(rename = "rho_d")]
    pub drone_payload: f64,
    #[serde(rename = "rho_r")]
    pub robot_payload: f64,
    #[serde(rename = "D_max_d")]
    pub drone_range: f64,
    #[serde(rename = "D_max_r")]
    pub robot_range: f64,
    #[serde(rename = "W_d")]
    pub drone_weight: f64,
    #[serde(rename = "W_r")]
    pub robot_weight: f64,
    #[serde(rename = "B_d")]
    pub drone_battery: f64,
    #[serde(rename = "B_r")]
    pub robot_battery: f64,
    #[serde(rename = "alpha_d")]
    pub drone_energy_coeff: f64,
    pub g: f64,
    pub l_leg: f64,
    #[serde(rename = "C_rate_d")]
    pub drone_charge_rate: f64,
    #[serde(rename = "C_rate_r")]
    pub robot_charge_rate: f64,
    pub k1: f64,
    pub k2: f64,
    pub m: usize,
    pub alpha: f64,
    #[serde(rename = "big_M")]
    pub big_m: f64,
    /// Battery units per watt-hour of robot energy.
    #[serde(default = "default_robot_energy_scale")]
    pub robot_energy_scale: f64,
}

/// mAh per Wh for a 14.8 V nominal pack.
pub const DEFAULT_ROBOT_ENERGY_SCALE: f64 = 1000.0 / 14.8;

fn default_robot_energy_scale() -> f64 {
    DEFAULT_ROBOT_ENERGY_SCALE
}

impl Default for FleetSpec {
    fn default() -> Self {
        FleetSpec {
            num_trucks: 1,
            num_drones: 1,
            num_robots: 1,
            truck_speed: 45.0,
            drone_speed: 75.0,
            robot_speed: 25.0,
            truck_unit_cost: 2.9,
            drone_unit_cost: 0.08,
            robot_unit_cost: 0.06,
            truck_fixed_cost: 30.0,
            drone_fixed_cost: 10.0,
            robot_fixed_cost: 8.0,
            drone_payload: 25.0,
            robot_payload: 20.0,
            drone_range: 20.0,
            robot_range: 15.0,
            drone_weight: 18.0,
            robot_weight: 15.0,
            drone_battery: 14000.0,
            robot_battery: 8000.0,
            drone_energy_coeff: 128.0,
            g: 9.81,
            l_leg: 0.5,
            drone_charge_rate: 5000.0,
            robot_charge_rate: 4000.0,
            k1: 0.1,
            k2: 0.2,
            m: 3,
            alpha: 0.5,
            big_m: 1e5,
            robot_energy_scale: DEFAULT_ROBOT_ENERGY_SCALE,
        }
    }
}

impl FleetSpec {
    pub fn count(&self, kind: VehicleKind) -> usize {
        match kind {
            VehicleKind::Drone => self.num_drones,
            VehicleKind::Robot => self.num_robots,
        }
    }

    pub fn speed(&self, kind: VehicleKind) -> f64 {
        match kind {
            VehicleKind::Drone => self.drone_speed,
            VehicleKind::Robot => self.robot_speed,
        }
    }

    pub fn unit_cost(&self, kind: VehicleKind) -> f64 {
        match kind {
            VehicleKind::Drone => self.drone_unit_cost,
            VehicleKind::Robot => self.robot_unit_cost,
        }
    }

    pub fn fixed_cost(&self, kind: VehicleKind) -> f64 {
        match kind {
            VehicleKind::Drone => self.drone_fixed_cost,
            VehicleKind::Robot => self.robot_fixed_cost,
        }
    }

    pub fn payload(&self, kind: VehicleKind) -> f64 {
        match kind {
            VehicleKind::Drone => self.drone_payload,
            VehicleKind::Robot => self.robot_payload,
        }
    }

    pub fn range(&self, kind: VehicleKind) -> f64 {
        match kind {
            VehicleKind::Drone => self.drone_range,
            VehicleKind::Robot => self.robot_range,
        }
    }

    pub fn battery(&self, kind: VehicleKind) -> f64 {
        match kind {
            VehicleKind::Drone => self.drone_battery,
            VehicleKind::Robot => self.robot_battery,
        }
    }

    pub fn charge_rate(&self, kind: VehicleKind) -> f64 {
        match kind {
            VehicleKind::Drone => self.drone_charge_rate,
            VehicleKind::Robot => self.robot_charge_rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidFleet(what.to_string()));
        let all_finite = [
            self.truck_speed,
            self.drone_speed,
            self.robot_speed,
            self.truck_unit_cost,
            self.drone_unit_cost,
            self.robot_unit_cost,
            self.truck_fixed_cost,
            self.drone_fixed_cost,
            self.robot_fixed_cost,
            self.drone_payload,
            self.robot_payload,
            self.drone_range,
            self.robot_range,
            self.drone_weight,
            self.robot_weight,
            self.drone_battery,
            self.robot_battery,
            self.drone_energy_coeff,
            self.g,
            self.l_leg,
            self.drone_charge_rate,
            self.robot_charge_rate,
            self.k1,
            self.k2,
            self.alpha,
            self.big_m,
            self.robot_energy_scale,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return bad("all parameters must be finite");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha must lie in [0, 1]");
        }
        if self.m < 1 {
            return bad("m must be at least 1");
        }
        if self.num_trucks > 0 && self.truck_speed <= 0.0 {
            return bad("truck speed must be positive");
        }
        for kind in VehicleKind::ALL {
            if self.count(kind) == 0 {
                continue;
            }
            if self.speed(kind) <= 0.0
                || self.payload(kind) <= 0.0
                || self.range(kind) <= 0.0
                || self.battery(kind) <= 0.0
            {
                return Err(Error::InvalidFleet(format!(
                    "{kind} speed, payload, range and battery must be positive"
                )));
            }
            if self.charge_rate(kind) < 0.0 {
                return Err(Error::InvalidFleet(format!("{kind} charge rate is negative")));
            }
        }
        if self.num_robots > 0 && self.l_leg <= 0.0 {
            return bad("robot leg length must be positive");
        }
        if self.big_m <= 0.0 {
            return bad("big_M must be positive");
        }
        Ok(())
    }
}

/// Depot plus customers. `nodes[0]` is the depot and `nodes[j].id == j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    pub nodes: Vec<Node>,
    pub fleet: FleetSpec,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    depot: Point,
    customers: Vec<Node>,
    fleet: FleetSpec,
    seed: u64,
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(f: InstanceFile) -> Result<Self> {
        Instance::new(f.depot, f.customers, f.fleet, f.seed)
    }
}

impl From<Instance> for InstanceFile {
    fn from(inst: Instance) -> Self {
        let depot = inst.nodes[0].point();
        let mut nodes = inst.nodes;
        nodes.remove(0);
        InstanceFile {
            depot,
            customers: nodes,
            fleet: inst.fleet,
            seed: inst.seed,
        }
    }
}

impl Instance {
    /// Customer ids must be exactly `1..=n` (any order).
    pub fn new(depot: Point, mut customers: Vec<Node>, fleet: FleetSpec, seed: u64) -> Result<Self> {
        if !depot.x.is_finite() || !depot.y.is_finite() {
            return Err(Error::InvalidInstance("depot coordinates must be finite".into()));
        }
        customers.sort_by_key(|c| c.id);
        for (k, c) in customers.iter().enumerate() {
            if c.id != k + 1 {
                return Err(Error::InvalidInstance(format!(
                    "customer ids must be 1..={} without gaps or duplicates (found {})",
                    customers.len(),
                    c.id
                )));
            }
            if !c.x.is_finite() || !c.y.is_finite() {
                return Err(Error::InvalidInstance(format!("customer {} has non-finite coordinates", c.id)));
            }
            if !c.weight.is_finite() || c.weight < 0.0 {
                return Err(Error::InvalidInstance(format!("customer {} has invalid weight", c.id)));
            }
        }
        fleet.validate()?;
        let mut nodes = Vec::with_capacity(customers.len() + 1);
        nodes.push(Node {
            id: DEPOT,
            x: depot.x,
            y: depot.y,
            weight: 0.0,
            truck_reachable: true,
        });
        nodes.extend(customers);
        Ok(Instance { nodes, fleet, seed })
    }

    pub fn num_customers(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn customers(&self) -> &[Node] {
        &self.nodes[1..]
    }

    pub fn customer_ids(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.num_customers()
    }

    pub fn contains(&self, id: usize) -> bool {
        id < self.nodes.len()
    }

    pub fn node(&self, id: usize) -> Result<&Node> {
        self.nodes
            .get(id)
            .ok_or_else(|| Error::InvalidInstance(format!("unknown node id {id}")))
    }

    pub fn point(&self, id: usize) -> Point {
        self.nodes[id].point()
    }

    pub fn weight(&self, id: usize) -> f64 {
        self.nodes[id].weight
    }

    pub fn reachable(&self, id: usize) -> bool {
        self.nodes[id].truck_reachable
    }

    /// Manhattan distance, or `fleet.big_m` when either endpoint is closed to trucks.
    pub fn truck_distance(&self, fleet: &FleetSpec, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        if !self.reachable(i) || !self.reachable(j) {
            return fleet.big_m;
        }
        manhattan_distance(self.point(i), self.point(j))
    }

    pub fn leg_distance(&self, kind: VehicleKind, i: usize, j: usize) -> f64 {
        match kind {
            VehicleKind::Drone => euclidean_distance(self.point(i), self.point(j)),
            VehicleKind::Robot => manhattan_distance(self.point(i), self.point(j)),
        }
    }

    /// Launch, each customer in order, then recovery.
    pub fn path_distance(&self, kind: VehicleKind, launch: usize, sequence: &[usize], recovery: usize) -> f64 {
        let mut prev = launch;
        let mut total = 0.0;
        for &c in sequence.iter().chain(std::iter::once(&recovery)) {
            total += self.leg_distance(kind, prev, c);
            prev = c;
        }
        total
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sortie {
    pub vehicle_kind: VehicleKind,
    pub vehicle_id: usize,
    pub launch_node: usize,
    pub recovery_node: usize,
    pub sequence: Vec<usize>,
    pub launch_truck: usize,
    pub recovery_truck: usize,
    pub launch_time: f64,
}

impl Sortie {
    pub fn payload(&self, inst: &Instance) -> f64 {
        self.sequence.iter().map(|&c| inst.weight(c)).sum()
    }

    pub fn is_cyclic(&self) -> bool {
        self.launch_node == self.recovery_node
    }

    pub fn is_depot_cyclic(&self) -> bool {
        self.launch_node == DEPOT && self.recovery_node == DEPOT
    }

    /// Checks the sequence invariants and that every node id exists.
    pub fn check_shape(&self, inst: &Instance) -> Result<()> {
        for id in [self.launch_node, self.recovery_node]
            .iter()
            .chain(self.sequence.iter())
        {
            inst.node(*id)?;
        }
        if self.sequence.is_empty() {
            return Err(Error::MalformedPlan("sortie sequence is empty".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &c in &self.sequence {
            if c == DEPOT || !seen.insert(c) {
                return Err(Error::MalformedPlan(format!("sortie sequence {:?} is not a set of distinct customers", self.sequence)));
            }
            if c == self.launch_node || c == self.recovery_node {
                return Err(Error::MalformedPlan(format!("sortie sequence {:?} contains its launch or recovery node", self.sequence)));
            }
        }
        Ok(())
    }
}

pub fn sortie_distance(s: &Sortie, inst: &Instance) -> Result<f64> {
    for id in [s.launch_node, s.recovery_node].iter().chain(s.sequence.iter()) {
        inst.node(*id)?;
    }
    Ok(inst.path_distance(s.vehicle_kind, s.launch_node, &s.sequence, s.recovery_node))
}

/// All ordered tuples of distinct customers with lengths `1..=m`, ordered by
/// (length, ids). Duplicate input ids are ignored.
pub fn enumerate_sequences(customers: &[usize], m: usize) -> Vec<Vec<usize>> {
    let mut ids = customers.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(m);
    let mut used = vec![false; ids.len()];
    for len in 1..=m.min(ids.len()) {
        permute(&ids, len, &mut used, &mut current, &mut out);
    }
    out
}

fn permute(ids: &[usize], len: usize, used: &mut [bool], current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == len {
        out.push(current.clone());
        return;
    }
    for k in 0..ids.len() {
        if used[k] {
            continue;
        }
        used[k] = true;
        current.push(ids[k]);
        permute(ids, len, used, current, out);
        current.pop();
        used[k] = false;
    }
}

/// Σ_{n=1..m} n_customers! / (n_customers − n)!
pub fn sequence_count(n_customers: usize, m: usize) -> usize {
    let mut total = 0;
    let mut perms = 1usize;
    for n in 1..=m.min(n_customers) {
        perms *= n_customers - n + 1;
        total += perms;
    }
    total
}

/// Route position a sortie launched from `node` leaves from. The depot maps
/// to the route start.
pub fn launch_position(route: &[usize], node: usize) -> Option<usize> {
    if node == DEPOT {
        return (!route.is_empty()).then_some(0);
    }
    route.iter().position(|&v| v == node)
}

/// Route position a sortie recovered at `node` returns to. The depot maps to
/// the route end.
pub fn recovery_position(route: &[usize], node: usize) -> Option<usize> {
    if node == DEPOT {
        return route.len().checked_sub(1);
    }
    route.iter().position(|&v| v == node)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveBreakdown {
    pub variable_cost: f64,
    pub fixed_cost: f64,
    pub makespan: f64,
    pub weighted_objective: f64,
}

impl ObjectiveBreakdown {
    pub fn operational_cost(&self) -> f64 {
        self.variable_cost + self.fixed_cost
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plan {
    pub truck_routes: Vec<Vec<usize>>,
    pub sorties: Vec<Sortie>,
    /// Arrival time at each position of the matching route.
    pub truck_arrivals: Vec<Vec<f64>>,
    pub charging_events: Vec<ChargingEvent>,
    #[serde(default)]
    pub ledgers: Vec<BatteryLedger>,
    pub objective_breakdown: ObjectiveBreakdown,
}

impl Plan {
    /// How many times each node id is served, indexed by id (depot slot unused).
    pub fn visit_counts(&self, n_nodes: usize) -> Vec<usize> {
        let mut counts = vec![0; n_nodes];
        for route in &self.truck_routes {
            for &v in route {
                if v != DEPOT && v < n_nodes {
                    counts[v] += 1;
                }
            }
        }
        for s in &self.sorties {
            for &c in &s.sequence {
                if c < n_nodes {
                    counts[c] += 1;
                }
            }
        }
        counts
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// Collaboration mode: which auxiliary vehicle kinds take part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Trucks only.
    To,
    /// Trucks and drones.
    Td,
    /// Trucks and robots.
    Tr,
    /// Everything.
    Ef,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::To, Mode::Td, Mode::Tr, Mode::Ef];

    pub fn name(self) -> &'static str {
        match self {
            Mode::To => "to",
            Mode::Td => "td",
            Mode::Tr => "tr",
            Mode::Ef => "ef",
        }
    }

    /// Zeroes the vehicle counts this mode excludes.
    pub fn apply(self, fleet: &FleetSpec) -> FleetSpec {
        let mut f = fleet.clone();
        if matches!(self, Mode::To | Mode::Tr) {
            f.num_drones = 0;
        }
        if matches!(self, Mode::To | Mode::Td) {
            f.num_robots = 0;
        }
        f
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "to" => Ok(Mode::To),
            "td" => Ok(Mode::Td),
            "tr" => Ok(Mode::Tr),
            "ef" => Ok(Mode::Ef),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Feature switches shared by the model builder, validator, exact search and FINDER.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelOptions {
    pub charging: bool,
    pub flexible_docking: bool,
    pub single_visit: bool,
    pub single_trip: bool,
    /// Upper bound on generated sortie variables before `build_model` refuses.
    pub max_sortie_vars: usize,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            charging: true,
            flexible_docking: true,
            single_visit: false,
            single_trip: false,
            max_sortie_vars: 2_000_000,
        }
    }
}

impl ModelOptions {
    /// Customers allowed per sortie under these options.
    pub fn max_sequence_len(&self, fleet: &FleetSpec) -> usize {
        if self.single_visit {
            1
        } else {
            fleet.m
        }
    }
}
