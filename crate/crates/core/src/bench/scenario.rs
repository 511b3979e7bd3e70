use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::generate_instance_with;
use crate::error::{Error, Result};
use crate::exact::{solve_exact, ExactOutcome, SearchBudget};
use crate::finder::solve_finder;
use crate::model::{FleetSpec, ModelOptions, Mode, Plan};
use crate::validator::validate;

/// Percentage excess of `candidate` over `reference`.
pub fn gap(reference: f64, candidate: f64) -> Result<f64> {
    if !(reference > 0.0) {
        return Err(Error::Domain(format!("gap needs a positive reference, got {reference}")));
    }
    Ok((candidate - reference) / reference * 100.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Modes,
    Visits,
    Trips,
    Charging,
    Docking,
    Sweep,
    Gap,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::Modes,
        ScenarioKind::Visits,
        ScenarioKind::Trips,
        ScenarioKind::Charging,
        ScenarioKind::Docking,
        ScenarioKind::Sweep,
        ScenarioKind::Gap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Modes => "modes",
            ScenarioKind::Visits => "visits",
            ScenarioKind::Trips => "trips",
            ScenarioKind::Charging => "charging",
            ScenarioKind::Docking => "docking",
            ScenarioKind::Sweep => "sweep",
            ScenarioKind::Gap => "gap",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown scenario {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Toggles {
    pub multi_visit: bool,
    pub multi_trip: bool,
    pub enroute_charging: bool,
    pub flexible_docking: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles { multi_visit: true, multi_trip: true, enroute_charging: true, flexible_docking: true }
    }
}

impl Toggles {
    pub fn options(&self) -> ModelOptions {
        ModelOptions {
            charging: self.enroute_charging,
            flexible_docking: self.flexible_docking,
            single_visit: !self.multi_visit,
            single_trip: !self.multi_trip,
            ..ModelOptions::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    DroneCount,
    DroneSpeed,
    RobotSpeed,
    DronePayload,
    DroneRange,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::DroneCount => "drone_count",
            SweepParameter::DroneSpeed => "drone_speed",
            SweepParameter::RobotSpeed => "robot_speed",
            SweepParameter::DronePayload => "drone_payload",
            SweepParameter::DroneRange => "drone_range",
        }
    }

    pub fn apply(self, fleet: &FleetSpec, value: f64) -> FleetSpec {
        let mut f = fleet.clone();
        match self {
            SweepParameter::DroneCount => f.num_drones = value as usize,
            SweepParameter::DroneSpeed => f.drone_speed = value,
            SweepParameter::RobotSpeed => f.robot_speed = value,
            SweepParameter::DronePayload => f.drone_payload = value,
            SweepParameter::DroneRange => f.drone_range = value,
        }
        f
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            SweepParameter::DroneCount,
            SweepParameter::DroneSpeed,
            SweepParameter::RobotSpeed,
            SweepParameter::DronePayload,
            SweepParameter::DroneRange,
        ]
        .into_iter()
        .find(|p| p.name() == s)
        .ok_or_else(|| Error::Config(format!("unknown sweep parameter {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: ScenarioKind,
    pub sizes: Vec<usize>,
    pub repetitions: usize,
    pub mode: Mode,
    pub toggles: Toggles,
    pub sweep: Option<Sweep>,
    pub seed_base: u64,
    pub fleet: FleetSpec,
    pub unreachable_frac: f64,
}

impl ScenarioSpec {
    /// Defaults for each scenario: every fleet toggle on and the default
    /// fleet. Docking uses two trucks; the sweep varies the drone count from
    /// 0 to 8.
    pub fn new(name: ScenarioKind, sizes: Vec<usize>, repetitions: usize, seed_base: u64) -> Self {
        let mut fleet = FleetSpec::default();
        let mut sweep = None;
        match name {
            ScenarioKind::Docking => fleet.num_trucks = 2,
            ScenarioKind::Sweep => {
                sweep = Some(Sweep { parameter: SweepParameter::DroneCount, values: (0..=8).map(f64::from).collect() })
            }
            _ => {}
        }
        ScenarioSpec {
            name,
            sizes,
            repetitions,
            mode: Mode::Ef,
            toggles: Toggles::default(),
            sweep,
            seed_base,
            fleet,
            unreachable_frac: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.sizes.is_empty() {
            return Err(Error::Config("sizes must not be empty".into()));
        }
        self.fleet.validate()
    }

    /// Seed of repetition `rep` at the `size_idx`-th size. Variants of one
    /// scenario share it, so their comparisons are paired.
    pub fn instance_seed(&self, size_idx: usize, rep: usize) -> u64 {
        self.seed_base + (size_idx * self.repetitions + rep) as u64
    }

    /// The (label, fleet, options) series this scenario compares.
    pub fn variants(&self) -> Vec<Variant> {
        let base = self.mode.apply(&self.fleet);
        let opts = self.toggles.options();
        let v = |label: &str, fleet: FleetSpec, options: ModelOptions| Variant {
            label: label.to_string(),
            fleet,
            options,
            solver: Solver::Finder,
            sweep_value: None,
        };
        match self.name {
            ScenarioKind::Modes => Mode::ALL.iter().map(|m| v(m.name(), m.apply(&self.fleet), opts.clone())).collect(),
            ScenarioKind::Visits => vec![
                v("multi_visit", base.clone(), ModelOptions { single_visit: false, ..opts.clone() }),
                v("single_visit", base, ModelOptions { single_visit: true, ..opts }),
            ],
            ScenarioKind::Trips => vec![
                v("multi_trip", base.clone(), ModelOptions { single_trip: false, ..opts.clone() }),
                v("single_trip", base, ModelOptions { single_trip: true, ..opts }),
            ],
            ScenarioKind::Charging => vec![
                v("enroute_charging", base.clone(), ModelOptions { charging: true, ..opts.clone() }),
                v("no_charging", base, ModelOptions { charging: false, ..opts }),
            ],
            ScenarioKind::Docking => vec![
                v("flexible_docking", base.clone(), ModelOptions { flexible_docking: true, ..opts.clone() }),
                v("fixed_docking", base, ModelOptions { flexible_docking: false, ..opts }),
            ],
            ScenarioKind::Sweep => {
                let Some(sweep) = &self.sweep else { return Vec::new() };
                sweep
                    .values
                    .iter()
                    .map(|&x| Variant {
                        label: format!("{}={x}", sweep.parameter.name()),
                        fleet: sweep.parameter.apply(&base, x),
                        options: opts.clone(),
                        solver: Solver::Finder,
                        sweep_value: Some(x),
                    })
                    .collect()
            }
            ScenarioKind::Gap => vec![
                Variant { label: "exact".into(), fleet: base.clone(), options: opts.clone(), solver: Solver::Exact, sweep_value: None },
                v("finder", base, opts),
            ],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Finder,
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variant {
    pub label: String,
    pub fleet: FleetSpec,
    pub options: ModelOptions,
    pub solver: Solver,
    pub sweep_value: Option<f64>,
}

/// One (variant, size, repetition) run. Runtime is kept apart because it is
/// the only non-reproducible quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub variant: String,
    pub sweep_value: Option<f64>,
    pub size: usize,
    pub repetition: usize,
    pub seed: u64,
    pub feasible: bool,
    pub variable_cost: Option<f64>,
    pub fixed_cost: Option<f64>,
    pub operational_cost: Option<f64>,
    pub makespan: Option<f64>,
    pub simulated_makespan: Option<f64>,
    pub weighted_objective: Option<f64>,
    pub sorties: Option<usize>,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub scenario: String,
    pub variant: String,
    pub size: usize,
    pub repetition: usize,
    pub runtime_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub row: ResultRow,
    pub timing: TimingRow,
    pub plan: Option<Plan>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioResult {
    pub spec: ScenarioSpec,
    pub runs: Vec<RunRecord>,
}

impl ScenarioResult {
    pub fn rows(&self) -> Vec<&ResultRow> {
        self.runs.iter().map(|r| &r.row).collect()
    }
}

/// Runs every variant on every (size, repetition) instance. Work is spread
/// over threads; output order is fixed by (variant, size, repetition).
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioResult> {
    spec.validate()?;
    let variants = spec.variants();
    let mut jobs = Vec::new();
    for (vi, _) in variants.iter().enumerate() {
        for (si, &size) in spec.sizes.iter().enumerate() {
            for rep in 0..spec.repetitions {
                jobs.push((vi, si, size, rep));
            }
        }
    }
    let runs = jobs
        .par_iter()
        .map(|&(vi, si, size, rep)| run_one(spec, &variants[vi], si, size, rep))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioResult { spec: spec.clone(), runs })
}

fn run_one(spec: &ScenarioSpec, variant: &Variant, size_idx: usize, size: usize, rep: usize) -> Result<RunRecord> {
    let seed = spec.instance_seed(size_idx, rep);
    let inst = generate_instance_with(size, seed, &variant.fleet, spec.unreachable_frac)?;
    let started = Instant::now();
    let solved: Result<Option<Plan>> = match variant.solver {
        Solver::Finder => solve_finder(&inst, &variant.fleet, &variant.options).map(Some),
        Solver::Exact => match solve_exact(&inst, &variant.fleet, &variant.options, &SearchBudget::default())? {
            ExactOutcome::Optimal(p) => Ok(Some(*p)),
            ExactOutcome::Infeasible => Err(Error::Domain("no feasible plan".into())),
            ExactOutcome::BudgetExceeded(why) => Err(Error::Config(format!("search budget exceeded: {why}"))),
        },
    };
    let runtime_s = started.elapsed().as_secs_f64();
    let mut row = ResultRow {
        scenario: spec.name.to_string(),
        variant: variant.label.clone(),
        sweep_value: variant.sweep_value,
        size,
        repetition: rep,
        seed,
        feasible: false,
        variable_cost: None,
        fixed_cost: None,
        operational_cost: None,
        makespan: None,
        simulated_makespan: None,
        weighted_objective: None,
        sorties: None,
        error: String::new(),
    };
    let plan = match solved {
        Ok(plan) => plan,
        Err(e) => {
            row.error = e.to_string();
            None
        }
    };
    if let Some(p) = &plan {
        let report = validate(p, &inst, &variant.fleet, &variant.options)?;
        let b = &p.objective_breakdown;
        row.feasible = report.feasible;
        row.variable_cost = Some(b.variable_cost);
        row.fixed_cost = Some(b.fixed_cost);
        row.operational_cost = Some(b.operational_cost());
        row.makespan = Some(b.makespan);
        row.simulated_makespan = Some(report.simulated_makespan);
        row.weighted_objective = Some(b.weighted_objective);
        row.sorties = Some(p.sorties.len());
    }
    let timing = TimingRow { scenario: row.scenario.clone(), variant: row.variant.clone(), size, repetition: rep, runtime_s };
    Ok(RunRecord { row, timing, plan })
}
