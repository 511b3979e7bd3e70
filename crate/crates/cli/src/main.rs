use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use vrpdr_core::bench::{generate_instance_with, run_scenario, write_outputs, ScenarioKind, ScenarioSpec};
use vrpdr_core::exact::{solve_exact, ExactOutcome, SearchBudget};
use vrpdr_core::finder::solve_finder;
use vrpdr_core::milp::{build_model, export_lp};
use vrpdr_core::model::{FleetSpec, Instance, ModelOptions, Mode, Plan};
use vrpdr_core::validator::validate;

#[derive(Parser)]
#[command(name = "vrpdr", version, about = "Truck, drone and robot delivery routing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy, Default)]
struct OptionFlags {
    /// Disable en-route charging.
    #[arg(long)]
    no_charging: bool,
    /// One customer per sortie.
    #[arg(long)]
    single_visit: bool,
    /// At most one sortie per vehicle.
    #[arg(long)]
    single_trip: bool,
    /// Recover every sortie on its launch truck.
    #[arg(long)]
    fixed_docking: bool,
}

impl OptionFlags {
    fn options(self) -> ModelOptions {
        ModelOptions {
            charging: !self.no_charging,
            flexible_docking: !self.fixed_docking,
            single_visit: self.single_visit,
            single_trip: self.single_trip,
            ..ModelOptions::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance.
    Generate {
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Fraction of customers the truck cannot reach.
        #[arg(long, default_value_t = 0.0)]
        unreachable_frac: f64,
        /// Fleet JSON; defaults to the standard parameters.
        #[arg(long)]
        fleet: Option<PathBuf>,
    },
    /// Export the routing model in LP format.
    ExportLp {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        flags: OptionFlags,
    },
    /// Exhaustive optimum for tiny instances.
    Exact {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 8)]
        budget_customers: usize,
        /// Seconds.
        #[arg(long, default_value_t = 600.0)]
        time_limit: f64,
        #[arg(long, default_value_t = SearchBudget::default().max_candidates)]
        max_candidates: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: OptionFlags,
    },
    /// Check a plan; exits 0 when feasible and 1 otherwise.
    Validate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[command(flatten)]
        flags: OptionFlags,
    },
    /// Heuristic plan.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "ef")]
        mode: Mode,
        /// Accepted for interface compatibility; the heuristic is deterministic.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        flags: OptionFlags,
    },
    /// Run a benchmark scenario and write CSV tables, plot data and plans.
    Bench {
        #[arg(long)]
        scenario: ScenarioKind,
        /// `start:stop:step`, a comma list, or one size.
        #[arg(long, default_value = "20:300:20")]
        sizes: String,
        #[arg(long, default_value_t = 25)]
        reps: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "ef")]
        mode: Mode,
        #[arg(long, default_value_t = 0.0)]
        unreachable_frac: f64,
        #[command(flatten)]
        flags: OptionFlags,
    },
}

fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = text.split(':').collect();
    let sizes = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step): (usize, usize, usize) = (start.parse()?, stop.parse()?, step.parse()?);
            if step == 0 {
                bail!("size step must be positive");
            }
            (start..=stop).step_by(step).collect()
        }
        [list] => list.split(',').map(|s| s.trim().parse()).collect::<std::result::Result<Vec<usize>, _>>()?,
        _ => bail!("sizes must be start:stop:step or a comma list"),
    };
    if sizes.is_empty() {
        bail!("no sizes in {text:?}");
    }
    Ok(sizes)
}

fn load_instance(path: &PathBuf) -> Result<Instance> {
    Instance::load(path).with_context(|| format!("reading instance {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate { size, seed, out, unreachable_frac, fleet } => {
            let fleet = match fleet {
                Some(p) => serde_json::from_str::<FleetSpec>(&std::fs::read_to_string(&p)?)
                    .with_context(|| format!("reading fleet {}", p.display()))?,
                None => FleetSpec::default(),
            };
            let inst = generate_instance_with(size, seed, &fleet, unreachable_frac)?;
            inst.save(&out)?;
        }
        Command::ExportLp { instance, out, flags } => {
            let inst = load_instance(&instance)?;
            let model = build_model(&inst, &inst.fleet, &flags.options())?;
            std::fs::write(&out, export_lp(&model)?)?;
            eprintln!("{} variables, {} constraints", model.variables.len(), model.constraints.len());
        }
        Command::Exact { instance, budget_customers, time_limit, max_candidates, out, flags } => {
            let inst = load_instance(&instance)?;
            let budget = SearchBudget { max_customers: budget_customers, max_candidates, time_limit };
            match solve_exact(&inst, &inst.fleet, &flags.options(), &budget)? {
                ExactOutcome::Optimal(plan) => {
                    let text = plan.to_json()?;
                    match out {
                        Some(p) => std::fs::write(p, text)?,
                        None => println!("{text}"),
                    }
                }
                ExactOutcome::Infeasible => {
                    eprintln!("infeasible");
                    return Ok(ExitCode::from(1));
                }
                ExactOutcome::BudgetExceeded(why) => {
                    eprintln!("budget exceeded: {why}");
                    return Ok(ExitCode::from(2));
                }
            }
        }
        Command::Validate { instance, plan, flags } => {
            let inst = load_instance(&instance)?;
            let plan = Plan::load(&plan).with_context(|| format!("reading plan {}", plan.display()))?;
            let report = validate(&plan, &inst, &inst.fleet, &flags.options())?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.feasible {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Solve { instance, out, mode, seed: _, flags } => {
            let inst = load_instance(&instance)?;
            let fleet = mode.apply(&inst.fleet);
            let plan = solve_finder(&inst, &fleet, &flags.options())?;
            plan.save(&out)?;
            let b = &plan.objective_breakdown;
            eprintln!("objective {:.4} cost {:.4} makespan {:.4} h", b.weighted_objective, b.operational_cost(), b.makespan);
        }
        Command::Bench { scenario, sizes, reps, seed, out, mode, unreachable_frac, flags } => {
            let mut spec = ScenarioSpec::new(scenario, parse_sizes(&sizes)?, reps, seed);
            spec.mode = mode;
            spec.unreachable_frac = unreachable_frac;
            let o = flags.options();
            spec.toggles.enroute_charging = o.charging;
            spec.toggles.flexible_docking = o.flexible_docking;
            spec.toggles.multi_visit = !o.single_visit;
            spec.toggles.multi_trip = !o.single_trip;
            let result = run_scenario(&spec)?;
            write_outputs(&result, &out)?;
            let failed = result.runs.iter().filter(|r| !r.row.feasible).count();
            eprintln!("{} runs, {failed} without a feasible plan, written to {}", result.runs.len(), out.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_specs() {
        assert_eq!(parse_sizes("20:100:40").unwrap(), vec![20, 60, 100]);
        assert_eq!(parse_sizes("5, 10").unwrap(), vec![5, 10]);
        assert_eq!(parse_sizes("7").unwrap(), vec![7]);
        assert!(parse_sizes("1:2").is_err());
        assert!(parse_sizes("1:5:0").is_err());
    }
}
