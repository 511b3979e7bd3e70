//! Instance generation, scenario runs, gap metrics and CSV output.

mod generate;
mod report;
mod scenario;

pub use generate::{generate_instance, generate_instance_with, AREA_KM, MAX_WEIGHT, MIN_WEIGHT};
pub use report::{emit_plot_data, mean_std, summarize, write_outputs, SummaryRow};
pub use scenario::{
    gap, run_scenario, ResultRow, RunRecord, ScenarioKind, ScenarioResult, ScenarioSpec, Solver, Sweep, SweepParameter,
    TimingRow, Toggles, Variant,
};
