use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::scenario::{ResultRow, ScenarioResult};
use crate::error::Result;

/// Mean and sample standard deviation (zero for fewer than two values).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub variant: String,
    pub sweep_value: Option<f64>,
    pub size: usize,
    pub runs: usize,
    pub feasible_runs: usize,
    pub mean_weighted_objective: f64,
    pub std_weighted_objective: f64,
    pub mean_operational_cost: f64,
    pub std_operational_cost: f64,
    pub mean_makespan: f64,
    pub std_makespan: f64,
    pub mean_simulated_makespan: f64,
    pub std_simulated_makespan: f64,
    pub mean_sorties: f64,
    pub std_sorties: f64,
}

fn column(rows: &[&ResultRow], f: impl Fn(&ResultRow) -> Option<f64>) -> Vec<f64> {
    rows.iter().filter_map(|r| f(r)).collect()
}

/// One row per (variant, size), in first-appearance order.
pub fn summarize(result: &ScenarioResult) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, usize)> = Vec::new();
    for r in result.rows() {
        let k = (r.variant.clone(), r.size);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(variant, size)| {
            let rows: Vec<&ResultRow> = result.rows().into_iter().filter(|r| r.variant == variant && r.size == size).collect();
            let (mo, so) = mean_std(&column(&rows, |r| r.weighted_objective));
            let (mc, sc) = mean_std(&column(&rows, |r| r.operational_cost));
            let (mm, sm) = mean_std(&column(&rows, |r| r.makespan));
            let (ms, ss) = mean_std(&column(&rows, |r| r.simulated_makespan));
            let (mn, sn) = mean_std(&column(&rows, |r| r.sorties.map(|s| s as f64)));
            SummaryRow {
                scenario: rows[0].scenario.clone(),
                variant,
                sweep_value: rows[0].sweep_value,
                size,
                runs: rows.len(),
                feasible_runs: rows.iter().filter(|r| r.feasible).count(),
                mean_weighted_objective: mo,
                std_weighted_objective: so,
                mean_operational_cost: mc,
                std_operational_cost: sc,
                mean_makespan: mm,
                std_makespan: sm,
                mean_simulated_makespan: ms,
                std_simulated_makespan: ss,
                mean_sorties: mn,
                std_sorties: sn,
            }
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, headers: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(headers)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SizePoint<'a> {
    variant: &'a str,
    size: usize,
    mean_weighted_objective: f64,
    mean_operational_cost: f64,
}

#[derive(Serialize)]
struct TimePoint<'a> {
    variant: &'a str,
    size: usize,
    mean_makespan: f64,
    mean_simulated_makespan: f64,
}

#[derive(Serialize)]
struct SweepPoint<'a> {
    parameter: &'a str,
    value: f64,
    size: usize,
    mean_weighted_objective: f64,
    mean_operational_cost: f64,
    mean_makespan: f64,
}

/// Writes `plots/objective_vs_size.csv` (variant, size, mean objective and
/// cost), `plots/makespan_vs_size.csv` (variant, size, mean model and
/// simulated makespan) and `plots/sweep.csv` (parameter, value, size, means),
/// the last one header-only without a sweep.
pub fn emit_plot_data(result: &ScenarioResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let plots = dir.join("plots");
    fs::create_dir_all(&plots)?;
    let summary = summarize(result);
    let objective: Vec<SizePoint> = summary
        .iter()
        .map(|s| SizePoint {
            variant: &s.variant,
            size: s.size,
            mean_weighted_objective: s.mean_weighted_objective,
            mean_operational_cost: s.mean_operational_cost,
        })
        .collect();
    let time: Vec<TimePoint> = summary
        .iter()
        .map(|s| TimePoint {
            variant: &s.variant,
            size: s.size,
            mean_makespan: s.mean_makespan,
            mean_simulated_makespan: s.mean_simulated_makespan,
        })
        .collect();
    let parameter = result.spec.sweep.as_ref().map_or("", |s| s.parameter.name());
    let sweep: Vec<SweepPoint> = summary
        .iter()
        .filter_map(|s| {
            Some(SweepPoint {
                parameter,
                value: s.sweep_value?,
                size: s.size,
                mean_weighted_objective: s.mean_weighted_objective,
                mean_operational_cost: s.mean_operational_cost,
                mean_makespan: s.mean_makespan,
            })
        })
        .collect();
    let paths = [
        plots.join("objective_vs_size.csv"),
        plots.join("makespan_vs_size.csv"),
        plots.join("sweep.csv"),
    ];
    write_csv(&paths[0], &["variant", "size", "mean_weighted_objective", "mean_operational_cost"], &objective)?;
    write_csv(&paths[1], &["variant", "size", "mean_makespan", "mean_simulated_makespan"], &time)?;
    write_csv(
        &paths[2],
        &["parameter", "value", "size", "mean_weighted_objective", "mean_operational_cost", "mean_makespan"],
        &sweep,
    )?;
    Ok(paths.to_vec())
}

#[derive(Serialize)]
struct RuntimeSummary<'a> {
    variant: &'a str,
    size: usize,
    mean_runtime_s: f64,
    std_runtime_s: f64,
}

/// Writes every artifact of a scenario run into `dir`:
/// `results.csv`, `summary.csv`, `plots/*.csv` and `plans/<variant>/n<size>_r<rep>.json`
/// are reproducible from the seeds; `timings.csv` and `timings_summary.csv`
/// hold wall-clock runtimes and are not.
pub fn write_outputs(result: &ScenarioResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let rows: Vec<&ResultRow> = result.rows();
    let mut w = csv::Writer::from_path(dir.join("results.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    for s in summarize(result) {
        w.serialize(s)?;
    }
    w.flush()?;

    emit_plot_data(result, dir)?;

    let mut w = csv::Writer::from_path(dir.join("timings.csv"))?;
    for r in &result.runs {
        w.serialize(&r.timing)?;
    }
    w.flush()?;
    let mut keys: Vec<(&str, usize)> = Vec::new();
    for r in &result.runs {
        let k = (r.timing.variant.as_str(), r.timing.size);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let mut w = csv::Writer::from_path(dir.join("timings_summary.csv"))?;
    for (variant, size) in keys {
        let times: Vec<f64> = result
            .runs
            .iter()
            .filter(|r| r.timing.variant == variant && r.timing.size == size)
            .map(|r| r.timing.runtime_s)
            .collect();
        let (mean_runtime_s, std_runtime_s) = mean_std(&times);
        w.serialize(RuntimeSummary { variant, size, mean_runtime_s, std_runtime_s })?;
    }
    w.flush()?;

    for r in &result.runs {
        if let Some(plan) = &r.plan {
            let sub = dir.join("plans").join(&r.row.variant);
            fs::create_dir_all(&sub)?;
            plan.save(&sub.join(format!("n{}_r{}.json", r.row.size, r.row.repetition)))?;
        }
    }
    Ok(())
}
