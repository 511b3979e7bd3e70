use std::fs;
use std::path::Path;

use proptest::prelude::*;
use vrpdr_core::bench::{
    emit_plot_data, gap, generate_instance, generate_instance_with, mean_std, run_scenario, summarize, write_outputs,
    ScenarioKind, ScenarioSpec, AREA_KM, MAX_WEIGHT, MIN_WEIGHT,
};
use vrpdr_core::model::FleetSpec;
use vrpdr_core::Error;

#[test]
fn generator_is_seeded_and_bounded() {
    let fleet = FleetSpec::default();
    let a = generate_instance(50, 9, &fleet);
    assert_eq!(a, generate_instance(50, 9, &fleet));
    assert_ne!(a, generate_instance(50, 10, &fleet));
    assert_eq!(a.seed, 9);
    assert_eq!(a.nodes.len(), 51);
    for n in &a.nodes {
        assert!((0.0..=AREA_KM).contains(&n.x) && (0.0..=AREA_KM).contains(&n.y));
    }
    for c in a.customers() {
        assert!((MIN_WEIGHT..=MAX_WEIGHT).contains(&c.weight));
        assert!(c.truck_reachable);
    }
    let empty = generate_instance(0, 9, &fleet);
    assert_eq!(empty.nodes.len(), 1);
    assert_eq!(empty.nodes[0].x, a.nodes[0].x);
}

#[test]
fn generated_weights_average_the_midpoint() {
    let inst = generate_instance(10_000, 1, &FleetSpec::default());
    let mean = inst.customers().iter().map(|c| c.weight).sum::<f64>() / 10_000.0;
    assert!((mean - 5.25).abs() < 0.1, "{mean}");
}

#[test]
fn unreachable_fraction_is_honoured() {
    let fleet = FleetSpec::default();
    let all = generate_instance_with(40, 2, &fleet, 1.0).unwrap();
    assert!(all.customers().iter().all(|c| !c.truck_reachable));
    let some = generate_instance_with(4000, 2, &fleet, 0.3).unwrap();
    let share = some.customers().iter().filter(|c| !c.truck_reachable).count() as f64 / 4000.0;
    assert!((share - 0.3).abs() < 0.03, "{share}");
    for bad in [-0.1, 1.5, f64::NAN] {
        assert!(matches!(generate_instance_with(5, 2, &fleet, bad), Err(Error::Config(_))));
    }
}

#[test]
fn gap_examples() {
    let oracle = (88.34 - 79.31) / 79.31 * 100.0;
    assert!((gap(79.31, 88.34).unwrap() - oracle).abs() < 1e-12);
    assert!((gap(79.31, 88.34).unwrap() - 11.39).abs() < 0.005);
    assert!((gap(274.85, 288.17).unwrap() - 4.85).abs() < 0.005);
    assert_eq!(gap(10.0, 10.0).unwrap(), 0.0);
    assert!(matches!(gap(0.0, 1.0), Err(Error::Domain(_))));
    assert!(matches!(gap(-2.0, 1.0), Err(Error::Domain(_))));
}

/// Sample standard deviation by the textbook shortcut formula.
fn std_oracle(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let s: f64 = v.iter().sum();
    let sq: f64 = v.iter().map(|x| x * x).sum();
    ((sq - s * s / n) / (n - 1.0)).max(0.0).sqrt()
}

#[test]
fn mean_std_examples() {
    assert_eq!(mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).0, 5.0);
    assert!((mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).1 - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
    assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
    let (m, s) = mean_std(&[]);
    assert!(m.is_nan() && s.is_nan());
}

proptest! {
    #[test]
    fn mean_std_matches_oracle(v in prop::collection::vec(-1e3..1e3f64, 2..40)) {
        let (m, s) = mean_std(&v);
        prop_assert!((m - v.iter().sum::<f64>() / v.len() as f64).abs() < 1e-9);
        prop_assert!((s - std_oracle(&v)).abs() < 1e-6);
    }
}

#[test]
fn scenario_shapes() {
    let modes = run_scenario(&ScenarioSpec::new(ScenarioKind::Modes, vec![8], 2, 11)).unwrap();
    let summary = summarize(&modes);
    assert_eq!(summary.iter().map(|s| s.variant.as_str()).collect::<Vec<_>>(), ["to", "td", "tr", "ef"]);
    assert!(summary.iter().all(|s| s.runs == 2 && s.feasible_runs == 2));
    // Variants of one repetition see the same instance.
    let seeds: Vec<u64> = modes.rows().iter().filter(|r| r.repetition == 1).map(|r| r.seed).collect();
    assert!(seeds.windows(2).all(|w| w[0] == w[1]));

    let sweep = run_scenario(&ScenarioSpec::new(ScenarioKind::Sweep, vec![8], 1, 11)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_plot_data(&sweep, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("plots/sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().skip(1).all(|l| l.starts_with("drone_count,")));

    let dir = tempfile::tempdir().unwrap();
    emit_plot_data(&modes, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("plots/sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("parameter,value,size"));
}

#[test]
fn bad_specs_are_config_errors() {
    assert!(matches!(run_scenario(&ScenarioSpec::new(ScenarioKind::Visits, vec![5], 0, 1)), Err(Error::Config(_))));
    assert!(matches!(run_scenario(&ScenarioSpec::new(ScenarioKind::Visits, vec![], 1, 1)), Err(Error::Config(_))));
    assert!("nope".parse::<ScenarioKind>().is_err());
    for k in ScenarioKind::ALL {
        assert_eq!(k.name().parse::<ScenarioKind>().unwrap(), k);
    }
}

fn listing(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if !path.file_name().unwrap().to_string_lossy().starts_with("timings") {
                out.push((path.strip_prefix(root).unwrap().display().to_string(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn reruns_write_identical_bytes() {
    let spec = ScenarioSpec::new(ScenarioKind::Charging, vec![6, 12], 2, 77);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_outputs(&run_scenario(&spec).unwrap(), a.path()).unwrap();
    write_outputs(&run_scenario(&spec).unwrap(), b.path()).unwrap();
    let (la, lb) = (listing(a.path()), listing(b.path()));
    assert!(la.iter().any(|(p, _)| p == "results.csv"));
    assert!(la.iter().any(|(p, _)| p.starts_with("plans")));
    assert_eq!(la, lb);
    assert!(a.path().join("timings.csv").exists() && a.path().join("timings_summary.csv").exists());
}

#[test]
fn gap_scenario_pairs_exact_with_finder() {
    let result = run_scenario(&ScenarioSpec::new(ScenarioKind::Gap, vec![4], 3, 5)).unwrap();
    let rows = result.rows();
    for rep in 0..3 {
        let obj = |v: &str| rows.iter().find(|r| r.variant == v && r.repetition == rep).unwrap().weighted_objective.unwrap();
        assert!(obj("exact") <= obj("finder") + 1e-9);
    }
}
