#![allow(dead_code)]

use std::process::Command;

use vrpdr_core::model::{FleetSpec, Instance, Node, Point};

pub fn node(id: usize, x: f64, y: f64, weight: f64) -> Node {
    Node { id, x, y, weight, truck_reachable: true }
}

/// Depot at the origin and customers `(x, y, weight)` numbered from 1.
pub fn instance(customers: &[(f64, f64, f64)], fleet: &FleetSpec) -> Instance {
    let nodes = customers.iter().enumerate().map(|(k, &(x, y, w))| node(k + 1, x, y, w)).collect();
    Instance::new(Point::new(0.0, 0.0), nodes, fleet.clone(), 0).unwrap()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Optimal objective of an LP file from HiGHS through python, or `None`
/// when the solver is not installed.
pub fn highs_objective(lp_path: &std::path::Path) -> Option<Result<f64, String>> {
    const SCRIPT: &str = "import sys\n\
try:\n    import highspy\nexcept ImportError:\n    sys.exit(3)\n\
h = highspy.Highs()\n\
h.setOptionValue('output_flag', False)\n\
h.setOptionValue('mip_rel_gap', 0.0)\n\
h.setOptionValue('mip_abs_gap', 0.0)\n\
h.readModel(sys.argv[1])\n\
h.run()\n\
print(h.modelStatusToString(h.getModelStatus()))\n\
print(repr(h.getInfo().objective_function_value))\n";
    let out = Command::new("python3").arg("-c").arg(SCRIPT).arg(lp_path).output().ok()?;
    if out.status.code() == Some(3) {
        return None;
    }
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    let status = lines.next().unwrap_or("").trim().to_string();
    if status != "Optimal" {
        return Some(Err(format!("solver status {status:?} {}", String::from_utf8_lossy(&out.stderr))));
    }
    let value = lines.next().and_then(|l| l.trim().parse::<f64>().ok());
    Some(value.ok_or_else(|| "unreadable objective".to_string()))
}
