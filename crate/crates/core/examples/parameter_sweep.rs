//! A two-axis sweep driven through the same config type the command-line
//! tool reads.

use chiral_cavity::cli::{task_sweep, RunConfig};
use chiral_cavity::eigen::SolverOptions;

const CONFIG: &str = r#"{
    "params": {"delta": 1.0, "g": 0.5, "b_field": 0.0, "inertia": 1e4, "n_dimers": 1},
    "trunc": {"n_max": 6, "k_max": 4},
    "sweep": [
        {"parameter": "g", "start": 0.2, "stop": 1.0, "count": 3},
        {"parameter": "b_field", "start": 0.01, "stop": 10.0, "count": 4, "spacing": "log"}
    ],
    "check_cutoffs": true
}"#;

fn main() -> chiral_cavity::Result<()> {
    let cfg = RunConfig::from_json(CONFIG)?;
    let out = task_sweep(&cfg, &SolverOptions::default(), 0)?;
    let table = &out.tables[0];
    println!("{}", table.header.join(","));
    for row in &table.rows {
        println!("{}", row.join(","));
    }
    println!("all converged: {}", out.all_converged);
    Ok(())
}
