//! Find the ground-state sector, solve it and report the angular momenta.

use chiral_cavity::analysis::{check_convergence, solve_full};
use chiral_cavity::eigen::{ground_sector_scan, SolverOptions};
use chiral_cavity::hilbert::TruncationSpec;
use chiral_cavity::{Inertia, ModelParams};

fn main() -> chiral_cavity::Result<()> {
    let p = ModelParams::new(1.0, 1.5, 0.5, Inertia::Finite(5.0), 1);
    let trunc = TruncationSpec::new(8, 6);

    let scan = ground_sector_scan(&p, &trunc)?;
    for (s, e) in &scan.energies {
        println!("sector {s:>3}: E = {e:.12}");
    }
    let t = trunc.in_sector(scan.best_sector);
    let opts = SolverOptions::default();
    let g = solve_full(&p, &t, &opts)?;
    println!("\nbest sector {}", scan.best_sector);
    println!("E      = {:.12}", g.energy);
    println!("L_opt  = {:.6e}  (ΔL = {:.6e})", g.l_opt, g.dl_opt);
    println!("L_mech = {:.6e}", g.l_mech.unwrap_or(f64::NAN));
    println!(
        "dim {}  residual {:.1e}  converged {}",
        g.dimension, g.residual, g.converged
    );

    let c = check_convergence(|t| Ok(solve_full(&p, t, &opts)?.energy), &t, 1e-8)?;
    println!("energy change with larger cutoffs: {:.2e}", c.change);
    Ok(())
}
