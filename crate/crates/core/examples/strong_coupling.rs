//! Large-g regime: L against the displaced-oscillator estimate, and the
//! field at which the l-mode comes into resonance with the tunnel splitting.

use chiral_cavity::analysis::solve_aligned;
use chiral_cavity::cli::{numeric_resonance, strong_trunc};
use chiral_cavity::eigen::SolverOptions;
use chiral_cavity::perturbation::{intermediate_block, intermediate_l, resonant_field, strong_corrections};
use chiral_cavity::{Inertia, ModelParams};

fn main() -> chiral_cavity::Result<()> {
    let opts = SolverOptions::default().with_tol(1e-11);
    let trunc = strong_trunc(20);
    println!("far from resonance (B = 0.05)");
    for g in [4.0, 5.0, 6.0] {
        let p = ModelParams::new(1.0, g, 0.05, Inertia::Frozen, 1);
        let l = solve_aligned(&p, &trunc, &opts)?.l_opt;
        println!("  g = {g}: L = {l:.6e}, L1 = {:.6e}", strong_corrections(&p).l1);
    }

    println!("at resonance");
    for g in [8.0, 12.0] {
        let p = ModelParams::new(1.0, g, 0.0, Inertia::Frozen, 1);
        let Some(b) = resonant_field(&p, 1e3)? else { continue };
        let (b_num, l_max) = numeric_resonance(&p, b, &trunc, &opts)?;
        let pr = p.with_b(b);
        println!(
            "  g = {g}: B_res = {b:.4}, argmax B = {b_num:.4}, L max = {l_max:.5}, two-level {:.5}, 9-level block {:.5}",
            intermediate_l(pr.derived().q),
            intermediate_block(&pr, 9)?.l
        );
    }
    Ok(())
}
