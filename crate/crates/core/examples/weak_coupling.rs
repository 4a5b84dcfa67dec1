//! Small-g series against exact diagonalization.

use chiral_cavity::analysis::solve_full;
use chiral_cavity::eigen::SolverOptions;
use chiral_cavity::hilbert::TruncationSpec;
use chiral_cavity::perturbation::weak_corrections;
use chiral_cavity::{Inertia, ModelParams};

fn main() -> chiral_cavity::Result<()> {
    let trunc = TruncationSpec::new(6, 6);
    let opts = SolverOptions::default().with_tol(1e-11);
    println!(
        "{:>6} {:>6} {:>14} {:>14} {:>12} {:>12}",
        "g", "B", "E exact", "E series", "L exact", "L series"
    );
    for (g, b) in [(0.05, 0.1), (0.1, 0.1), (0.2, 0.5), (0.2, 2.0)] {
        let p = ModelParams::new(1.0, g, b, Inertia::Finite(1e6), 1);
        let w = weak_corrections(&p);
        let x = solve_full(&p, &trunc, &opts)?;
        println!(
            "{g:>6} {b:>6} {:>14.10} {:>14.10} {:>12.4e} {:>12.4e}",
            x.energy,
            w.ground_energy(&p),
            x.l_opt,
            w.l
        );
    }
    Ok(())
}
