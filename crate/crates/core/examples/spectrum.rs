//! Low-lying levels of one sector by thick-restart Lanczos, checked against
//! dense diagonalization.

use std::sync::Arc;

use chiral_cavity::eigen::{low_spectrum_with, SolverMethod, SolverOptions};
use chiral_cavity::hamiltonian::build_circular;
use chiral_cavity::hilbert::{build_basis, TruncationSpec};
use chiral_cavity::{Inertia, ModelParams};

fn main() -> chiral_cavity::Result<()> {
    let p = ModelParams::new(1.0, 2.0, 0.3, Inertia::Finite(3.0), 2);
    let basis = Arc::new(build_basis(&TruncationSpec::new(8, 4).in_sector(0), 2)?);
    let h = build_circular(&p, &basis)?;
    println!("dimension {}", h.dimension());
    let opts = SolverOptions::default().with_tol(1e-10);
    let lanczos = low_spectrum_with(&h, 6, &opts.with_method(SolverMethod::Lanczos))?;
    let dense = low_spectrum_with(&h, 6, &opts.with_method(SolverMethod::Dense))?;
    println!("{:>18} {:>18} {:>10}", "lanczos", "dense", "residual");
    for (a, b) in lanczos.iter().zip(&dense) {
        println!("{:>18.12} {:>18.12} {:>10.1e}", a.energy, b.energy, a.residual);
    }
    Ok(())
}
