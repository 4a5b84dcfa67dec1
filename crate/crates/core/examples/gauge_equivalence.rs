//! The dipole-gauge and circular-mode Hamiltonians share a spectrum once the
//! total photon number is capped, and the mode transformation is symplectic.

use std::sync::Arc;

use chiral_cavity::eigen::low_spectrum;
use chiral_cavity::hamiltonian::{bogoliubov, build_circular, build_dipole};
use chiral_cavity::hilbert::{build_basis, build_linear_basis, TruncationSpec};
use chiral_cavity::{Inertia, ModelParams};

fn main() -> chiral_cavity::Result<()> {
    let p = ModelParams::new(1.0, 0.8, 0.4, Inertia::Finite(2.0), 1);
    let t = TruncationSpec::new(4, 4).with_n_total(4);

    let lin = Arc::new(build_linear_basis(&t, 1)?);
    let dipole = low_spectrum(&build_dipole(&p, &lin)?, 4)?;

    // the circular Hamiltonian is block diagonal in 𝓛; merge every block
    let mut circ: Vec<f64> = Vec::new();
    for sector in -12..=12 {
        if let Ok(b) = build_basis(&t.in_sector(sector), 1) {
            let h = build_circular(&p, &Arc::new(b))?;
            circ.extend(low_spectrum(&h, 4.min(h.dimension()))?.iter().map(|e| e.energy));
        }
    }
    circ.sort_by(f64::total_cmp);

    println!("{:>4} {:>20} {:>20}", "n", "dipole", "circular");
    for (i, e) in dipole.iter().enumerate() {
        println!("{i:>4} {:>20.14} {:>20.14}", e.energy, circ[i]);
    }
    for b in [0.0, 0.5, 3.0] {
        println!(
            "B = {b}: symplectic residual {:.2e}",
            bogoliubov(b).symplectic_residual()
        );
    }
    Ok(())
}
