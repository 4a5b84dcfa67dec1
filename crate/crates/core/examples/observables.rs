//! Observables of a frozen-angle ground state: photon numbers, optical
//! angular momentum and its spread, and the alignment parameter Z.

use std::sync::Arc;

use chiral_cavity::eigen::ground_state;
use chiral_cavity::hamiltonian::build_frozen;
use chiral_cavity::hilbert::{build_frozen_basis, TruncationSpec};
use chiral_cavity::observables::{alignment_z, measure};
use chiral_cavity::{Inertia, ModelParams};

fn main() -> chiral_cavity::Result<()> {
    let p = ModelParams::new(1.0, 0.6, 0.3, Inertia::Frozen, 2);
    let basis = Arc::new(build_frozen_basis(&TruncationSpec::new(8, 0), 2)?);
    for phi in [0.0, 0.4, std::f64::consts::FRAC_PI_2] {
        let angles = [0.0, phi];
        let h = build_frozen(&p, &basis, &angles)?;
        let gs = ground_state(&h, 1e-10)?;
        let o = measure(&h, &gs.state)?;
        println!(
            "φ = {phi:.3}  |Z| = {:.3}  E = {:.10}  n_r = {:.4e}  n_l = {:.4e}  L = {:.4e}  ΔL = {:.4e}",
            alignment_z(&angles).norm(),
            gs.energy,
            o.n_r,
            o.n_l,
            o.l_opt,
            o.dl_opt
        );
    }
    Ok(())
}
