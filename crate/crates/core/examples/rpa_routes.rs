//! The large-N energy by the polariton polynomial, the imaginary-frequency
//! integral and the zero-field closed form, and its dependence on the
//! relative orientation of the dimers.

use std::f64::consts::FRAC_PI_3;

use chiral_cavity::observables::alignment_z;
use chiral_cavity::rpa::{rpa_angle_correction, rpa_energy, rpa_energy_b0_closed, rpa_energy_integral};
use chiral_cavity::{Inertia, ModelParams};
use num_complex::Complex64;

fn main() -> chiral_cavity::Result<()> {
    for (g, b) in [(0.1, 0.0), (0.5, 0.0), (0.5, 0.8)] {
        let p = ModelParams::new(1.0, g, b, Inertia::Frozen, 1);
        for z in [0.0, 1.0] {
            let zc = Complex64::new(z, 0.0);
            let poly = rpa_energy(&p, zc)?;
            let int = rpa_energy_integral(&p, zc)?;
            let closed = if b == 0.0 {
                rpa_energy_b0_closed(&p, z).ok()
            } else {
                None
            };
            println!(
                "g = {g} B = {b} Z = {z}: polynomial {:.12e}  integral {:.12e}  closed {}",
                poly.delta_e,
                int.delta_e,
                closed.map(|c| format!("{c:.12e}")).unwrap_or_else(|| "-".into())
            );
            println!("    polaritons {:?}", poly.polariton_freqs.unwrap());
        }
    }

    let p = ModelParams::new(1.0, 0.1, 0.0, Inertia::Frozen, 3);
    for angles in [[0.0, 0.0, 0.0], [0.0, 0.5, 1.0], [0.0, FRAC_PI_3, 2.0 * FRAC_PI_3]] {
        println!(
            "angles {angles:?}: |Z| = {:.4}, orientation energy {:.6e}",
            alignment_z(&angles).norm(),
            rpa_angle_correction(&p, &angles)?
        );
    }
    Ok(())
}
