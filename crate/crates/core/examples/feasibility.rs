//! Orientation potential in physical units for a 100 meV cavity.

use chiral_cavity::cli::feasibility;
use chiral_cavity::{Inertia, ModelParams};

fn main() -> chiral_cavity::Result<()> {
    for g in [0.1, 0.3] {
        let p = ModelParams::new(1.0, g, 0.0, Inertia::Frozen, 2);
        let f = feasibility(100.0, &p, 100)?;
        println!("g = {g}");
        println!(
            "  two dimers: {:.4e} μeV (quoted {} μeV)",
            f.height_uev, f.quoted_height_uev
        );
        println!(
            "  one of {}: {:.4e} meV (quoted {} meV), {:.4e} K (quoted {} K)",
            f.n_scaled, f.scaled_height_mev, f.quoted_scaled_height_mev, f.temperature_k, f.quoted_temperature_k
        );
    }
    Ok(())
}
