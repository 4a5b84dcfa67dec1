//! Born-Oppenheimer rotors: the ground energy of two dimers as a function of
//! their relative angle, and the rotor wavefunction it binds.

use chiral_cavity::bo::{harmonic_dispersion, mathieu_ground, potential_surface, write_surface_csv, SurfaceSource};
use chiral_cavity::hilbert::TruncationSpec;
use chiral_cavity::{Inertia, ModelParams};

fn main() -> chiral_cavity::Result<()> {
    let j = 1e7;
    let p = ModelParams::new(1.0, 0.5, 0.0, Inertia::Finite(j), 2);
    let trunc = TruncationSpec::new(6, 0);
    let exact = potential_surface(&p, 128, SurfaceSource::ExactDicke, &trunc)?;
    let rpa = potential_surface(&p, 128, SurfaceSource::RpaG4, &trunc)?;
    println!(
        "surface depth: exact {:.6e}, g⁴ formula {:.6e}",
        exact.amplitude(),
        rpa.amplitude()
    );

    // the relative angle carries half the moment of inertia
    let ground = mathieu_ground(&exact, j / 2.0)?;
    println!(
        "rotor ground: E = {:.12}, angular spread {:.4} rad, harmonic estimate {:.4} rad",
        ground.energy,
        ground.angle_dispersion,
        harmonic_dispersion(exact.amplitude(), j / 2.0)
    );
    write_surface_csv(&exact, Some(&ground), std::io::stdout().lock())
}
