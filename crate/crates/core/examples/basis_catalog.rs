//! Enumerate the truncated Hilbert space sector by sector and dump one
//! catalog as CSV.

use chiral_cavity::hilbert::{build_basis, build_frozen_basis, sector_scan_range, TruncationSpec};

fn main() -> chiral_cavity::Result<()> {
    let trunc = TruncationSpec::new(3, 2);
    for n in [1, 2] {
        println!("N = {n}");
        for sector in sector_scan_range(&trunc) {
            match build_basis(&trunc.in_sector(sector), n) {
                Ok(b) => println!("  sector {sector:>3}: {} states", b.dimension()),
                Err(e) => println!("  sector {sector:>3}: {e}"),
            }
        }
        let frozen = build_frozen_basis(&trunc, n)?;
        println!("  frozen angles: {} states", frozen.dimension());
    }

    let small = build_basis(&TruncationSpec::new(1, 1).in_sector(0), 1)?;
    small.write_csv(std::io::stdout().lock())?;
    Ok(())
}
