//! Largest imaginary part of the spectrum versus λ, and the bisected
//! symmetry-breaking threshold.
//!
//! `cargo run --release --example lambda_scan`

use ptcrystal::singularity::{find_lambda_c, max_imag_energy, DetectorSettings};
use ptcrystal::PotentialFamily;

fn main() -> ptcrystal::Result<()> {
    let settings = DetectorSettings::for_period(1.0);
    for v0 in [0.1, 0.2, 0.5] {
        let f = PotentialFamily::pt_lattice(v0, 1.0)?;
        print!("V0 = {v0}:");
        for lambda in [0.9, 0.99, 1.0, 1.01, 1.1] {
            let im = max_imag_energy(&f.clone().with_lambda(lambda)?, 16, settings.scan_points)?;
            print!("  {lambda}: {im:.2e}");
        }
        let lc = find_lambda_c(&f, 16, 0.5, 1.5, 1e-4, &settings)?;
        println!("\n  lambda_c = {lc:.5}");
    }
    Ok(())
}
