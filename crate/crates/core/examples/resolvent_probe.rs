//! Projected resolvent at a singular energy as the distance η to the real
//! axis shrinks. At the threshold |G| grows like 1/η; below it stays bounded.
//!
//! `cargo run --release --example resolvent_probe`

use std::f64::consts::PI;

use ptcrystal::singularity::projected_resolvent;
use ptcrystal::PotentialFamily;

fn main() -> ptcrystal::Result<()> {
    let energy = PI * PI;
    for lambda in [0.9, 1.0] {
        let f = PotentialFamily::pt_lattice(0.2, 1.0)?.with_lambda(lambda)?;
        println!("lambda = {lambda}, E = pi^2, G_(1,0):");
        let mut previous: Option<f64> = None;
        for eta in [1e-2, 2.5e-3, 6.25e-4] {
            let g = projected_resolvent(&f, 4, 1, 0, energy, eta, 1 << 18)?.value.norm();
            let ratio = previous.map_or(String::new(), |p| format!("  (x{:.2})", g / p));
            println!("  eta = {eta:.2e}  |G| = {g:.5}{ratio}");
            previous = Some(g);
        }
    }
    Ok(())
}
