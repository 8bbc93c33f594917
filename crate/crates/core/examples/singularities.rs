//! Degeneracies at the zone centre and edge, classified by the biorthogonal
//! overlap κ.
//!
//! `cargo run --release --example singularities -- [lambda]`

use std::f64::consts::PI;

use ptcrystal::singularity::{scan_singularities, Classification, DetectorSettings};
use ptcrystal::PotentialFamily;

fn main() -> ptcrystal::Result<()> {
    let lambda: f64 = std::env::args().nth(1).map_or(1.0, |s| s.parse().expect("lambda must be a number"));
    let f = PotentialFamily::pt_lattice(0.2, 1.0)?.with_lambda(lambda)?;
    let report = scan_singularities(&f, 24, &DetectorSettings::for_period(1.0))?;

    println!("{:>8} {:>14} {:>10} {:>10}  class", "q", "E/pi^2", "gap", "kappa_min");
    let paired = report.points.iter().filter(|p| p.classification != Classification::Isolated);
    let centre = paired.clone().filter(|p| p.q == 0.0).take(5);
    let edge = paired.filter(|p| p.q != 0.0).take(5);
    for p in centre.chain(edge) {
        println!(
            "{:>8.4} {:>14.6} {:>10.2e} {:>10.2e}  {}",
            p.q,
            p.energy.re / (PI * PI),
            p.gap,
            p.kappa_min,
            p.classification.as_str()
        );
    }
    // singular energies sit at (n pi)^2
    let ns: Vec<String> = report.singular_energies.iter().map(|e| format!("{:.3}", e.sqrt() / PI)).collect();
    println!("singular energies E = (n pi)^2 with n = {}", ns.join(", "));
    Ok(())
}
