//! Complex band structure of the lattice below, at and above the threshold.
//!
//! `cargo run --release --example band_structure -- [v0]`

use ptcrystal::bloch::{band_structure, folded_parabola, zone_grid};
use ptcrystal::PotentialFamily;

fn main() -> ptcrystal::Result<()> {
    let v0: f64 = std::env::args().nth(1).map_or(0.2, |s| s.parse().expect("v0 must be a number"));
    let base = PotentialFamily::pt_lattice(v0, 1.0)?;
    let grid = zone_grid(41, 1.0);

    for lambda in [0.5, 1.0, 1.5] {
        let f = base.clone().with_lambda(lambda)?;
        let bands = band_structure(&f, 16, &grid)?;
        let max_im = bands
            .iter()
            .flat_map(|b| b.eigenvalues.iter().map(|e| e.im.abs()))
            .fold(0.0, f64::max);
        println!("lambda = {lambda}: max |Im E| = {max_im:.3e}");
        let edge = &bands[0];
        let low: Vec<String> = edge.eigenvalues[..4].iter().map(|e| format!("{:.4}{:+.4}i", e.re, e.im)).collect();
        println!("  lowest at q = -pi: {}", low.join("  "));
    }

    // at the threshold the bands are the folded free parabola
    let f = base.with_lambda(1.0)?;
    let q = 0.37;
    let got = &band_structure(&f, 16, &[q])?[0].eigenvalues;
    let free = folded_parabola(q, f.bragg(), 16);
    let dev = got.iter().zip(&free).map(|(e, p)| (e.re - p).abs().max(e.im.abs())).fold(0.0, f64::max);
    println!("lambda = 1 at q = {q}: deviation from free parabola {dev:.1e}");
    Ok(())
}
