//! Diffracted-order amplitudes of an incident plane wave at the threshold.
//! Bragg incidence feeds order 1 linearly in time; off Bragg it stays bounded.
//!
//! `cargo run --release --example secular_orders`

use std::f64::consts::PI;

use ptcrystal::ladder::{evolve_orders, secular_orders, SecularThresholds};
use ptcrystal::PotentialFamily;

fn main() -> ptcrystal::Result<()> {
    let f = PotentialFamily::pt_lattice(0.2, 1.0)?.with_lambda(1.0)?;
    let kb = 2.0 * PI;
    for frac in [-0.5, 0.5, -0.3, -1.0] {
        let trace = evolve_orders(&f, 16, frac * kb, 50.0, 256)?;
        let c1 = trace.order(trace.l0 + 1).expect("order inside truncation");
        let samples: Vec<String> = [64, 128, 192, 255].iter().map(|&j| format!("{:.3}", c1[j].norm())).collect();
        let secular = secular_orders(&trace, &SecularThresholds::default())?;
        println!(
            "k = {frac:+} k_B: |c_(l0+1)| at t = 12.5, 25, 37.5, 50: {}  secular {secular:?}",
            samples.join(", ")
        );
    }
    Ok(())
}
