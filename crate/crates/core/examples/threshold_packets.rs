//! Packet peak below, at and above the threshold: bounded, linear-then-flat,
//! and exponential.
//!
//! `cargo run --release --example threshold_packets`

use ptcrystal::packet::{run_packet, PacketRun};

fn main() -> ptcrystal::Result<()> {
    for lambda in [0.9, 1.0, 1.1] {
        let run = PacketRun {
            t_end: 20.0,
            ..PacketRun::new(80.0, 0.2, lambda)
        };
        let outcome = run_packet(&run, |_| Ok(()))?;
        let row: Vec<String> = [5.0, 10.0, 15.0, 20.0]
            .iter()
            .map(|&t| format!("{:.3}", outcome.peaks.at(t).unwrap_or(f64::NAN)))
            .collect();
        println!("lambda = {lambda}: psi_m at t = 5, 10, 15, 20: {}", row.join(", "));
    }
    Ok(())
}
