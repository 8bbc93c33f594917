//! A Bragg-incident Gaussian packet at the threshold: the peak grows, then
//! saturates once the first-order beam leaves the packet.
//!
//! `cargo run --release --example packet_saturation -- [w]`

use ptcrystal::packet::{onset_time, plateau_amplitude, run_packet, PacketRun, SpectrumProfile};

fn main() -> ptcrystal::Result<()> {
    let w: f64 = std::env::args().nth(1).map_or(80.0, |s| s.parse().expect("w must be a number"));
    let run = PacketRun::new(w, 0.2, 1.0);
    let outcome = run_packet(&run, |_| Ok(()))?;

    let plateau = plateau_amplitude(run.v0, &SpectrumProfile::bragg_centred(w, run.period), run.period);
    println!("w = {w}, analytic order-1 plateau {plateau:.4}");
    for t in [0.0, 5.0, 10.0, 20.0, 30.0, 40.0] {
        println!(
            "  t = {t:>4}: psi_m = {:.4}, order-1 peak = {:.4}",
            outcome.peaks.at(t).unwrap_or(f64::NAN),
            outcome.order1_peaks.at(t).unwrap_or(f64::NAN)
        );
    }
    match onset_time(&outcome.order1_peaks, plateau, 0.9) {
        Some(t) => println!("90% of the plateau reached at t = {t:.1}"),
        None => println!("plateau not reached before t = {}", run.t_end),
    }
    Ok(())
}
