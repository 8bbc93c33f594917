//! First-order Born field against the split-step order-1 component and the
//! late-time boxcar form.
//!
//! `cargo run --release --example born_vs_asymptotic`

use ptcrystal::packet::{asymptotic_psi1, born_psi1, order_filter, run_packet, Grid, PacketRun, SpectrumProfile};

fn main() -> ptcrystal::Result<()> {
    // the boxcar form needs k_B t well beyond the packet width
    let (w, v0, t) = (40.0, 0.05, 80.0);
    let run = PacketRun {
        t_end: t,
        grid: Grid::new(4096.0, 32768)?,
        ..PacketRun::new(w, v0, 1.0)
    };
    let outcome = run_packet(&run, |_| Ok(()))?;
    let numeric = order_filter(&outcome.field, 1, run.period);
    let spectrum = SpectrumProfile::bragg_centred(w, run.period);
    let born = born_psi1(&spectrum, t, run.grid, run.period)?;

    println!("{:>8} {:>12} {:>12} {:>12}", "x", "split-step", "V0*Born", "asymptotic");
    for x in [-600.0, -480.0, -240.0, 0.0, 240.0, 480.0, 600.0] {
        let j = ((x + run.grid.length / 2.0) / run.grid.dx()).round() as usize;
        let a = asymptotic_psi1(&spectrum, t, run.grid.x(j), run.period);
        println!(
            "{:>8.1} {:>12.5} {:>12.5} {:>12.5}{}",
            run.grid.x(j),
            numeric.values[j].norm(),
            v0 * born[j].norm(),
            v0 * a.value.norm(),
            if a.valid { "" } else { "  (outside validity)" }
        );
    }
    Ok(())
}
