//! CSV artifacts and companion plot scripts.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a rerun
//! with the same inputs reproduces every file byte for byte.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::bloch::BandPoint;
use crate::error::Result;
use crate::ladder::DiffractionTrace;
use crate::packet::{PeakTrace, WaveField};
use crate::singularity::PointRecord;
use crate::Complex64;

/// Shortest round-trip text for `v`, in scientific notation outside
/// `[1e-4, 1e15)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// `q, band_index, re_E, im_E, kappa`
pub fn write_bands(path: &Path, points: &[BandPoint]) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "q,band_index,re_E,im_E,kappa")?;
    for p in points {
        writeln!(out, "{},{},{},{},{}", num(p.q), p.band, num(p.energy.re), num(p.energy.im), num(p.kappa))?;
    }
    out.flush()?;
    Ok(())
}

/// `lambda, q, E_re, gap, kappa_min, classification`
pub fn write_defects(path: &Path, rows: &[(f64, PointRecord)]) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "lambda,q,E_re,gap,kappa_min,classification")?;
    for (lambda, r) in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            num(*lambda),
            num(r.q),
            num(r.energy.re),
            num(r.gap),
            num(r.kappa_min),
            r.classification.as_str()
        )?;
    }
    out.flush()?;
    Ok(())
}

/// `eta, re_G, im_G, abs_G`
pub fn write_resolvent(path: &Path, rows: &[(f64, Complex64)]) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "eta,re_G,im_G,abs_G")?;
    for (eta, g) in rows {
        writeln!(out, "{},{},{},{}", num(*eta), num(g.re), num(g.im), num(g.norm()))?;
    }
    out.flush()?;
    Ok(())
}

/// `t, l, re_c, im_c, abs_c` for every record and order.
pub fn write_trace(path: &Path, trace: &DiffractionTrace) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "t,l,re_c,im_c,abs_c")?;
    for (t, amps) in trace.times.iter().zip(&trace.amplitudes) {
        for (l, c) in trace.orders().zip(amps) {
            writeln!(out, "{},{},{},{},{}", num(*t), l, num(c.re), num(c.im), num(c.norm()))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `x, re_psi, im_psi, abs_psi` after a `#` header carrying `t, lambda, V0, w`.
/// Every `stride`-th grid point is written.
pub fn write_field(path: &Path, field: &WaveField, lambda: f64, v0: f64, w: f64, stride: usize) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "# t={},lambda={},V0={},w={}", num(field.time), num(lambda), num(v0), num(w))?;
    writeln!(out, "x,re_psi,im_psi,abs_psi")?;
    for (j, z) in field.values.iter().enumerate().step_by(stride.max(1)) {
        writeln!(out, "{},{},{},{}", num(field.grid.x(j)), num(z.re), num(z.im), num(z.norm()))?;
    }
    out.flush()?;
    Ok(())
}

/// `t, psi_m`
pub fn write_peaks(path: &Path, trace: &PeakTrace) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "t,psi_m")?;
    for (t, v) in trace.times.iter().zip(&trace.values) {
        writeln!(out, "{},{}", num(*t), num(*v))?;
    }
    out.flush()?;
    Ok(())
}

/// Generic table with a header row.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| num(*v)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut out = create(path)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

const PLOT_PRELUDE: &str = r##"import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent


def load(name):
    with open(HERE / name) as fh:
        rows = [line for line in fh if not line.startswith("#")]
    return [
        {k: (v if k == "classification" else float(v)) for k, v in r.items()}
        for r in csv.DictReader(rows)
    ]


def space_time(ax, rows):
    ts = sorted(set(r["t"] for r in rows))
    xs = sorted(set(r["x"] for r in rows))
    ti = {t: i for i, t in enumerate(ts)}
    xi = {x: i for i, x in enumerate(xs)}
    z = [[0.0] * len(xs) for _ in ts]
    for r in rows:
        z[ti[r["t"]]][xi[r["x"]]] = r["abs_psi"]
    ax.pcolormesh(xs, ts, z, shading="auto")
    ax.set_xlabel("x")
    ax.set_ylabel("t")

"##;

const FIG1B_BODY: &str = r##"
bands = load("bands.csv")
defects = [r for r in load("defects.csv") if r["classification"] == "defective"]
fig, ax = plt.subplots(figsize=(4, 5))
nb = int(max(r["band_index"] for r in bands)) + 1
for b in range(min(nb, 10)):
    pts = [r for r in bands if int(r["band_index"]) == b]
    ax.plot([r["q"] for r in pts], [r["re_E"] for r in pts], "k-", lw=0.8)
ax.plot([r["q"] for r in defects], [r["E_re"] for r in defects], "o", mfc="none", mec="r")
ax.set_xlabel("q")
ax.set_ylabel("E")
ax.set_ylim(0, 100)
fig.tight_layout()
fig.savefig(HERE / "fig1b.png", dpi=150)
"##;

const FIG2_BODY: &str = r##"
profiles = load("profiles.csv")
fig, (a, b) = plt.subplots(2, 1, figsize=(5, 7))
space_time(a, load("map.csv"))
for t in sorted(set(r["t"] for r in profiles)):
    pts = [r for r in profiles if r["t"] == t]
    x = [r["x"] for r in pts]
    (line,) = b.plot(x, [r["abs_psi"] for r in pts], lw=1, label=f"t={t:g}")
    b.plot(x, [r["abs_free"] for r in pts], "--", color=line.get_color(), lw=0.8)
    b.plot(x, [r["abs_asymptotic"] for r in pts], ":", color=line.get_color(), lw=0.8)
b.set_xlabel("x")
b.set_ylabel("|psi|")
b.legend()
fig.tight_layout()
fig.savefig(HERE / "fig2.png", dpi=150)
"##;

const FIG3_BODY: &str = r##"
fig, ax = plt.subplots(figsize=(5, 4))
for i, w in enumerate(WIDTHS):
    rows = load(f"peaks_w{w:g}.csv")
    ax.plot([r["t"] for r in rows], [r["psi_m"] for r in rows], label=f"{i + 1}: w={w:g}")
ax.set_xlabel("t")
ax.set_ylabel("psi_m")
ax.legend()
fig.tight_layout()
fig.savefig(HERE / "fig3.png", dpi=150)
"##;

const MAP_AND_PEAKS_BODY: &str = r##"
peaks = load("peaks.csv")
fig, (a, b) = plt.subplots(2, 1, figsize=(5, 7))
space_time(a, load("map.csv"))
b.plot([r["t"] for r in peaks], [r["psi_m"] for r in peaks])
b.set_xlabel("t")
b.set_ylabel("psi_m")
fig.tight_layout()
fig.savefig(HERE / "NAME.png", dpi=150)
"##;

/// Band diagram with defective points circled.
pub fn fig1b_script() -> String {
    format!("{PLOT_PRELUDE}{FIG1B_BODY}")
}

/// Space-time map plus profiles with the free packet and the asymptotic
/// first-order beam.
pub fn fig2_script() -> String {
    format!("{PLOT_PRELUDE}{FIG2_BODY}")
}

/// `ψ_m(t)` for each packet width.
pub fn fig3_script(widths: &[f64]) -> String {
    let list: Vec<String> = widths.iter().map(|w| format!("{w}")).collect();
    let body = FIG3_BODY.replace("WIDTHS", &format!("[{}]", list.join(", ")));
    format!("{PLOT_PRELUDE}{body}")
}

/// Space-time map and `ψ_m(t)` for one value of `λ`.
pub fn map_and_peaks_script(name: &str) -> String {
    format!("{PLOT_PRELUDE}{}", MAP_AND_PEAKS_BODY.replace("NAME", name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packet::Grid;

    #[test]
    fn field_header_and_stride() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/field.csv");
        let field = WaveField {
            grid: Grid::new(16.0, 16).unwrap(),
            values: vec![Complex64::new(3.0, 4.0); 16],
            time: 2.5,
        };
        write_field(&path, &field, 1.0, 0.2, 80.0, 4).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# t=2.5,lambda=1,V0=0.2,w=80");
        assert_eq!(lines[1], "x,re_psi,im_psi,abs_psi");
        assert_eq!(lines[2], "-8,3,4,5");
        assert_eq!(lines.len(), 6);
    }

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, 1.0, -2.5, 1e-300, 3.3e-5, 123456.789, 2e20, f64::MIN_POSITIVE] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(1e-63), "1e-63");
        assert_eq!(num(10.0), "10");
    }

    #[test]
    fn scripts_reference_their_inputs() {
        assert!(fig1b_script().contains("bands.csv"));
        assert!(fig3_script(&[40.0, 80.0]).contains("[40, 80]"));
        assert!(map_and_peaks_script("fig4").contains("fig4.png"));
    }
}
