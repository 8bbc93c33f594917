//! Acceptance checks, one line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so that the verdict lines are
//! always printed; the process fails if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use ptcrystal::bloch::{band_structure, folded_parabola, zone_grid};
use ptcrystal::cli;
use ptcrystal::ladder::{detect_secular, evolve_orders, line_fit, SecularThresholds};
use ptcrystal::packet::{
    init_gaussian, onset_time, plateau_amplitude, propagate, run_packet, Grid, PacketOutcome, PacketRun,
    SpectrumProfile,
};
use ptcrystal::singularity::{
    find_lambda_c, max_imag_energy, projected_resolvent, scan_singularities, Classification, DetectorSettings,
};
use ptcrystal::PotentialFamily;

type Outcome = Result<String, String>;

fn pt(v0: f64, lambda: f64) -> PotentialFamily {
    PotentialFamily::pt_lattice(v0, 1.0).unwrap().with_lambda(lambda).unwrap()
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn band_exactness() -> Outcome {
    let start = Instant::now();
    let grid = zone_grid(101, 1.0);
    let solutions = band_structure(&pt(0.2, 1.0), 24, &grid).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut worst: f64 = 0.0;
    for s in &solutions {
        let exact = folded_parabola(s.q, 2.0 * PI, 24);
        for b in 0..10 {
            worst = worst.max((s.eigenvalues[b] - exact[b]).norm());
        }
    }
    check(
        worst <= 1e-6 && elapsed < Duration::from_secs(5),
        format!("max |E - (q + α k_B)²| = {worst:.2e} over 10 bands x 101 q, {elapsed:.2?}"),
    )
}

fn singularity_ladder() -> Outcome {
    let report = scan_singularities(&pt(0.2, 1.0), 24, &DetectorSettings::for_period(1.0)).map_err(|e| e.to_string())?;
    let mut problems = Vec::new();
    for n in 1..=8 {
        let target = (n as f64 * PI).powi(2);
        let want_q = if n % 2 == 1 { -PI } else { 0.0 };
        let hit = report.points.iter().find(|p| {
            p.classification == Classification::Defective && (p.energy.re - target).abs() < 1e-6 * target
        });
        match hit {
            Some(p) if (p.q - want_q).abs() < 1e-12 && p.kappa_min < 1e-3 => {}
            Some(p) => problems.push(format!("n={n}: q={} kappa={:.1e}", p.q, p.kappa_min)),
            None => problems.push(format!("n={n}: missing")),
        }
    }
    let first: Vec<f64> = report.singular_energies.iter().take(8).copied().collect();
    let expected: Vec<f64> = (1..=8).map(|n| (n as f64 * PI).powi(2)).collect();
    let listed = first.len() == 8 && first.iter().zip(&expected).all(|(a, b)| (a - b).abs() < 1e-6 * b);
    if !listed {
        problems.push(format!("singular_energies starts {first:?}"));
    }
    check(
        problems.is_empty(),
        if problems.is_empty() {
            "(nπ)² for n=1..8 at the expected q with κ_min < 1e-3".into()
        } else {
            problems.join("; ")
        },
    )
}

fn threshold_location() -> Outcome {
    let settings = DetectorSettings::for_period(1.0);
    let mut lines = Vec::new();
    let mut ok = true;
    for v0 in [0.2, 0.5] {
        let f = pt(v0, 0.0);
        let lc = find_lambda_c(&f, 24, 0.5, 1.5, 1e-5, &settings).map_err(|e| e.to_string())?;
        let below = max_imag_energy(&pt(v0, lc - 0.01), 24, 65).map_err(|e| e.to_string())?;
        let above = max_imag_energy(&pt(v0, lc + 0.01), 24, 65).map_err(|e| e.to_string())?;
        ok &= (lc - 1.0).abs() <= 1e-3 && below < 1e-8 && above > 1e-4;
        lines.push(format!("V0={v0}: λ_c={lc:.5}, max|Im E| {below:.1e} below / {above:.1e} above"));
    }
    check(ok, lines.join("; "))
}

fn secular_law() -> Outcome {
    let trace = evolve_orders(&pt(0.2, 1.0), 16, -PI, 20.0, 81).map_err(|e| e.to_string())?;
    let c1 = trace.order(1).unwrap();
    let mut worst: f64 = 0.0;
    for t in [5.0, 10.0, 20.0] {
        let j = trace.times.iter().position(|s| (s - t).abs() < 1e-12).ok_or("missing record")?;
        worst = worst.max((c1[j].norm() - 0.2 * t).abs());
    }
    let fit = detect_secular(&trace, 1, &SecularThresholds::default()).map_err(|e| e.to_string())?;
    let control = evolve_orders(&pt(0.2, 0.0), 16, -PI, 20.0, 81).map_err(|e| e.to_string())?;
    let herm = detect_secular(&control, 1, &SecularThresholds::default()).map_err(|e| e.to_string())?;
    check(
        worst <= 1e-8 && fit.secular && (fit.slope - 0.2).abs() <= 0.004 && !herm.secular,
        format!(
            "max ||c_1| - 0.2t| = {worst:.1e}, slope {:.5} (secular {}), Hermitian control secular {}",
            fit.slope, fit.secular, herm.secular
        ),
    )
}

fn resolvent_divergence() -> Outcome {
    let e = PI * PI;
    let n_quad = 1 << 20;
    let g = |lambda: f64, eta: f64| -> Result<f64, String> {
        Ok(projected_resolvent(&pt(0.2, lambda), 4, 1, 0, e, eta, n_quad)
            .map_err(|e| e.to_string())?
            .value
            .norm())
    };
    let mut ratios = Vec::new();
    for eta in [1e-2, 2.5e-3, 6.25e-4] {
        ratios.push(g(1.0, eta / 4.0)? / g(1.0, eta)?);
    }
    let below = g(0.9, 6.25e-4 / 4.0)? / g(0.9, 6.25e-4)?;
    check(
        ratios.iter().all(|r| *r > 1.5) && below < 1.5,
        format!("λ=1 ratios {ratios:.3?}, λ=0.9 ratio {below:.3}"),
    )
}

fn packet(w: f64, lambda: f64, t_end: f64, length: f64) -> Result<(PacketOutcome, Duration), String> {
    let mut run = PacketRun::new(w, 0.2, lambda);
    run.t_end = t_end;
    run.grid = Grid::new(length, (length * 8.0) as usize).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let outcome = run_packet(&run, |_| Ok(())).map_err(|e| e.to_string())?;
    Ok((outcome, start.elapsed()))
}

fn saturation() -> Outcome {
    let target = plateau_amplitude(0.2, &SpectrumProfile::bragg_centred(80.0, 1.0), 1.0);
    let mut onsets = Vec::new();
    let mut slowest = Duration::ZERO;
    let mut plateau_ok = false;
    let mut plateau_msg = String::new();
    for w in [40.0, 80.0, 150.0, 300.0] {
        // the widest packet saturates after t = 40 and needs room to do so
        let (t_end, length) = if w > 200.0 { (80.0, 4096.0) } else { (40.0, 2048.0) };
        let (outcome, elapsed) = packet(w, 1.0, t_end, length)?;
        slowest = slowest.max(elapsed);
        let plateau = plateau_amplitude(0.2, &SpectrumProfile::bragg_centred(w, 1.0), 1.0);
        onsets.push(onset_time(&outcome.order1_peaks, plateau, 0.9).unwrap_or(f64::INFINITY));
        if w == 80.0 {
            let (_, values) = outcome.order1_peaks.window(25.0, 40.0);
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(0.0, f64::max);
            plateau_ok = (lo - target).abs() <= 0.1 * target && (hi - target).abs() <= 0.1 * target;
            plateau_msg = format!("order-1 peak in [{lo:.4}, {hi:.4}] vs {target:.4}");
        }
    }
    let monotone = onsets.windows(2).all(|p| p[0] < p[1]) && onsets.iter().all(|t| t.is_finite());
    check(
        plateau_ok && monotone && slowest < Duration::from_secs(120),
        format!("{plateau_msg}; onsets for w=40,80,150,300: {onsets:.1?}; slowest run {slowest:.1?}"),
    )
}

fn threshold_phenomenology() -> Outcome {
    let (below, _) = packet(80.0, 0.9, 40.0, 2048.0)?;
    let (above, _) = packet(80.0, 1.1, 40.0, 2048.0)?;
    let (_, peak) = below.peaks.max().ok_or("empty trace")?;
    let last = below.peaks.at(40.0).ok_or("empty trace")?;
    let (ts, vs) = below.peaks.window(25.0, 40.0);
    let (slope, _, _) = line_fit(&ts, &vs);
    let a = [10.0, 20.0, 40.0].map(|t| above.peaks.at(t).unwrap());
    check(
        last < peak && slope < 0.0 && a[0] < a[1] && a[1] < a[2],
        format!(
            "λ=0.9: ψ_m(40)={last:.4} < max {peak:.4}, late slope {slope:.4}; λ=1.1: ψ_m(10,20,40) = {:.4}, {:.4}, {:.4}",
            a[0], a[1], a[2]
        ),
    )
}

fn strang_error(dt: f64) -> Result<f64, String> {
    let grid = Grid::new(1024.0, 8192).unwrap();
    let f = pt(0.2, 1.0);
    let run = |dt: f64| -> Result<Vec<ptcrystal::Complex64>, String> {
        let field = init_gaussian(80.0, grid, 1.0).map_err(|e| e.to_string())?;
        let steps = (10.0 / dt).round() as usize;
        Ok(propagate(field, &f, dt, steps, steps).map_err(|e| e.to_string())?.0.values)
    };
    let coarse = run(dt)?;
    let fine = run(dt / 2.0)?;
    Ok(coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        * grid.dx().sqrt())
}

fn csv_bytes(dir: &std::path::Path, args: &[&str]) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut argv = vec!["ptcrystal", "--out-dir", dir.to_str().unwrap()];
    argv.extend_from_slice(args);
    if cli::run(argv) != 0 {
        return Err(format!("command {args:?} failed"));
    }
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    Ok(files)
}

fn hygiene() -> Outcome {
    // norm conservation for the Hermitian lattice
    let f = pt(0.2, 0.0);
    let field = init_gaussian(80.0, Grid::new(2048.0, 16384).unwrap(), 1.0).map_err(|e| e.to_string())?;
    let n0 = field.norm_sqr();
    let (end, _) = propagate(field, &f, 0.002, 20000, 1000).map_err(|e| e.to_string())?;
    let drift = (end.norm_sqr() / n0 - 1.0).abs();

    let errors: Vec<f64> = [0.01, 0.005, 0.0025]
        .iter()
        .map(|&dt| strang_error(dt))
        .collect::<Result<_, _>>()?;
    let factors: Vec<f64> = errors.windows(2).map(|e| e[0] / e[1]).collect();

    let grid = zone_grid(41, 1.0);
    let mut trunc: f64 = 0.0;
    for lambda in [0.0, 0.5, 0.9, 1.0] {
        let a = band_structure(&pt(0.2, lambda), 12, &grid).map_err(|e| e.to_string())?;
        let b = band_structure(&pt(0.2, lambda), 24, &grid).map_err(|e| e.to_string())?;
        for (x, y) in a.iter().zip(&b) {
            for k in 0..10 {
                trunc = trunc.max((x.eigenvalues[k] - y.eigenvalues[k]).norm());
            }
        }
    }

    let mut identical = true;
    for args in [
        &["bands", "--q-points", "21"][..],
        &["singularities"][..],
        &["evolve-orders", "--k-bragg", "-0.5", "--t-end", "10", "--records", "64"][..],
        &["packet", "--t-end", "2", "--length", "512", "--points", "4096"][..],
    ] {
        let a = tempfile::tempdir().map_err(|e| e.to_string())?;
        let b = tempfile::tempdir().map_err(|e| e.to_string())?;
        identical &= csv_bytes(a.path(), args)? == csv_bytes(b.path(), args)?;
    }

    check(
        drift <= 1e-10 && factors.iter().all(|r| (r - 4.0).abs() <= 0.5) && trunc <= 1e-8 && identical,
        format!(
            "norm drift {drift:.1e}; Strang factors {factors:.3?}; N 12→24 change {trunc:.1e}; reruns identical {identical}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("band exactness at threshold", band_exactness),
        ("singularity ladder", singularity_ladder),
        ("threshold location", threshold_location),
        ("exact secular law", secular_law),
        ("resolvent divergence proxy", resolvent_divergence),
        ("wave-packet saturation", saturation),
        ("below/above threshold phenomenology", threshold_phenomenology),
        ("numerical hygiene", hygiene),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {}: PASS  {name} ({secs:.1}s): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.1}s): {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
