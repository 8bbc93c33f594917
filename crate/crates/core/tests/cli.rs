use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ptcrystal(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptcrystal"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn header(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    text.lines().find(|l| !l.starts_with('#')).unwrap().to_string()
}

const SMALL_PACKET: &[&str] = &["--w", "20", "--t-end", "2", "--length", "256", "--points", "2048", "--record-every", "100"];

#[test]
fn every_subcommand_writes_its_table() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let runs: [(&[&str], &str, &str); 6] = [
        (&["bands", "--n", "4", "--q-points", "5"], "bands.csv", "q,band_index,re_E,im_E,kappa"),
        (&["singularities", "--n", "8"], "defects.csv", "lambda,q,E_re,gap,kappa_min,classification"),
        (&["lambda-scan", "--n", "6", "--samples", "3"], "scan.csv", "lambda,max_im_E"),
        (&["resolvent-probe", "--n-quad", "4096", "--eta", "0.01"], "resolvent.csv", "eta,re_G,im_G,abs_G"),
        (&["evolve-orders", "--k-bragg", "-0.5", "--n", "4", "--t-end", "2", "--records", "32"], "trace.csv", "t,l,re_c,im_c,abs_c"),
        (&["packet"], "peaks.csv", "t,psi_m"),
    ];
    for (args, file, want) in runs {
        let mut args = args.to_vec();
        if args[0] == "packet" {
            args.extend_from_slice(SMALL_PACKET);
        }
        let out = ptcrystal(d, &args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(header(&d.join(file)), want);
    }
    assert_eq!(header(&d.join("order1.csv")), "t,psi1_m");
    assert_eq!(header(&d.join("field.csv")), "x,re_psi,im_psi,abs_psi");
    assert!(fs::read_to_string(d.join("field.csv")).unwrap().starts_with("# t=2,lambda=1,V0=0.2,w=20"));
    let trace = fs::read_to_string(d.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 32 * 9);
}

#[test]
fn lambda_scan_reports_unit_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out = ptcrystal(dir.path(), &["lambda-scan", "--n", "8"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("lambda_c = 1.0000"), "{stdout}");
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [a.path(), b.path()] {
        let mut args = vec!["packet"];
        args.extend_from_slice(SMALL_PACKET);
        assert!(ptcrystal(d, &args).status.success());
        assert!(ptcrystal(d, &["bands", "--n", "6", "--q-points", "9", "--lambda", "0.7"]).status.success());
    }
    for file in ["peaks.csv", "order1.csv", "field.csv", "bands.csv"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn shown_config_loads_back_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let first = ptcrystal(dir.path(), &["--show-config", "bands", "--v0", "0.3", "--n", "12"]);
    assert!(first.status.success());
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.contains("v0 = 0.3") && text.contains("n_trunc = 12"));
    let path = dir.path().join("run.toml");
    fs::write(&path, &text).unwrap();
    let second = ptcrystal(dir.path(), &["--config", path.to_str().unwrap(), "--show-config"]);
    assert_eq!(String::from_utf8(second.stdout).unwrap(), text);
}

#[test]
fn exit_codes_separate_input_and_numerical_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let bad = d.join("bad.toml");
    fs::write(&bad, "numeric.bogus = 1\n").unwrap();
    assert_eq!(ptcrystal(d, &["--config", bad.to_str().unwrap(), "bands"]).status.code(), Some(2));
    assert_eq!(ptcrystal(d, &["bands", "--lambda", "-1"]).status.code(), Some(2));
    assert_eq!(ptcrystal(d, &["packet", "--points", "1000"]).status.code(), Some(2));
    assert_eq!(ptcrystal(d, &["lambda-scan", "--n", "6", "--lo", "0.1", "--hi", "0.5"]).status.code(), Some(2));
    assert_eq!(ptcrystal(d, &["evolve-orders"]).status.code(), Some(2));

    let overflow = ptcrystal(
        d,
        &["packet", "--v0", "50", "--lambda", "1.5", "--t-end", "5", "--length", "512", "--points", "4096"],
    );
    assert_eq!(overflow.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&overflow.stderr).contains("overflow"));
}
