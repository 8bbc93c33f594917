//! Run configuration.
//!
//! The file format is plain `key = value` with dotted sections
//! (`potential.v0 = 0.2` or a `[potential]` table followed by `v0 = 0.2`),
//! parsed as TOML. Unknown keys are rejected. Command-line flags override the
//! file, and [`RunConfig::render`] prints every value including defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::packet::Grid;
use crate::potential::PotentialFamily;
use crate::singularity::DetectorSettings;
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    PtLattice,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    pub v0: f64,
    pub a: f64,
    pub lambda: f64,
    /// `(n, Re, Im)` Fourier coefficients of `V_R` (custom only).
    pub real: Vec<[f64; 3]>,
    /// `(n, Re, Im)` Fourier coefficients of `V_I` (custom only).
    pub imag: Vec<[f64; 3]>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            kind: PotentialKind::PtLattice,
            v0: 0.2,
            a: 1.0,
            lambda: 1.0,
            real: Vec::new(),
            imag: Vec::new(),
        }
    }
}

/// Numerical parameters. Tolerances `gap_tol` and `im_tol` are in units of
/// `k_B²`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericConfig {
    pub n_trunc: usize,
    pub q_points: usize,
    pub scan_points: usize,
    pub gap_tol: f64,
    pub kappa_tol: f64,
    pub im_tol: f64,
    pub lambda_tol: f64,
    pub ladder_n: usize,
    pub records: usize,
    pub secular_score: f64,
    pub secular_r2: f64,
    pub resolvent_n: usize,
    pub n_quad: usize,
    pub dt: f64,
    pub length: f64,
    pub points: usize,
    pub t_end: f64,
    pub record_every: usize,
    pub w: f64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        Self {
            n_trunc: 24,
            q_points: 101,
            scan_points: 65,
            gap_tol: 1e-4,
            kappa_tol: 1e-3,
            im_tol: 1e-8,
            lambda_tol: 1e-4,
            ladder_n: 16,
            records: 256,
            secular_score: 0.5,
            secular_r2: 0.99,
            resolvent_n: 4,
            n_quad: 1 << 18,
            dt: 0.002,
            length: 2048.0,
            points: 16384,
            t_end: 40.0,
            record_every: 50,
            w: 80.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from(".") }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    pub numeric: NumericConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.potential;
        let n = &self.numeric;
        let positive = [
            ("potential.a", p.a),
            ("numeric.gap_tol", n.gap_tol),
            ("numeric.kappa_tol", n.kappa_tol),
            ("numeric.im_tol", n.im_tol),
            ("numeric.lambda_tol", n.lambda_tol),
            ("numeric.secular_score", n.secular_score),
            ("numeric.secular_r2", n.secular_r2),
            ("numeric.dt", n.dt),
            ("numeric.length", n.length),
            ("numeric.t_end", n.t_end),
            ("numeric.w", n.w),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{key} must be positive, got {v}")));
            }
        }
        let counts = [
            ("numeric.n_trunc", n.n_trunc),
            ("numeric.q_points", n.q_points),
            ("numeric.scan_points", n.scan_points),
            ("numeric.ladder_n", n.ladder_n),
            ("numeric.records", n.records),
            ("numeric.resolvent_n", n.resolvent_n),
            ("numeric.n_quad", n.n_quad),
            ("numeric.points", n.points),
            ("numeric.record_every", n.record_every),
        ];
        for (key, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{key} must be positive")));
            }
        }
        if !(p.lambda.is_finite() && p.lambda >= 0.0) {
            return Err(Error::Config(format!("potential.lambda must be non-negative, got {}", p.lambda)));
        }
        if p.kind == PotentialKind::PtLattice && !(p.real.is_empty() && p.imag.is_empty()) {
            return Err(Error::Config(
                "potential.real and potential.imag only apply to kind = \"custom\"".into(),
            ));
        }
        Ok(())
    }

    pub fn family(&self) -> Result<PotentialFamily> {
        let p = &self.potential;
        match p.kind {
            PotentialKind::PtLattice => PotentialFamily::pt_lattice(p.v0, p.a)?.with_lambda(p.lambda),
            PotentialKind::Custom => {
                PotentialFamily::new(p.a, coeff_map("real", &p.real)?, coeff_map("imag", &p.imag)?, p.lambda)
            }
        }
    }

    pub fn detector(&self) -> DetectorSettings {
        let kb2 = (2.0 * std::f64::consts::PI / self.potential.a).powi(2);
        DetectorSettings {
            gap_tol: self.numeric.gap_tol * kb2,
            kappa_tol: self.numeric.kappa_tol,
            im_tol: self.numeric.im_tol * kb2,
            scan_points: self.numeric.scan_points,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.numeric.length, self.numeric.points)
    }

    /// Every key with its effective value, in file syntax.
    pub fn render(&self) -> String {
        let p = &self.potential;
        let n = &self.numeric;
        let kind = match p.kind {
            PotentialKind::PtLattice => "pt_lattice",
            PotentialKind::Custom => "custom",
        };
        let mut s = String::new();
        let _ = writeln!(s, "[potential]");
        let _ = writeln!(s, "kind = \"{kind}\"");
        let _ = writeln!(s, "v0 = {:?}", p.v0);
        let _ = writeln!(s, "a = {:?}", p.a);
        let _ = writeln!(s, "lambda = {:?}", p.lambda);
        let _ = writeln!(s, "real = {}", render_coeffs(&p.real));
        let _ = writeln!(s, "imag = {}", render_coeffs(&p.imag));
        let _ = writeln!(s, "\n[numeric]");
        for (key, value) in [
            ("n_trunc", n.n_trunc.to_string()),
            ("q_points", n.q_points.to_string()),
            ("scan_points", n.scan_points.to_string()),
            ("gap_tol", format!("{:?}", n.gap_tol)),
            ("kappa_tol", format!("{:?}", n.kappa_tol)),
            ("im_tol", format!("{:?}", n.im_tol)),
            ("lambda_tol", format!("{:?}", n.lambda_tol)),
            ("ladder_n", n.ladder_n.to_string()),
            ("records", n.records.to_string()),
            ("secular_score", format!("{:?}", n.secular_score)),
            ("secular_r2", format!("{:?}", n.secular_r2)),
            ("resolvent_n", n.resolvent_n.to_string()),
            ("n_quad", n.n_quad.to_string()),
            ("dt", format!("{:?}", n.dt)),
            ("length", format!("{:?}", n.length)),
            ("points", n.points.to_string()),
            ("t_end", format!("{:?}", n.t_end)),
            ("record_every", n.record_every.to_string()),
            ("w", format!("{:?}", n.w)),
        ] {
            let _ = writeln!(s, "{key} = {value}");
        }
        let _ = writeln!(s, "\n[output]");
        let _ = writeln!(s, "dir = {:?}", self.output.dir.display().to_string());
        s
    }
}

fn render_coeffs(list: &[[f64; 3]]) -> String {
    let items: Vec<String> = list
        .iter()
        .map(|[n, re, im]| format!("[{n:?}, {re:?}, {im:?}]"))
        .collect();
    format!("[{}]", items.join(", "))
}

fn coeff_map(name: &str, list: &[[f64; 3]]) -> Result<BTreeMap<i32, Complex64>> {
    let mut out = BTreeMap::new();
    for &[n, re, im] in list {
        if n.fract() != 0.0 || n.abs() > 1e6 {
            return Err(Error::Config(format!("potential.{name}: harmonic index {n} is not an integer")));
        }
        if out.insert(n as i32, Complex64::new(re, im)).is_some() {
            return Err(Error::Config(format!("potential.{name}: harmonic {n} listed twice")));
        }
    }
    Ok(out)
}
