//! Diffracted-order amplitudes for plane-wave excitation.
//!
//! A plane wave `exp(ikx)` with `k = q + l0 k_B` stays in the Bloch sector
//! `q`, so `ψ(x, t) = Σ_l c_l(t) exp(i(q + l k_B)x)` with
//! `i dc/dt = H(q) c` and `c_l(0) = δ_{l,l0}`. The system is linear, so the
//! trace is advanced with the exact propagator `exp(-i H(q) Δt)` between
//! records.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::bloch;
use crate::error::{Error, Result};
use crate::linalg;
use crate::potential::PotentialFamily;

pub const DEFAULT_T_END: f64 = 50.0;
pub const DEFAULT_RECORDS: usize = 256;
pub const DEFAULT_N: usize = 16;

/// `|c_{±N}|` above this means the cascade reached the truncation boundary.
pub const BOUNDARY_LEVEL: f64 = 1e-6;
const LOCAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct DiffractionTrace {
    pub k: f64,
    pub q: f64,
    pub l0: i64,
    pub n_trunc: usize,
    pub times: Vec<f64>,
    /// `amplitudes[j][l + N]` is `c_l(times[j])`.
    pub amplitudes: Vec<Vec<Complex64>>,
    pub boundary_warning: bool,
}

impl DiffractionTrace {
    pub fn orders(&self) -> std::ops::RangeInclusive<i64> {
        let n = self.n_trunc as i64;
        -n..=n
    }

    fn index(&self, l: i64) -> Option<usize> {
        let shifted = l + self.n_trunc as i64;
        (0..=2 * self.n_trunc as i64).contains(&shifted).then_some(shifted as usize)
    }

    /// `c_l` at every record, or `None` when `l` is outside the truncation.
    pub fn order(&self, l: i64) -> Option<Vec<Complex64>> {
        let i = self.index(l)?;
        Some(self.amplitudes.iter().map(|c| c[i]).collect())
    }

    /// `Σ_l |c_l|^2` at record `j`.
    pub fn power(&self, j: usize) -> f64 {
        self.amplitudes[j].iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn t_end(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

/// Splits `k` into `q + l0 k_B` with `q ∈ [-π/a, π/a)`.
pub fn reduce_to_zone(k: f64, period: f64) -> (f64, i64) {
    let kb = 2.0 * PI / period;
    let mut l0 = (k / kb + 0.5).floor() as i64;
    let mut q = k - l0 as f64 * kb;
    if q >= PI / period {
        l0 += 1;
        q -= kb;
    }
    if q < -PI / period * (1.0 + 1e-14) {
        l0 -= 1;
        q += kb;
    }
    (q, l0)
}

pub fn evolve_orders(
    f: &PotentialFamily,
    n_trunc: usize,
    k: f64,
    t_end: f64,
    n_records: usize,
) -> Result<DiffractionTrace> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Ladder(format!("t_end must be positive, got {t_end}")));
    }
    if n_records < 2 {
        return Err(Error::Ladder("at least two records are needed".into()));
    }
    if !k.is_finite() {
        return Err(Error::Ladder(format!("k must be finite, got {k}")));
    }
    let (q, l0) = reduce_to_zone(k, f.period());
    if l0.unsigned_abs() as usize > n_trunc {
        return Err(Error::Ladder(format!(
            "incident order l0 = {l0} lies outside the truncation N = {n_trunc}"
        )));
    }
    let hq = bloch::build_hq(f, q, n_trunc)?;
    let dim = hq.dim();
    let dt = t_end / (n_records - 1) as f64;
    let generator = hq.entries.map(|h| h * Complex64::new(0.0, -1.0));

    let step = linalg::expm(&(&generator * Complex64::from(dt)));
    let half = linalg::expm(&(&generator * Complex64::from(0.5 * dt)));
    let local_error = (&step - &half * &half).norm() / step.norm().max(1.0);
    if !(local_error <= LOCAL_TOL) {
        return Err(Error::StepControl(format!(
            "propagator over dt = {dt} disagrees with two half steps by {local_error:.2e}"
        )));
    }

    let mut c = DVector::<Complex64>::zeros(dim);
    c[hq.index(l0).expect("l0 checked against truncation")] = Complex64::from(1.0);
    let mut times = Vec::with_capacity(n_records);
    let mut amplitudes = Vec::with_capacity(n_records);
    times.push(0.0);
    amplitudes.push(c.iter().copied().collect::<Vec<_>>());
    for j in 1..n_records {
        c = &step * c;
        if c.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::StepControl(format!("amplitudes overflowed at t = {}", j as f64 * dt)));
        }
        times.push(j as f64 * dt);
        amplitudes.push(c.iter().copied().collect());
    }
    let boundary_warning = amplitudes
        .iter()
        .any(|a: &Vec<Complex64>| a[0].norm() > BOUNDARY_LEVEL || a[dim - 1].norm() > BOUNDARY_LEVEL);
    Ok(DiffractionTrace {
        k,
        q,
        l0,
        n_trunc,
        times,
        amplitudes,
        boundary_warning,
    })
}

/// `exp(-i H(q) t)` as a dense matrix; column `l0 + N` is the trace at `t`.
pub fn propagator(f: &PotentialFamily, n_trunc: usize, q: f64, t: f64) -> Result<DMatrix<Complex64>> {
    let hq = bloch::build_hq(f, q, n_trunc)?;
    Ok(linalg::expm(&hq.entries.map(|h| h * Complex64::new(0.0, -t))))
}

/// Decision constants of [`detect_secular`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularThresholds {
    /// Minimum `slope · t_end / mean|c_l|`.
    pub score: f64,
    /// Minimum coefficient of determination of the line fit.
    pub r2: f64,
}

impl Default for SecularThresholds {
    fn default() -> Self {
        Self { score: 0.5, r2: 0.99 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularFit {
    pub secular: bool,
    pub slope: f64,
    pub r2: f64,
}

/// Least-squares line through `|c_l(t)|` on `[t_end/2, t_end]`.
pub fn detect_secular(trace: &DiffractionTrace, l: i64, thresholds: &SecularThresholds) -> Result<SecularFit> {
    if trace.times.len() < 32 {
        return Err(Error::Ladder(format!(
            "secular detection needs at least 32 records, trace has {}",
            trace.times.len()
        )));
    }
    let series = trace
        .order(l)
        .ok_or_else(|| Error::Ladder(format!("order {l} lies outside the truncation")))?;
    let t_end = trace.t_end();
    let (ts, ys): (Vec<f64>, Vec<f64>) = trace
        .times
        .iter()
        .zip(&series)
        .filter(|(t, _)| **t >= 0.5 * t_end)
        .map(|(t, c)| (*t, c.norm()))
        .unzip();
    let (slope, _intercept, r2) = line_fit(&ts, &ys);
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let score = if mean > 0.0 { slope * t_end / mean } else { 0.0 };
    Ok(SecularFit {
        secular: score > thresholds.score && r2 > thresholds.r2,
        slope,
        r2,
    })
}

/// Every order other than the incident one whose amplitude grows secularly.
pub fn secular_orders(trace: &DiffractionTrace, thresholds: &SecularThresholds) -> Result<Vec<i64>> {
    let mut out = Vec::new();
    for l in trace.orders().filter(|&l| l != trace.l0) {
        if detect_secular(trace, l, thresholds)?.secular {
            out.push(l);
        }
    }
    Ok(out)
}

/// Ordinary least squares `y ≈ slope·x + intercept`; returns
/// `(slope, intercept, r2)` with `r2 = 0` for a constant series.
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, my, 0.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 0.0 };
    (slope, my - slope * mx, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v0: f64, lambda: f64) -> PotentialFamily {
        PotentialFamily::pt_lattice(v0, 1.0).unwrap().with_lambda(lambda).unwrap()
    }

    #[test]
    fn zone_reduction() {
        assert_eq!(reduce_to_zone(-PI, 1.0), (-PI, 0));
        assert_eq!(reduce_to_zone(PI, 1.0), (-PI, 1));
        let (q, l0) = reduce_to_zone(0.3 * 2.0 * PI, 1.0);
        assert_eq!(l0, 0);
        assert!((q - 0.6 * PI).abs() < 1e-15);
        let (q, l0) = reduce_to_zone(-2.0 * PI, 1.0);
        assert_eq!((q, l0), (0.0, -1));
    }

    #[test]
    fn initial_condition_is_incident_order() {
        let trace = evolve_orders(&pt(0.2, 0.7), 6, 0.3 * 2.0 * PI, 1.0, 5).unwrap();
        let c0 = &trace.amplitudes[0];
        for (i, c) in c0.iter().enumerate() {
            let want = if i as i64 - 6 == trace.l0 { 1.0 } else { 0.0 };
            assert_eq!(*c, Complex64::from(want));
        }
    }

    #[test]
    fn free_particle_only_picks_up_a_phase() {
        let f = PotentialFamily::free(1.0).unwrap();
        let k = 1.3;
        let trace = evolve_orders(&f, 4, k, 7.0, 8).unwrap();
        for (t, c) in trace.times.iter().zip(&trace.amplitudes) {
            for (i, z) in c.iter().enumerate() {
                let want = if i == 4 { Complex64::from_polar(1.0, -k * k * t) } else { Complex64::default() };
                assert!((z - want).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn hermitian_evolution_is_unitary() {
        let trace = evolve_orders(&pt(0.3, 0.0), 12, -PI, 40.0, 64).unwrap();
        for j in 0..trace.times.len() {
            assert!((trace.power(j) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn bragg_order_grows_exactly_linearly() {
        let trace = evolve_orders(&pt(0.2, 1.0), 16, -PI, 20.0, 81).unwrap();
        let c1 = trace.order(1).unwrap();
        for (t, c) in trace.times.iter().zip(&c1) {
            assert!((c.norm() - 0.2 * t).abs() < 1e-8, "t = {t}: {}", c.norm());
        }
        assert!(!trace.boundary_warning);
    }

    #[test]
    fn rejects_bad_arguments() {
        let f = pt(0.2, 1.0);
        assert!(evolve_orders(&f, 4, -PI, 0.0, 10).is_err());
        assert!(evolve_orders(&f, 4, -PI, 1.0, 1).is_err());
        assert!(evolve_orders(&f, 2, 20.0 * PI, 1.0, 10).is_err());
    }

    #[test]
    fn short_trace_cannot_be_classified() {
        let trace = evolve_orders(&pt(0.2, 1.0), 4, -PI, 10.0, 16).unwrap();
        assert!(detect_secular(&trace, 1, &SecularThresholds::default()).is_err());
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let (s, b, r2) = line_fit(&x, &y);
        assert!((s - 3.0).abs() < 1e-12 && (b + 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        assert_eq!(line_fit(&x, &[2.0; 10]).2, 0.0);
    }
}
