//! Wave-packet propagation on a periodic grid.
//!
//! `i ∂_t ψ = -∂_x² ψ + V(x) ψ` is advanced with the symmetric split-step
//! Fourier scheme: a half kinetic step `exp(-i k² dt/2)` in momentum space,
//! a full potential step `exp(-i V(x) dt)` in position space, and another
//! half kinetic step. Adjacent half steps are fused between records. The
//! potential step is not unitary when `Im V ≠ 0` and the field is never
//! renormalised.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::potential::PotentialFamily;

type C = Complex64;

pub const DEFAULT_LENGTH: f64 = 2048.0;
pub const DEFAULT_POINTS: usize = 16384;
pub const DEFAULT_DT: f64 = 0.002;
pub const DEFAULT_T_END: f64 = 40.0;
pub const DEFAULT_RECORD_EVERY: usize = 50;

/// Peak amplitude at which a run is aborted.
pub const OVERFLOW_LEVEL: f64 = 1e12;
/// Width of each edge band watched by the wrap detector, as a fraction of `L`.
pub const WRAP_BAND: f64 = 0.05;
/// Fraction of the squared norm allowed inside the edge bands.
pub const WRAP_FRACTION: f64 = 1e-4;
/// Largest packet width relative to the domain length.
pub const MAX_WIDTH_FRACTION: f64 = 1.0 / 6.0;

/// Periodic grid `x_j = -L/2 + j L/M`, `M` a power of two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub length: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(length: f64, points: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Packet(format!("domain length must be positive, got {length}")));
        }
        if points < 16 || !points.is_power_of_two() {
            return Err(Error::Packet(format!("grid size must be a power of two >= 16, got {points}")));
        }
        Ok(Self { length, points })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Nyquist wave number `π/dx`.
    pub fn k_max(&self) -> f64 {
        PI / self.dx()
    }

    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.x(j)).collect()
    }

    /// Wave number of FFT bin `j` (standard ordering, negative half last).
    pub fn wavenumber(&self, j: usize) -> f64 {
        let m = self.points as i64;
        let signed = if (j as i64) < m / 2 { j as i64 } else { j as i64 - m };
        signed as f64 * self.dk()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.wavenumber(j)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: Grid,
    pub values: Vec<C>,
    pub time: f64,
}

impl WaveField {
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// Grid point of the largest `|ψ|`.
    pub fn argmax(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (j, z)| if z.norm() > best.1 { (j, z.norm()) } else { best })
            .0
    }

    /// `∫ x |ψ|² dx / ∫ |ψ|² dx`.
    pub fn centroid(&self) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (j, z) in self.values.iter().enumerate() {
            let p = z.norm_sqr();
            num += self.grid.x(j) * p;
            den += p;
        }
        num / den
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|z| z * s).collect(),
            time: self.time,
        }
    }
}

/// Gaussian momentum spectrum centred on `-k_B/2`,
/// `F(k) = w/(2√π) exp(-(k - k0)² w²/4)`, the transform of
/// `exp(-(x/w)² + i k0 x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumProfile {
    pub k0: f64,
    pub w: f64,
}

impl SpectrumProfile {
    pub fn bragg_centred(w: f64, period: f64) -> Self {
        Self { k0: -PI / period, w }
    }

    pub fn eval(&self, k: f64) -> f64 {
        let d = k - self.k0;
        self.w / (2.0 * PI.sqrt()) * (-d * d * self.w * self.w / 4.0).exp()
    }

    /// Momentum width `Δk ≈ 2/w`.
    pub fn width(&self) -> f64 {
        2.0 / self.w
    }
}

/// `ψ_m(t_j) = max_x |ψ(x, t_j)|`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PeakTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl PeakTrace {
    fn push(&mut self, t: f64, v: f64) {
        self.times.push(t);
        self.values.push(v);
    }

    /// Records with `lo <= t <= hi`.
    pub fn window(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        self.times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= lo - 1e-9 && **t <= hi + 1e-9)
            .map(|(t, v)| (*t, *v))
            .unzip()
    }

    /// Value at the record closest to `t`.
    pub fn at(&self, t: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.values)
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .map(|(_, v)| *v)
    }

    /// Largest value and the time it was recorded.
    pub fn max(&self) -> Option<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.values)
            .fold(None, |best: Option<(f64, f64)>, (t, v)| match best {
                Some((_, bv)) if bv >= *v => best,
                _ => Some((*t, *v)),
            })
    }
}

/// `exp(-(x/w)² - i k_B x/2)` sampled on `grid`.
///
/// Requires `8 dx <= w <= L/6` and a spectrum that is resolved: `F` at
/// `|k| = k_max/2` must be below `1e-10` of its peak.
pub fn init_gaussian(w: f64, grid: Grid, period: f64) -> Result<WaveField> {
    if !(w.is_finite() && w >= 8.0 * grid.dx()) {
        return Err(Error::Packet(format!(
            "packet width {w} is below 8 grid steps ({})",
            8.0 * grid.dx()
        )));
    }
    if w > MAX_WIDTH_FRACTION * grid.length {
        return Err(Error::Packet(format!(
            "packet width {w} exceeds L/6 = {} for domain length {}",
            MAX_WIDTH_FRACTION * grid.length,
            grid.length
        )));
    }
    let k0 = -PI / period;
    let tail = 0.5 * grid.k_max() - k0.abs();
    if tail <= 0.0 || (-tail * tail * w * w / 4.0).exp() >= 1e-10 {
        return Err(Error::Packet(format!(
            "grid step {} does not resolve the spectrum of a width-{w} packet",
            grid.dx()
        )));
    }
    let values = grid
        .xs()
        .into_iter()
        .map(|x| C::from_polar((-(x / w) * (x / w)).exp(), k0 * x))
        .collect();
    Ok(WaveField {
        grid,
        values,
        time: 0.0,
    })
}

pub fn peak_amplitude(field: &WaveField) -> f64 {
    field.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Forward/inverse FFT pair with scratch space; the inverse is normalised.
pub struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<C>,
    norm: f64,
}

impl Spectral {
    pub fn new(points: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);
        let len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            forward,
            inverse,
            scratch: vec![C::default(); len],
            norm: 1.0 / points as f64,
        }
    }

    pub fn forward(&mut self, data: &mut [C]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    pub fn inverse(&mut self, data: &mut [C]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
        data.iter_mut().for_each(|z| *z *= self.norm);
    }
}

/// Precomputed Strang factors for one grid, potential and time step.
pub struct Propagator {
    grid: Grid,
    dt: f64,
    kinetic_half: Vec<C>,
    kinetic_full: Vec<C>,
    potential: Vec<C>,
    fft: Spectral,
}

impl Propagator {
    /// Requires `dt·k_max² < 10`. The scheme is unconditionally stable; the
    /// bound keeps the phase error of the fastest resolved mode bounded.
    pub fn new(grid: Grid, f: &PotentialFamily, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Packet(format!("time step must be positive, got {dt}")));
        }
        if dt * grid.k_max().powi(2) >= 10.0 {
            return Err(Error::Packet(format!(
                "dt·k_max² = {:.3} must stay below 10",
                dt * grid.k_max().powi(2)
            )));
        }
        let ks = grid.wavenumbers();
        let kinetic_half = ks.iter().map(|k| C::from_polar(1.0, -k * k * dt / 2.0)).collect();
        let kinetic_full = ks.iter().map(|k| C::from_polar(1.0, -k * k * dt)).collect();
        let potential = f
            .sample_many(&grid.xs())
            .into_iter()
            .map(|v| (C::new(0.0, -dt) * v).exp())
            .collect();
        Ok(Self {
            grid,
            dt,
            kinetic_half,
            kinetic_full,
            potential,
            fft: Spectral::new(grid.points),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn multiply(data: &mut [C], factors: &[C]) {
        data.iter_mut().zip(factors).for_each(|(z, f)| *z *= f);
    }

    /// Advances `field` by `n` full Strang steps.
    pub fn advance(&mut self, field: &mut WaveField, n: usize) {
        if n == 0 {
            return;
        }
        debug_assert_eq!(field.grid, self.grid);
        let psi = &mut field.values;
        self.fft.forward(psi);
        Self::multiply(psi, &self.kinetic_half);
        self.fft.inverse(psi);
        Self::multiply(psi, &self.potential);
        for _ in 1..n {
            self.fft.forward(psi);
            Self::multiply(psi, &self.kinetic_full);
            self.fft.inverse(psi);
            Self::multiply(psi, &self.potential);
        }
        self.fft.forward(psi);
        Self::multiply(psi, &self.kinetic_half);
        self.fft.inverse(psi);
        field.time += n as f64 * self.dt;
    }
}

/// Share of `∫|ψ|²` inside the outer `WRAP_BAND` of the domain on either side.
pub fn edge_fraction(field: &WaveField) -> f64 {
    let band = (WRAP_BAND * field.grid.points as f64).ceil() as usize;
    let total: f64 = field.values.iter().map(|z| z.norm_sqr()).sum();
    let m = field.grid.points;
    let edge: f64 = field.values[..band]
        .iter()
        .chain(&field.values[m - band..])
        .map(|z| z.norm_sqr())
        .sum();
    if total > 0.0 {
        edge / total
    } else {
        0.0
    }
}

fn check_health(field: &WaveField) -> Result<()> {
    let peak = peak_amplitude(field);
    if !(peak <= OVERFLOW_LEVEL) {
        return Err(Error::Overflow {
            peak,
            time: field.time,
        });
    }
    let fraction = edge_fraction(field);
    if fraction > WRAP_FRACTION {
        return Err(Error::BoundaryWrap {
            time: field.time,
            fraction,
        });
    }
    Ok(())
}

/// Runs `n_steps` Strang steps, calling `observe` on the initial field and
/// after every `record_every` steps (and once more at the end if `n_steps`
/// is not a multiple).
///
/// Aborts when `max|ψ|` exceeds [`OVERFLOW_LEVEL`] or the field reaches the
/// periodic boundary.
pub fn propagate_observed<O>(
    field: WaveField,
    f: &PotentialFamily,
    dt: f64,
    n_steps: usize,
    record_every: usize,
    mut observe: O,
) -> Result<WaveField>
where
    O: FnMut(&WaveField) -> Result<()>,
{
    if record_every == 0 {
        return Err(Error::Packet("record_every must be positive".into()));
    }
    let mut propagator = Propagator::new(field.grid, f, dt)?;
    let mut field = field;
    let t0 = field.time;
    check_health(&field)?;
    observe(&field)?;
    let mut done = 0;
    while done < n_steps {
        let chunk = record_every.min(n_steps - done);
        propagator.advance(&mut field, chunk);
        done += chunk;
        // avoid accumulating rounding in the record times
        field.time = t0 + done as f64 * dt;
        check_health(&field)?;
        observe(&field)?;
    }
    Ok(field)
}

/// Split-step propagation recording `ψ_m(t)` every `record_every` steps.
pub fn propagate(
    field: WaveField,
    f: &PotentialFamily,
    dt: f64,
    n_steps: usize,
    record_every: usize,
) -> Result<(WaveField, PeakTrace)> {
    let mut trace = PeakTrace::default();
    let out = propagate_observed(field, f, dt, n_steps, record_every, |psi| {
        trace.push(psi.time, peak_amplitude(psi));
        Ok(())
    })?;
    Ok((out, trace))
}

/// Momentum band of diffraction order `l`:
/// `[-k_B/2 + (l - 1/2) k_B, -k_B/2 + (l + 1/2) k_B)`.
pub fn order_band(l: i64, period: f64) -> (f64, f64) {
    let kb = 2.0 * PI / period;
    let lo = -0.5 * kb + (l as f64 - 0.5) * kb;
    (lo, lo + kb)
}

/// Keeps the Fourier components of `field` inside the band of order `l`.
///
/// The bands are half-open, so summing the filtered fields over all orders
/// rebuilds the field.
pub fn order_filter(field: &WaveField, l: i64, period: f64) -> WaveField {
    order_filter_with(field, l, period, &mut Spectral::new(field.grid.points))
}

/// [`order_filter`] reusing an existing FFT plan.
pub fn order_filter_with(field: &WaveField, l: i64, period: f64, fft: &mut Spectral) -> WaveField {
    let (lo, hi) = order_band(l, period);
    let mut values = field.values.clone();
    fft.forward(&mut values);
    for (j, z) in values.iter_mut().enumerate() {
        let k = field.grid.wavenumber(j);
        if !(k >= lo && k < hi) {
            *z = C::default();
        }
    }
    fft.inverse(&mut values);
    WaveField {
        grid: field.grid,
        values,
        time: field.time,
    }
}

/// `(e^{iu} - 1)/(iu)`, continuous at `u = 0`.
fn phase_ramp(u: f64) -> C {
    if u.abs() < 1e-4 {
        C::new(1.0 - u * u / 6.0, u / 2.0)
    } else {
        (C::new(0.0, u).exp() - 1.0) / C::new(0.0, u)
    }
}

/// First-order Born amplitude of order 1 for the single harmonic
/// `V0 exp(i k_B x)`:
/// `c_1(k, t) = -i exp(-i (k + k_B)² t) (e^{iΔt} - 1)/(iΔ)`,
/// `Δ = (k + k_B)² - k²`, with the limit `-i t exp(-i (k + k_B)² t)` at `Δ = 0`.
pub fn born_c1(k: f64, t: f64, period: f64) -> C {
    let kb = 2.0 * PI / period;
    let kp = k + kb;
    let delta = kp * kp - k * k;
    C::new(0.0, -t) * C::from_polar(1.0, -kp * kp * t) * phase_ramp(delta * t)
}

/// `ψ_1(x, t) = ∫ dk F(k) c_1(k, t) exp(i (k + k_B) x)` on `grid`, so that the
/// order-1 field is `V0 ψ_1`.
///
/// The `k` integral is the rectangle rule on the grid's reciprocal lattice
/// `Δk = 2π/L`, evaluated for all `x_j` at once by an FFT. This is
/// spectrally accurate provided `F` vanishes at the Nyquist edge and `ψ_1`
/// fits inside the domain; either failure is reported.
pub fn born_psi1(spectrum: &SpectrumProfile, t: f64, grid: Grid, period: f64) -> Result<Vec<C>> {
    let peak = spectrum.eval(spectrum.k0);
    let edge = spectrum.eval(-grid.k_max()).max(spectrum.eval(grid.k_max() - grid.dk()));
    if edge > 1e-14 * peak {
        return Err(Error::Quadrature(format!(
            "packet: quadrature failed, spectrum not resolved by the grid (F at the Nyquist edge is {:.2e} of its peak)",
            edge / peak
        )));
    }
    let kb = 2.0 * PI / period;
    let dk = grid.dk();
    let mut g: Vec<C> = (0..grid.points)
        .map(|j| {
            let k = grid.wavenumber(j);
            // exp(i k x_j) = exp(-i k L/2) exp(2πi jm/M)
            let shift = C::from_polar(1.0, -k * 0.5 * grid.length);
            born_c1(k, t, period) * (spectrum.eval(k) * dk) * shift
        })
        .collect();
    let mut fft = Spectral::new(grid.points);
    fft.inverse(&mut g);
    let unnormalise = grid.points as f64;
    let values: Vec<C> = g
        .into_iter()
        .enumerate()
        .map(|(j, z)| z * unnormalise * C::from_polar(1.0, kb * grid.x(j)))
        .collect();

    let field = WaveField {
        grid,
        values,
        time: t,
    };
    if t > 0.0 && edge_fraction(&field) > WRAP_FRACTION {
        return Err(Error::Quadrature(format!(
            "packet: quadrature failed, first-order field at t = {t} does not fit in a domain of length {}",
            grid.length
        )));
    }
    Ok(field.values)
}

/// Long-time form of `ψ_1`:
/// `-(iπ/k_B) F(-k_B/2) exp(i (k_B x/2 - k_B² t/4)) Φ(x/(k_B t))`
/// with the boxcar `Φ` (1 inside, 0 outside, 1/2 on the edge).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticValue {
    pub value: C,
    /// False when `t < 2π w / k_B`, where the asymptotic form is unreliable.
    pub valid: bool,
}

pub fn asymptotic_psi1(spectrum: &SpectrumProfile, t: f64, x: f64, period: f64) -> AsymptoticValue {
    let kb = 2.0 * PI / period;
    let xi = x / (kb * t);
    let boxcar = if xi.abs() < 1.0 {
        1.0
    } else if xi.abs() == 1.0 {
        0.5
    } else {
        0.0
    };
    let amplitude = PI / kb * spectrum.eval(-kb / 2.0) * boxcar;
    let value = C::new(0.0, -amplitude) * C::from_polar(1.0, kb * x / 2.0 - kb * kb * t / 4.0);
    AsymptoticValue {
        value,
        valid: t >= 4.0 * PI * spectrum.w / (2.0 * kb),
    }
}

/// Saturated order-1 amplitude `V0 (π/k_B) F(-k_B/2)`.
pub fn plateau_amplitude(v0: f64, spectrum: &SpectrumProfile, period: f64) -> f64 {
    let kb = 2.0 * PI / period;
    v0.abs() * PI / kb * spectrum.eval(-kb / 2.0)
}

/// Parameters of one wave-packet run through the PT lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketRun {
    pub w: f64,
    pub v0: f64,
    pub lambda: f64,
    pub period: f64,
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
}

impl PacketRun {
    /// Defaults: `L = 2048 a`, `M = 16384`, `dt = 0.002`, `t_end = 40`,
    /// records every 50 steps.
    pub fn new(w: f64, v0: f64, lambda: f64) -> Self {
        Self {
            w,
            v0,
            lambda,
            period: 1.0,
            grid: Grid {
                length: DEFAULT_LENGTH,
                points: DEFAULT_POINTS,
            },
            dt: DEFAULT_DT,
            t_end: DEFAULT_T_END,
            record_every: DEFAULT_RECORD_EVERY,
        }
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn potential(&self) -> Result<PotentialFamily> {
        PotentialFamily::pt_lattice(self.v0, self.period)?.with_lambda(self.lambda)
    }
}

/// Output of [`run_packet`]: `ψ_m(t)`, the order-1 peak amplitude, and the
/// final field.
#[derive(Debug, Clone)]
pub struct PacketOutcome {
    pub peaks: PeakTrace,
    pub order1_peaks: PeakTrace,
    pub field: WaveField,
}

/// Propagates a Gaussian packet through the PT lattice, recording the total
/// and order-1 peak amplitudes. `snapshot` sees every recorded field.
pub fn run_packet<S>(run: &PacketRun, mut snapshot: S) -> Result<PacketOutcome>
where
    S: FnMut(&WaveField) -> Result<()>,
{
    let f = run.potential()?;
    let grid = Grid::new(run.grid.length, run.grid.points)?;
    let field = init_gaussian(run.w, grid, run.period)?;
    let mut peaks = PeakTrace::default();
    let mut order1 = PeakTrace::default();
    let mut fft = Spectral::new(grid.points);
    let field = propagate_observed(field, &f, run.dt, run.n_steps(), run.record_every, |psi| {
        peaks.push(psi.time, peak_amplitude(psi));
        order1.push(psi.time, peak_amplitude(&order_filter_with(psi, 1, run.period, &mut fft)));
        snapshot(psi)
    })?;
    Ok(PacketOutcome {
        peaks,
        order1_peaks: order1,
        field,
    })
}

/// First record time at which `trace` reaches `fraction` of `target`.
pub fn onset_time(trace: &PeakTrace, target: f64, fraction: f64) -> Option<f64> {
    trace
        .times
        .iter()
        .zip(&trace.values)
        .find(|(_, v)| **v >= fraction * target)
        .map(|(t, _)| *t)
}

/// `|ψ|` of the freely spreading Gaussian `exp(-(x/w)² + i k0 x)` at time `t`.
pub fn free_gaussian(w: f64, k0: f64, t: f64, x: f64) -> C {
    let sigma = C::new(1.0, 4.0 * t / (w * w));
    let shifted = x - 2.0 * k0 * t;
    let envelope = (-(shifted * shifted) / (sigma * w * w)).exp();
    envelope * C::from_polar(1.0, k0 * x - k0 * k0 * t) / sigma.sqrt()
}
