//! Complex periodic potentials `V(x) = V_R(x) + i λ V_I(x)` stored as Fourier
//! coefficients on the reciprocal lattice `n k_B`, `k_B = 2π/a`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default tolerance for [`PotentialFamily::is_pt_symmetric`].
pub const PT_TOL: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-12;

/// A one-parameter family of complex periodic potentials.
///
/// `real_coeffs` and `imag_coeffs` are the Fourier coefficients of the real
/// functions `V_R` and `V_I`, so each map must satisfy `c_{-n} = conj(c_n)`.
/// The anti-Hermitian strength `lambda` only enters through
/// [`effective_coeffs`](Self::effective_coeffs).
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialFamily {
    period: f64,
    real_coeffs: BTreeMap<i32, Complex64>,
    imag_coeffs: BTreeMap<i32, Complex64>,
    lambda: f64,
}

impl PotentialFamily {
    pub fn new(
        period: f64,
        real_coeffs: BTreeMap<i32, Complex64>,
        imag_coeffs: BTreeMap<i32, Complex64>,
        lambda: f64,
    ) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::Potential(format!("period must be positive, got {period}")));
        }
        check_lambda(lambda)?;
        check_real_series("V_R", &real_coeffs)?;
        check_real_series("V_I", &imag_coeffs)?;
        Ok(Self {
            period,
            real_coeffs,
            imag_coeffs,
            lambda,
        })
    }

    /// The free particle, `V = 0`.
    pub fn free(period: f64) -> Result<Self> {
        Self::new(period, BTreeMap::new(), BTreeMap::new(), 0.0)
    }

    /// `V_R = V0 cos(2πx/a)`, `V_I = V0 sin(2πx/a)`.
    ///
    /// With strength `λ` the effective coefficients are
    /// `V_1 = V0 (1 + λ)/2` and `V_{-1} = V0 (1 - λ)/2`; at `λ = 1` the
    /// potential is the single harmonic `V0 exp(i k_B x)`. The family is
    /// returned with `λ = 0`, use [`with_lambda`](Self::with_lambda).
    pub fn pt_lattice(v0: f64, period: f64) -> Result<Self> {
        if !v0.is_finite() {
            return Err(Error::Potential(format!("V0 must be finite, got {v0}")));
        }
        let half = Complex64::new(0.5 * v0, 0.0);
        // sin(kx) = (e^{ikx} - e^{-ikx}) / 2i
        let sin_coeff = Complex64::new(0.0, -0.5 * v0);
        let real = BTreeMap::from([(-1, half), (1, half)]);
        let imag = BTreeMap::from([(-1, sin_coeff.conj()), (1, sin_coeff)]);
        Self::new(period, real, imag, 0.0)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        self.lambda = lambda;
        Ok(self)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Bragg wave number `k_B = 2π/a`.
    pub fn bragg(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn real_coeffs(&self) -> &BTreeMap<i32, Complex64> {
        &self.real_coeffs
    }

    pub fn imag_coeffs(&self) -> &BTreeMap<i32, Complex64> {
        &self.imag_coeffs
    }

    /// Largest harmonic index carrying a nonzero coefficient (0 for `V = 0`).
    pub fn n_max(&self) -> usize {
        self.effective_coeffs()
            .keys()
            .map(|n| n.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// `V_n = R_n + i λ I_n`; exact zeros are dropped.
    pub fn effective_coeffs(&self) -> BTreeMap<i32, Complex64> {
        let i_lambda = Complex64::new(0.0, self.lambda);
        let mut out = self.real_coeffs.clone();
        for (&n, &c) in &self.imag_coeffs {
            *out.entry(n).or_default() += i_lambda * c;
        }
        out.retain(|_, v| *v != Complex64::default());
        out
    }

    /// `V(x) = Σ V_n exp(i k_B n x)`.
    pub fn sample(&self, x: f64) -> Complex64 {
        fourier_sum(&self.effective_coeffs(), self.bragg(), x)
    }

    /// `V_R(x)`; real up to rounding.
    pub fn sample_real_part(&self, x: f64) -> Complex64 {
        fourier_sum(&self.real_coeffs, self.bragg(), x)
    }

    /// `V_I(x)` without the factor `λ`; real up to rounding.
    pub fn sample_imag_part(&self, x: f64) -> Complex64 {
        fourier_sum(&self.imag_coeffs, self.bragg(), x)
    }

    /// Samples `V` on a list of points, evaluating the coefficients once.
    pub fn sample_many(&self, xs: &[f64]) -> Vec<Complex64> {
        let coeffs = self.effective_coeffs();
        let kb = self.bragg();
        xs.iter().map(|&x| fourier_sum(&coeffs, kb, x)).collect()
    }

    /// `V(-x) = conj(V(x))` about the origin, tested as "every effective
    /// coefficient is real to within `tol`".
    ///
    /// A crystal that is PT-symmetric about a shifted centre reports `false`.
    pub fn is_pt_symmetric(&self, tol: f64) -> bool {
        self.effective_coeffs().values().all(|v| v.im.abs() <= tol)
    }

    /// Whether `V` is real-valued (`λ V_I` vanishes), i.e. `H` is Hermitian.
    pub fn is_hermitian(&self) -> bool {
        let coeffs = self.effective_coeffs();
        coeffs.iter().all(|(n, v)| {
            let partner = coeffs.get(&-n).copied().unwrap_or_default();
            (*v - partner.conj()).norm() <= HERMITIAN_TOL
        })
    }
}

fn fourier_sum(coeffs: &BTreeMap<i32, Complex64>, kb: f64, x: f64) -> Complex64 {
    coeffs
        .iter()
        .map(|(&n, &c)| c * Complex64::from_polar(1.0, kb * n as f64 * x))
        .sum()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Potential(format!("lambda must be non-negative, got {lambda}")));
    }
    Ok(())
}

fn check_real_series(name: &str, coeffs: &BTreeMap<i32, Complex64>) -> Result<()> {
    for (&n, &c) in coeffs {
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Potential(format!("{name} coefficient {n} is not finite")));
        }
        let partner = coeffs.get(&-n).copied().unwrap_or_default();
        let scale = c.norm().max(1.0);
        if (partner - c.conj()).norm() > HERMITIAN_TOL * scale {
            return Err(Error::Potential(format!(
                "{name} must be real-valued: coefficient {} = {partner} is not conj({c})",
                -n
            )));
        }
    }
    Ok(())
}
