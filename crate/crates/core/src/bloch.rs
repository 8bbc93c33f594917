//! The truncated plane-wave matrix `H(q)` and its band structure.
//!
//! Rows and columns are indexed by `n = -N..=N`; entry `(n, m)` is
//! `(q + n k_B)^2 δ_{n,m} + V_{n-m}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::potential::PotentialFamily;

/// Default plane-wave truncation for shallow lattices (`V0 <= 0.5`).
pub const DEFAULT_N: usize = 24;
/// Residual tolerance relative to `‖H‖`.
pub const DEFAULT_RESID_TOL: f64 = 1e-9;

const ZONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct BlochMatrix {
    pub q: f64,
    pub n_trunc: usize,
    pub bragg: f64,
    pub entries: DMatrix<Complex64>,
}

impl BlochMatrix {
    pub fn dim(&self) -> usize {
        2 * self.n_trunc + 1
    }

    /// Matrix index of plane wave `n`.
    pub fn index(&self, n: i64) -> Option<usize> {
        let shifted = n + self.n_trunc as i64;
        (0..self.dim() as i64).contains(&shifted).then_some(shifted as usize)
    }

    /// Plane-wave label of matrix index `i`.
    pub fn order(&self, i: usize) -> i64 {
        i as i64 - self.n_trunc as i64
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }
}

/// Eigenpairs of one `H(q)`, sorted by `(Re E, Im E)`.
#[derive(Debug, Clone)]
pub struct BandSolution {
    pub q: f64,
    pub eigenvalues: Vec<Complex64>,
    pub right_vectors: Vec<DVector<Complex64>>,
    pub left_vectors: Vec<DVector<Complex64>>,
    /// `|l·w| / (‖l‖‖w‖)` per eigenpair; near zero flags a defective eigenvalue.
    pub kappa: Vec<f64>,
    /// Largest `‖H w - E w‖ / ‖H‖` over the eigenpairs.
    pub max_residual: f64,
}

/// One row of a band-structure table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub q: f64,
    pub band: usize,
    pub energy: Complex64,
    pub kappa: f64,
}

/// Whether `q` lies in the closed first Brillouin zone `[-π/a, π/a]`.
///
/// `q = π/a` is accepted as the same crystal momentum as `-π/a`.
pub fn in_zone(q: f64, period: f64) -> bool {
    let edge = PI / period;
    q.is_finite() && q >= -edge * (1.0 + ZONE_SLACK) && q <= edge * (1.0 + ZONE_SLACK)
}

/// `n` equispaced points covering `[-π/a, π/a]` including both edges.
pub fn zone_grid(n: usize, period: f64) -> Vec<f64> {
    let edge = PI / period;
    match n {
        0 => Vec::new(),
        1 => vec![-edge],
        _ => (0..n)
            .map(|j| -edge + 2.0 * edge * j as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `n` equispaced points on the half zone `[-π/a, 0]`, both ends included.
pub fn half_zone_grid(n: usize, period: f64) -> Vec<f64> {
    let edge = PI / period;
    match n {
        0 => Vec::new(),
        1 => vec![-edge],
        _ => (0..n)
            .map(|j| {
                let q = -edge + edge * j as f64 / (n - 1) as f64;
                if j == n - 1 {
                    0.0
                } else {
                    q
                }
            })
            .collect(),
    }
}

/// `q + n k_B`, evaluated as `(q/k_B + n) k_B` so that mirrored orders at
/// `q = 0` and `q = -k_B/2` give bitwise-equal kinetic energies.
pub fn plane_wave(q: f64, n: i64, bragg: f64) -> f64 {
    (q / bragg + n as f64) * bragg
}

pub fn build_hq(f: &PotentialFamily, q: f64, n_trunc: usize) -> Result<BlochMatrix> {
    if !in_zone(q, f.period()) {
        return Err(Error::Bloch(format!(
            "q = {q} lies outside the first Brillouin zone [-{e}, {e}]",
            e = PI / f.period()
        )));
    }
    if n_trunc == 0 || n_trunc < f.n_max() {
        return Err(Error::Bloch(format!(
            "truncation N = {n_trunc} must be positive and cover the potential support {}",
            f.n_max()
        )));
    }
    let kb = f.bragg();
    let coeffs = f.effective_coeffs();
    let dim = 2 * n_trunc + 1;
    let nt = n_trunc as i64;
    let entries = DMatrix::from_fn(dim, dim, |i, j| {
        let n = i as i64 - nt;
        let m = j as i64 - nt;
        let mut h = coeffs
            .get(&((n - m) as i32))
            .copied()
            .unwrap_or_default();
        if n == m {
            let k = plane_wave(q, n, kb);
            h += k * k;
        }
        h
    });
    Ok(BlochMatrix {
        q,
        n_trunc,
        bragg: kb,
        entries,
    })
}

pub fn band_solve(m: &BlochMatrix, tol_resid: f64) -> Result<BandSolution> {
    let decomposition = linalg::eig(&m.entries)?;
    let dim = m.dim();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (decomposition.values[a], decomposition.values[b]);
        ea.re.total_cmp(&eb.re).then(ea.im.total_cmp(&eb.im))
    });

    let hnorm = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut max_residual: f64 = 0.0;
    let mut solution = BandSolution {
        q: m.q,
        eigenvalues: Vec::with_capacity(dim),
        right_vectors: Vec::with_capacity(dim),
        left_vectors: Vec::with_capacity(dim),
        kappa: Vec::with_capacity(dim),
        max_residual: 0.0,
    };
    for k in order {
        let e = decomposition.values[k];
        let w = decomposition.right.column(k).into_owned();
        let r = &m.entries * &w - &w * e;
        max_residual = max_residual.max(r.norm() / hnorm);
        solution.eigenvalues.push(e);
        solution.kappa.push(decomposition.overlap(k));
        solution.right_vectors.push(w);
        solution.left_vectors.push(decomposition.left.column(k).into_owned());
    }
    solution.max_residual = max_residual;
    if !(max_residual <= tol_resid) {
        return Err(Error::EigenNonConvergence { dim });
    }
    Ok(solution)
}

/// Sorted eigenvalues of `H(q)` for every `q` in `q_grid`, in grid order.
///
/// Grid points are solved in parallel on the current rayon pool.
pub fn band_structure(f: &PotentialFamily, n_trunc: usize, q_grid: &[f64]) -> Result<Vec<BandSolution>> {
    q_grid
        .par_iter()
        .map(|&q| band_solve(&build_hq(f, q, n_trunc)?, DEFAULT_RESID_TOL))
        .collect()
}

/// Flattens solutions into `(q, band, E, κ)` rows.
pub fn band_table(solutions: &[BandSolution]) -> Vec<BandPoint> {
    solutions
        .iter()
        .flat_map(|s| {
            s.eigenvalues
                .iter()
                .zip(&s.kappa)
                .enumerate()
                .map(move |(band, (&energy, &kappa))| BandPoint {
                    q: s.q,
                    band,
                    energy,
                    kappa,
                })
        })
        .collect()
}

/// Free-particle parabola `E = k^2` folded into the zone: the sorted values
/// `(q + n k_B)^2` for `n = -N..=N`.
pub fn folded_parabola(q: f64, bragg: f64, n_trunc: usize) -> Vec<f64> {
    let nt = n_trunc as i64;
    let mut e: Vec<f64> = (-nt..=nt)
        .map(|n| {
            let k = plane_wave(q, n, bragg);
            k * k
        })
        .collect();
    e.sort_by(f64::total_cmp);
    e
}
