//! Spectral singularities: defective eigenvalues of `H(q)` at the zone centre
//! and edge, the PT symmetry-breaking threshold, and the growth of the
//! projected resolvent near a singular energy.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bloch::{self, BandSolution};
use crate::error::{Error, Result};
use crate::linalg;
use crate::potential::PotentialFamily;

/// Thresholds used by the degeneracy classifier and the reality scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSettings {
    /// Eigenvalues closer than this form a candidate pair.
    pub gap_tol: f64,
    /// A candidate pair with `min κ` below this is defective.
    pub kappa_tol: f64,
    /// The spectrum counts as complex when some `|Im E|` exceeds this.
    pub im_tol: f64,
    /// Points on the half zone `[-π/a, 0]` used by the reality scan.
    pub scan_points: usize,
}

impl DetectorSettings {
    /// `gap_tol = 1e-4 k_B^2`, `kappa_tol = 1e-3`, `im_tol = 1e-8 k_B^2`,
    /// 65 scan points.
    pub fn for_period(period: f64) -> Self {
        let kb2 = (2.0 * PI / period).powi(2);
        Self {
            gap_tol: 1e-4 * kb2,
            kappa_tol: 1e-3,
            im_tol: 1e-8 * kb2,
            scan_points: 65,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Defective,
    DegenerateDiagonalizable,
    Isolated,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Defective => "defective",
            Classification::DegenerateDiagonalizable => "degenerate-diagonalizable",
            Classification::Isolated => "isolated",
        }
    }
}

/// One eigenvalue pair (or a lone eigenvalue, `pair.0 == pair.1`) at a
/// high-symmetry point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointRecord {
    pub q: f64,
    pub pair: (usize, usize),
    /// Mean of the pair.
    pub energy: Complex64,
    /// `|E_α - E_β|`, or the distance to the nearest other eigenvalue for a
    /// lone one.
    pub gap: f64,
    pub kappa_min: f64,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularityReport {
    pub lambda: f64,
    pub points: Vec<PointRecord>,
    pub singular_energies: Vec<f64>,
    pub lambda_c: Option<f64>,
}

/// Whether `q` is the zone centre or one of the (equivalent) zone edges.
fn is_high_symmetry(q: f64, period: f64) -> bool {
    let edge = PI / period;
    q == 0.0 || (q.abs() - edge).abs() <= 1e-12 * edge
}

/// Examines every eigenvalue pair of `H(q)` closer than `gap_tol`.
///
/// A pair is defective when additionally `min(κ_α, κ_β) < kappa_tol`.
/// Eigenvalues not part of any pair are returned as isolated records.
pub fn classify_point(
    f: &PotentialFamily,
    n_trunc: usize,
    q: f64,
    settings: &DetectorSettings,
) -> Result<Vec<PointRecord>> {
    if !is_high_symmetry(q, f.period()) {
        return Err(Error::Singularity(format!(
            "degeneracies are only classified at q = 0 or q = -π/a, got q = {q}"
        )));
    }
    let solution = bloch::band_solve(&bloch::build_hq(f, q, n_trunc)?, bloch::DEFAULT_RESID_TOL)?;
    Ok(classify_solution(&solution, settings))
}

fn classify_solution(s: &BandSolution, settings: &DetectorSettings) -> Vec<PointRecord> {
    let n = s.eigenvalues.len();
    let mut paired = vec![false; n];
    let mut records = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let gap = (s.eigenvalues[a] - s.eigenvalues[b]).norm();
            // eigenvalues are sorted by real part
            if s.eigenvalues[b].re - s.eigenvalues[a].re >= settings.gap_tol {
                break;
            }
            if gap >= settings.gap_tol {
                continue;
            }
            paired[a] = true;
            paired[b] = true;
            let kappa_min = s.kappa[a].min(s.kappa[b]);
            let classification = if kappa_min < settings.kappa_tol {
                Classification::Defective
            } else {
                Classification::DegenerateDiagonalizable
            };
            records.push(PointRecord {
                q: s.q,
                pair: (a, b),
                energy: (s.eigenvalues[a] + s.eigenvalues[b]) * 0.5,
                gap,
                kappa_min,
                classification,
            });
        }
    }
    for a in (0..n).filter(|&a| !paired[a]) {
        let gap = (0..n)
            .filter(|&b| b != a)
            .map(|b| (s.eigenvalues[a] - s.eigenvalues[b]).norm())
            .fold(f64::INFINITY, f64::min);
        records.push(PointRecord {
            q: s.q,
            pair: (a, a),
            energy: s.eigenvalues[a],
            gap,
            kappa_min: s.kappa[a],
            classification: Classification::Isolated,
        });
    }
    records.sort_by_key(|r| r.pair);
    records
}

/// Classification at the zone edge `-π/a` and the centre `0`, plus the sorted
/// real parts of the defective energies below the truncation cap
/// `(N k_B / 2)^2`.
pub fn scan_singularities(
    f: &PotentialFamily,
    n_trunc: usize,
    settings: &DetectorSettings,
) -> Result<SingularityReport> {
    let qs = [-PI / f.period(), 0.0];
    let per_point: Vec<Vec<PointRecord>> = qs
        .par_iter()
        .map(|&q| classify_point(f, n_trunc, q, settings))
        .collect::<Result<_>>()?;
    let points: Vec<PointRecord> = per_point.into_iter().flatten().collect();

    let cap = (n_trunc as f64 * f.bragg() / 2.0).powi(2);
    let mut energies: Vec<f64> = points
        .iter()
        .filter(|p| p.classification == Classification::Defective && p.energy.re < cap)
        .map(|p| p.energy.re)
        .collect();
    energies.sort_by(f64::total_cmp);
    energies.dedup_by(|a, b| (*a - *b).abs() < settings.gap_tol);
    Ok(SingularityReport {
        lambda: f.lambda(),
        points,
        singular_energies: energies,
        lambda_c: None,
    })
}

/// Sorted spectral-singularity energies found at `q = 0` and `q = -π/a`.
pub fn singular_energies(f: &PotentialFamily, n_trunc: usize, settings: &DetectorSettings) -> Result<Vec<f64>> {
    Ok(scan_singularities(f, n_trunc, settings)?.singular_energies)
}

/// Largest `|Im E|` of `H(q)` over the half-zone scan grid.
///
/// The half zone suffices because `H(-q)` is similar to the transpose of
/// `H(q)`, so both have the same spectrum.
pub fn max_imag_energy(f: &PotentialFamily, n_trunc: usize, scan_points: usize) -> Result<f64> {
    let grid = bloch::half_zone_grid(scan_points, f.period());
    let solutions = bloch::band_structure(f, n_trunc, &grid)?;
    Ok(solutions
        .iter()
        .flat_map(|s| s.eigenvalues.iter().map(|e| e.im.abs()))
        .fold(0.0, f64::max))
}

fn spectrum_is_complex(
    f: &PotentialFamily,
    lambda: f64,
    n_trunc: usize,
    settings: &DetectorSettings,
) -> Result<bool> {
    let g = f.clone().with_lambda(lambda)?;
    Ok(max_imag_energy(&g, n_trunc, settings.scan_points)? > settings.im_tol)
}

/// Bisects on "the spectrum has a complex eigenvalue" between `lambda_lo` and
/// `lambda_hi` until the bracket is narrower than `tol_lambda`, and returns
/// the bracket midpoint.
///
/// The bracket is not searched for; families may break and restore the
/// symmetry several times, so the caller chooses which transition to resolve.
pub fn find_lambda_c(
    f: &PotentialFamily,
    n_trunc: usize,
    lambda_lo: f64,
    lambda_hi: f64,
    tol_lambda: f64,
    settings: &DetectorSettings,
) -> Result<f64> {
    if !(lambda_lo >= 0.0 && lambda_hi > lambda_lo && tol_lambda > 0.0) {
        return Err(Error::Singularity(format!(
            "invalid bracket [{lambda_lo}, {lambda_hi}] with tolerance {tol_lambda}"
        )));
    }
    let (mut lo, mut hi) = (lambda_lo, lambda_hi);
    let at_lo = spectrum_is_complex(f, lo, n_trunc, settings)?;
    let at_hi = spectrum_is_complex(f, hi, n_trunc, settings)?;
    if at_lo == at_hi {
        return Err(Error::NoTransition {
            lo: lambda_lo,
            hi: lambda_hi,
        });
    }
    while hi - lo > tol_lambda {
        let mid = 0.5 * (lo + hi);
        if spectrum_is_complex(f, mid, n_trunc, settings)? == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `G(z) = ∫ dq R_{m0,n0}(z, q)` over the zone, with `R(z, q) = (z - H(q))^{-1}`
/// and constant spectral functions on the plane waves `m0`, `n0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventProbe {
    pub m0: i64,
    pub n0: i64,
    pub z: Complex64,
    pub value: Complex64,
    /// Nodes moved by half a step because `z - H(q)` was singular there.
    pub perturbed_nodes: usize,
}

/// Midpoint-rule quadrature of `R_{m0,n0}(E + iη, q)` on `n_quad` nodes.
///
/// Each node solves `(z - H(q)) x = e_{n0}` and reads component `m0`. The
/// nodes `q_j = -π/a + (j + 1/2) h` never hit `q = -π/a`, and miss `q = 0`
/// whenever `n_quad` is even.
#[allow(clippy::too_many_arguments)]
pub fn projected_resolvent(
    f: &PotentialFamily,
    n_trunc: usize,
    m0: i64,
    n0: i64,
    energy: f64,
    eta: f64,
    n_quad: usize,
) -> Result<ResolventProbe> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Singularity(format!("eta must be positive, got {eta}")));
    }
    if n_quad < 64 {
        return Err(Error::Singularity(format!("n_quad must be at least 64, got {n_quad}")));
    }
    // H(0) supplies the potential; the kinetic diagonal is added per node
    let template = bloch::build_hq(f, 0.0, n_trunc)?;
    let (row, col) = match (template.index(m0), template.index(n0)) {
        (Some(r), Some(c)) => (r, c),
        _ => {
            return Err(Error::Singularity(format!(
                "plane waves ({m0}, {n0}) lie outside the truncation N = {n_trunc}"
            )))
        }
    };
    let dim = template.dim();
    let kb = template.bragg;
    let z = Complex64::new(energy, eta);
    let mut base = vec![Complex64::default(); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            base[i * dim + j] = -template.entries[(i, j)];
        }
        let k = template.order(i) as f64 * kb;
        base[i * dim + i] += k * k + z;
    }

    let edge = PI / f.period();
    let h = 2.0 * edge / n_quad as f64;
    let mut a = vec![Complex64::default(); dim * dim];
    let mut rhs = vec![Complex64::default(); dim];
    let mut solve_at = |q: f64| -> Option<Complex64> {
        a.copy_from_slice(&base);
        for i in 0..dim {
            // base holds z - V_0 on the diagonal
            let k = crate::bloch::plane_wave(q, template.order(i), kb);
            a[i * dim + i] -= k * k;
        }
        rhs.iter_mut().for_each(|v| *v = Complex64::default());
        rhs[col] = Complex64::from(1.0);
        linalg::solve_in_place(&mut a, dim, &mut rhs).then(|| rhs[row])
    };

    let mut sum = Complex64::default();
    let mut perturbed = 0;
    for j in 0..n_quad {
        let q = -edge + (j as f64 + 0.5) * h;
        let value = match solve_at(q) {
            Some(v) => v,
            None => {
                perturbed += 1;
                solve_at(q + 0.5 * h).ok_or_else(|| {
                    Error::Quadrature(format!("singularity: quadrature failed, z - H(q) singular near q = {q} (z = {z})"))
                })?
            }
        };
        sum += value;
    }
    Ok(ResolventProbe {
        m0,
        n0,
        z,
        value: sum * h,
        perturbed_nodes: perturbed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v0: f64, lambda: f64) -> PotentialFamily {
        PotentialFamily::pt_lattice(v0, 1.0).unwrap().with_lambda(lambda).unwrap()
    }

    fn settings() -> DetectorSettings {
        DetectorSettings::for_period(1.0)
    }

    #[test]
    fn threshold_centre_pairs_are_defective() {
        let records = classify_point(&pt(0.2, 1.0), 8, 0.0, &settings()).unwrap();
        let defective: Vec<f64> = records
            .iter()
            .filter(|r| r.classification == Classification::Defective)
            .map(|r| r.energy.re)
            .collect();
        assert_eq!(defective.len(), 8);
        for (m, e) in defective.iter().enumerate() {
            let expected = (2.0 * PI * (m + 1) as f64).powi(2);
            assert!((e - expected).abs() < 1e-6 * expected);
        }
    }

    #[test]
    fn free_particle_pairs_are_diagonalizable() {
        let f = PotentialFamily::free(1.0).unwrap();
        let records = classify_point(&f, 6, 0.0, &settings()).unwrap();
        let pairs: Vec<_> = records.iter().filter(|r| r.pair.0 != r.pair.1).collect();
        assert_eq!(pairs.len(), 6);
        assert!(pairs
            .iter()
            .all(|r| r.classification == Classification::DegenerateDiagonalizable));
    }

    #[test]
    fn below_threshold_no_pair_is_defective() {
        for q in [0.0, -PI] {
            let records = classify_point(&pt(0.2, 0.9), 16, q, &settings()).unwrap();
            assert!(records.iter().all(|r| r.classification != Classification::Defective));
            let low_cap = (2.0 * 2.0 * PI).powi(2) + 1.0;
            let min_gap = records
                .iter()
                .filter(|r| r.energy.re < low_cap)
                .map(|r| r.gap)
                .fold(f64::INFINITY, f64::min);
            assert!(min_gap > 0.0);
        }
    }

    #[test]
    fn classify_rejects_generic_q() {
        assert!(classify_point(&pt(0.2, 1.0), 4, 0.3, &settings()).is_err());
        assert!(classify_point(&pt(0.2, 1.0), 4, PI, &settings()).is_ok());
    }

    #[test]
    fn singular_energies_of_threshold_lattice() {
        let e = singular_energies(&pt(0.2, 1.0), 10, &settings()).unwrap();
        assert_eq!(e.len(), 9);
        for (i, energy) in e.iter().enumerate() {
            let n = (i + 1) as f64;
            assert!((energy - (n * PI).powi(2)).abs() < 1e-6);
        }
        let deeper = singular_energies(&pt(0.5, 1.0), 10, &settings()).unwrap();
        for (a, b) in e.iter().zip(&deeper) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn hermitian_lattice_has_no_singular_energies() {
        assert!(singular_energies(&pt(0.2, 0.0), 12, &settings()).unwrap().is_empty());
    }

    #[test]
    fn no_transition_for_real_family() {
        let f = pt(0.2, 0.0);
        let real_only = PotentialFamily::new(1.0, f.real_coeffs().clone(), Default::default(), 0.0).unwrap();
        let err = find_lambda_c(&real_only, 8, 0.0, 2.0, 1e-2, &settings()).unwrap_err();
        assert!(matches!(err, Error::NoTransition { .. }));
    }

    #[test]
    fn threshold_bisection() {
        let lc = find_lambda_c(&pt(0.2, 0.0), 8, 0.5, 1.5, 1e-3, &settings()).unwrap();
        assert!((lc - 1.0).abs() <= 1e-3, "lambda_c = {lc}");
    }

    #[test]
    fn resolvent_preconditions() {
        let f = pt(0.2, 1.0);
        assert!(projected_resolvent(&f, 2, 1, 0, 1.0, 0.0, 128).is_err());
        assert!(projected_resolvent(&f, 2, 1, 0, 1.0, 0.1, 32).is_err());
        assert!(projected_resolvent(&f, 2, 5, 0, 1.0, 0.1, 128).is_err());
    }

    #[test]
    fn resolvent_of_free_particle_matches_closed_form() {
        // R_{0,0}(z, q) = 1 / (z - q^2) for V = 0
        let f = PotentialFamily::free(1.0).unwrap();
        let (e, eta) = (-1.0, 0.5);
        let probe = projected_resolvent(&f, 2, 0, 0, e, eta, 4096).unwrap();
        let z = Complex64::new(e, eta);
        let n = 200_000;
        let h = 2.0 * PI / n as f64;
        let reference: Complex64 = (0..n)
            .map(|j| {
                let q = -PI + (j as f64 + 0.5) * h;
                (z - q * q).inv() * h
            })
            .sum();
        assert!((probe.value - reference).norm() < 1e-6 * reference.norm());
        assert_eq!(probe.perturbed_nodes, 0);
    }
}
