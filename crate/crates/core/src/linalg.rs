//! Dense complex linear algebra used by the Bloch and ladder modules:
//! non-Hermitian eigendecomposition with left and right eigenvectors, the
//! matrix exponential, and a small pivoted linear solver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

/// Eigenvalues with unit-norm right (`A w = E w`) and left (`l^H A = E l^H`)
/// eigenvectors stored column-wise in matching order.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<C>,
    pub right: DMatrix<C>,
    pub left: DMatrix<C>,
}

impl EigenDecomposition {
    /// Biorthogonal overlap `|l^H w| / (|l| |w|)` of eigenpair `k`.
    ///
    /// It is 1 for normal matrices and vanishes at a defective eigenvalue,
    /// where the left and right eigenvectors become orthogonal.
    pub fn overlap(&self, k: usize) -> f64 {
        let l = self.left.column(k);
        let w = self.right.column(k);
        let dot: C = l.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum();
        (dot.norm() / (l.norm() * w.norm())).min(1.0)
    }
}

/// Full eigendecomposition of a square complex matrix.
///
/// The matrix is first brought to upper-triangular Schur form `A = Q T Q^H`.
/// Matrices that are already triangular skip the QR iteration (a lower
/// triangular one is reversed into upper form), so their eigenvalues are the
/// diagonal entries exactly. Eigenvectors of `T` come from back substitution
/// with tiny pivots clamped to `ε‖T‖`, which keeps defective eigenvalues
/// finite and nearly parallel instead of dividing by zero. An exactly
/// repeated diagonal entry that is coupled to its copy is treated as a Jordan
/// chain, so both copies share one eigenvector. Hermitian input goes to the
/// symmetric solver and gets orthonormal vectors with `left == right`.
pub fn eig(a: &DMatrix<C>) -> Result<EigenDecomposition> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eig needs a square matrix");
    if n == 0 {
        return Ok(EigenDecomposition {
            values: Vec::new(),
            right: DMatrix::zeros(0, 0),
            left: DMatrix::zeros(0, 0),
        });
    }
    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Bloch("matrix has non-finite entries".into()));
    }

    if is_hermitian(a) {
        // orthonormal eigenvectors serve as both left and right vectors
        let se = nalgebra::SymmetricEigen::try_new(a.clone(), f64::EPSILON, 100 * n.max(10))
            .ok_or(Error::EigenNonConvergence { dim: n })?;
        let values = se.eigenvalues.iter().map(|&e| C::from(e)).collect();
        return Ok(EigenDecomposition {
            values,
            right: se.eigenvectors.clone(),
            left: se.eigenvectors,
        });
    }

    let (q, t) = schur(a)?;
    let values: Vec<C> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let smin = (f64::EPSILON * scale).max(f64::MIN_POSITIVE * 1e10);

    let mut tr = DMatrix::<C>::zeros(n, n);
    let mut tl = DMatrix::<C>::zeros(n, n);
    for k in 0..n {
        let x = triangular_right(&t, k, smin);
        let y = triangular_left(&t, k, smin);
        tr.set_column(k, &x);
        tl.set_column(k, &y);
    }
    let mut right = &q * tr;
    let mut left = &q * tl;
    for mut col in right.column_iter_mut() {
        let norm = col.norm();
        col /= C::from(norm);
    }
    for mut col in left.column_iter_mut() {
        let norm = col.norm();
        col /= C::from(norm);
    }
    Ok(EigenDecomposition {
        values,
        right,
        left,
    })
}

fn is_hermitian(a: &DMatrix<C>) -> bool {
    let n = a.nrows();
    (0..n).all(|j| (j..n).all(|i| a[(i, j)] == a[(j, i)].conj()))
}

/// Unitary `Q` and upper-triangular `T` with `A = Q T Q^H`.
fn schur(a: &DMatrix<C>) -> Result<(DMatrix<C>, DMatrix<C>)> {
    let n = a.nrows();
    let zero = C::default();
    let upper = (0..n).all(|j| (j + 1..n).all(|i| a[(i, j)] == zero));
    if upper {
        return Ok((DMatrix::identity(n, n), a.clone()));
    }
    let lower = (0..n).all(|j| (0..j).all(|i| a[(i, j)] == zero));
    if lower {
        // P A P with the reversal permutation P = P^H is upper triangular
        let t = DMatrix::from_fn(n, n, |i, j| a[(n - 1 - i, n - 1 - j)]);
        let p = DMatrix::from_fn(n, n, |i, j| if i + j == n - 1 { C::from(1.0) } else { zero });
        return Ok((p, t));
    }

    let max_iter = 100 * n.max(10);
    let decomposition = nalgebra::Schur::try_new(a.clone(), f64::EPSILON, max_iter)
        .ok_or(Error::EigenNonConvergence { dim: n })?;
    let (q, mut t) = decomposition.unpack();
    let tnorm = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for j in 0..n {
        for i in j + 1..n {
            if t[(i, j)].norm() > 1e3 * f64::EPSILON * tnorm {
                return Err(Error::EigenNonConvergence { dim: n });
            }
            t[(i, j)] = zero;
        }
    }
    Ok((q, t))
}

fn clamp_pivot(d: C, smin: f64) -> C {
    if d.norm() < smin {
        C::from(smin)
    } else {
        d
    }
}

/// Right eigenvector of upper-triangular `t` for eigenvalue `t[k,k]`,
/// supported on indices `0..=k`.
fn triangular_right(t: &DMatrix<C>, k: usize, smin: f64) -> DVector<C> {
    let n = t.nrows();
    let lambda = t[(k, k)];
    let mut x = DVector::<C>::zeros(n);
    let mut top = k;
    x[k] = C::from(1.0);
    for i in (0..k).rev() {
        let s: C = (i + 1..=top).map(|j| t[(i, j)] * x[j]).sum();
        if t[(i, i)] == lambda && s != C::default() {
            // exact repeat coupled to this one: a Jordan chain, whose only
            // eigenvector starts at the earlier copy
            x.fill(C::default());
            x[i] = C::from(1.0);
            top = i;
            continue;
        }
        x[i] = -s / clamp_pivot(t[(i, i)] - lambda, smin);
        rescale_if_large(&mut x);
    }
    x
}

/// Left eigenvector `y` (with `y^H t = λ y^H`) for eigenvalue `t[k,k]`,
/// supported on indices `k..n`.
fn triangular_left(t: &DMatrix<C>, k: usize, smin: f64) -> DVector<C> {
    let n = t.nrows();
    let lambda = t[(k, k)];
    let mut y = DVector::<C>::zeros(n);
    let mut bottom = k;
    y[k] = C::from(1.0);
    // t^H y = conj(λ) y, row i of t^H is conj of column i of t
    for i in k + 1..n {
        let s: C = (bottom..i).map(|j| t[(j, i)].conj() * y[j]).sum();
        if t[(i, i)] == lambda && s != C::default() {
            y.fill(C::default());
            y[i] = C::from(1.0);
            bottom = i;
            continue;
        }
        y[i] = -s / clamp_pivot((t[(i, i)] - lambda).conj(), smin);
        rescale_if_large(&mut y);
    }
    y
}

fn rescale_if_large(v: &mut DVector<C>) {
    let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if big > 1e100 {
        *v /= C::from(big);
    }
}

/// `exp(A)` by scaling and squaring a truncated Taylor series.
///
/// The matrix is scaled by `2^-s` until its 1-norm is at most 1/2, where a
/// degree-20 Taylor polynomial has a truncation error below `1e-25`.
pub fn expm(a: &DMatrix<C>) -> DMatrix<C> {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm1 > 0.5 {
        squarings = (norm1 / 0.5).log2().ceil() as u32;
    }
    let scaled = a / C::from(2f64.powi(squarings as i32));

    let mut result = DMatrix::<C>::identity(n, n);
    let mut term = DMatrix::<C>::identity(n, n);
    for j in 1..=20 {
        term = &term * &scaled / C::from(j as f64);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Solves `A x = b` in place by Gaussian elimination with partial pivoting.
///
/// `a` is row-major `n x n` and is overwritten; on success `b` holds `x`.
/// Returns `false` when a pivot vanishes.
pub fn solve_in_place(a: &mut [C], n: usize, b: &mut [C]) -> bool {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let (pivot, pivot_abs) = (col..n)
            .map(|r| (r, a[r * n + col].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pivot_abs > 0.0) {
            return false;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let inv = a[col * n + col].inv();
        for r in col + 1..n {
            let factor = a[r * n + col] * inv;
            if factor == C::default() {
                continue;
            }
            for j in col..n {
                let upper = a[col * n + j];
                a[r * n + j] -= factor * upper;
            }
            let bc = b[col];
            b[r] -= factor * bc;
        }
    }
    for r in (0..n).rev() {
        let s: C = (r + 1..n).map(|j| a[r * n + j] * b[j]).sum();
        b[r] = (b[r] - s) / a[r * n + r];
    }
    b.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
