//! Dense symmetric matrices, eigensolvers, and matrix norms.
//!
//! Two independent routes compute the spectrum of a symmetric matrix:
//!
//! - cyclic Jacobi rotations ([`jacobi_eigen`]), which also yields
//!   eigenvectors and is the reference path;
//! - Householder reduction to tridiagonal form followed by Sturm-sequence
//!   bisection ([`extreme_eigenvalues`]), which only locates the two extreme
//!   eigenvalues and scales to larger dimensions.
//!
//! [`op_norm`] uses Jacobi up to [`JACOBI_MAX_DIM`] and the tridiagonal route
//! above it.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Stop Jacobi sweeps once the off-diagonal Frobenius mass drops below this
/// fraction of the full Frobenius norm.
pub const JACOBI_TOL: f64 = 1e-12;

/// Largest dimension for which [`op_norm`] runs Jacobi sweeps.
pub const JACOBI_MAX_DIM: usize = 32;

const MAX_SWEEPS: usize = 100;

/// Read access to a square matrix.
pub trait SquareMatrix {
    fn dim(&self) -> usize;
    fn get(&self, row: usize, col: usize) -> f64;

    /// Row-major copy of all entries.
    fn to_row_major(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for j in 0..d {
            for k in 0..d {
                out.push(self.get(j, k));
            }
        }
        out
    }
}

/// Borrowed row-major square matrix with no symmetry requirement.
#[derive(Debug, Clone, Copy)]
pub struct SquareView<'a> {
    d: usize,
    data: &'a [f64],
}

impl<'a> SquareView<'a> {
    pub fn new(d: usize, data: &'a [f64]) -> Result<Self> {
        if d == 0 || data.len() != d * d {
            return Err(Error::InvalidDimension {
                expected: d * d,
                got: data.len(),
            });
        }
        Ok(Self { d, data })
    }
}

impl SquareMatrix for SquareView<'_> {
    fn dim(&self) -> usize {
        self.d
    }
    fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.d + col]
    }
}

/// Dense symmetric matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSym {
    d: usize,
    data: Vec<f64>,
}

impl DenseSym {
    /// Wrap row-major data, checking symmetry to 1e-12 relative to the
    /// largest entry.
    pub fn new(d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 || data.len() != d * d {
            return Err(Error::InvalidDimension {
                expected: d * d,
                got: data.len(),
            });
        }
        let scale = data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for j in 0..d {
            for k in (j + 1)..d {
                let (a, b) = (data[j * d + k], data[k * d + j]);
                if (a - b).abs() > 1e-12 * scale {
                    return Err(Error::InvalidArgument("matrix is not symmetric"));
                }
            }
        }
        Ok(Self { d, data })
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            data: vec![0.0; d * d],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d);
        for j in 0..d {
            m.data[j * d + j] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (j, &v) in diag.iter().enumerate() {
            m.data[j * diag.len() + j] = v;
        }
        m
    }

    /// Build from the upper triangle of a function; the lower half mirrors it.
    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(d);
        for j in 0..d {
            for k in j..d {
                let v = f(j, k);
                m.data[j * d + k] = v;
                m.data[k * d + j] = v;
            }
        }
        m
    }

    /// Copy any square matrix, symmetrizing as `(A + Aᵀ) / 2`.
    pub fn symmetrized<M: SquareMatrix + ?Sized>(m: &M) -> Self {
        Self::from_fn(m.dim(), |j, k| 0.5 * (m.get(j, k) + m.get(k, j)))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `self - other`, entrywise.
    pub fn sub<M: SquareMatrix + ?Sized>(&self, other: &M) -> Result<Self> {
        if other.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: other.dim(),
            });
        }
        Ok(Self::from_fn(self.d, |j, k| {
            self.get(j, k) - other.get(j, k)
        }))
    }
}

impl SquareMatrix for DenseSym {
    fn dim(&self) -> usize {
        self.d
    }
    #[inline]
    fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.d + col]
    }
    fn to_row_major(&self) -> Vec<f64> {
        self.data.clone()
    }
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Eigenvalues in no particular order.
    pub values: Vec<f64>,
    /// Row-major `d × d`; column `i` is the unit eigenvector of `values[i]`.
    pub vectors: Vec<f64>,
}

impl SymEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Component `row` of eigenvector `i`.
    #[inline]
    pub fn vector_entry(&self, row: usize, i: usize) -> f64 {
        self.vectors[row * self.dim() + i]
    }
}

fn check_finite<M: SquareMatrix + ?Sized>(m: &M) -> Result<Vec<f64>> {
    let a = m.to_row_major();
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite matrix entry"));
    }
    Ok(a)
}

fn off_diagonal_sq(a: &[f64], d: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..d {
        for k in (j + 1)..d {
            s += 2.0 * a[j * d + k] * a[j * d + k];
        }
    }
    s
}

/// Cyclic Jacobi eigensolver for symmetric input.
///
/// Sweeps over all pairs `(p, q)` until the off-diagonal Frobenius norm is
/// below `JACOBI_TOL · ‖M‖_F`.
pub fn jacobi_eigen<M: SquareMatrix + ?Sized>(m: &M) -> Result<SymEigen> {
    let d = m.dim();
    let mut a = check_finite(m)?;
    let mut v = vec![0.0; d * d];
    for j in 0..d {
        v[j * d + j] = 1.0;
    }
    let fro_sq: f64 = a.iter().map(|x| x * x).sum();
    let target = (JACOBI_TOL * JACOBI_TOL) * fro_sq;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_sq(&a, d) <= target {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * d + p];
                let aqq = a[q * d + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    let t = 1.0 / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                if t == 0.0 {
                    // Rotation below machine resolution.
                    a[p * d + q] = 0.0;
                    a[q * d + p] = 0.0;
                    continue;
                }
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for r in 0..d {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * d + p];
                    let arq = a[r * d + q];
                    let np = c * arp - s * arq;
                    let nq = s * arp + c * arq;
                    a[r * d + p] = np;
                    a[p * d + r] = np;
                    a[r * d + q] = nq;
                    a[q * d + r] = nq;
                }
                a[p * d + p] = app - t * apq;
                a[q * d + q] = aqq + t * apq;
                a[p * d + q] = 0.0;
                a[q * d + p] = 0.0;
                for r in 0..d {
                    let vrp = v[r * d + p];
                    let vrq = v[r * d + q];
                    v[r * d + p] = c * vrp - s * vrq;
                    v[r * d + q] = s * vrp + c * vrq;
                }
            }
        }
    }
    if !converged && off_diagonal_sq(&a, d) > target {
        return Err(Error::Numeric("Jacobi sweeps did not converge"));
    }
    let values = (0..d).map(|j| a[j * d + j]).collect();
    Ok(SymEigen { values, vectors: v })
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// Returns `(diagonal, subdiagonal)`.
pub fn tridiagonalize<M: SquareMatrix + ?Sized>(m: &M) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = m.dim();
    let mut a = check_finite(m)?;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let norm = libm::sqrt((k + 1..n).map(|i| a[i * n + k] * a[i * n + k]).sum::<f64>());
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let alpha = if x0 > 0.0 { -norm } else { norm };
        for i in 0..len {
            v[i] = a[(k + 1 + i) * n + k];
        }
        v[0] -= alpha;
        let vnorm = libm::sqrt(v[..len].iter().map(|x| x * x).sum::<f64>());
        if vnorm == 0.0 {
            continue;
        }
        for x in &mut v[..len] {
            *x /= vnorm;
        }
        // p = A_sub v, K = vᵀp, q = p - K v; A_sub -= 2 (v qᵀ + q vᵀ).
        for i in 0..len {
            let row = &a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            p[i] = row.iter().zip(&v[..len]).map(|(x, y)| x * y).sum();
        }
        let kk: f64 = v[..len].iter().zip(&p[..len]).map(|(x, y)| x * y).sum();
        for i in 0..len {
            p[i] -= kk * v[i];
        }
        for i in 0..len {
            let (vi, qi) = (v[i], p[i]);
            let row = &mut a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            for (j, x) in row.iter_mut().enumerate() {
                *x -= 2.0 * (vi * p[j] + qi * v[j]);
            }
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + k + 1] = alpha;
        for i in (k + 2)..n {
            a[i * n + k] = 0.0;
            a[k * n + i] = 0.0;
        }
    }
    let diag = (0..n).map(|i| a[i * n + i]).collect();
    let sub = (0..n.saturating_sub(1))
        .map(|i| a[(i + 1) * n + i])
        .collect();
    Ok((diag, sub))
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`.
fn sturm_count(diag: &[f64], sub: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { sub[i - 1] * sub[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest and largest eigenvalue via tridiagonalization and bisection.
pub fn extreme_eigenvalues<M: SquareMatrix + ?Sized>(m: &M) -> Result<(f64, f64)> {
    let (diag, sub) = tridiagonalize(m)?;
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r =
            if i > 0 { sub[i - 1].abs() } else { 0.0 } + if i + 1 < n { sub[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    if lo == hi {
        return Ok((lo, hi));
    }
    let scale = lo.abs().max(hi.abs());
    let bisect = |mut a: f64, mut b: f64, target: usize| {
        // Find the point where sturm_count first reaches `target`.
        for _ in 0..200 {
            if b - a <= 4.0 * f64::EPSILON * scale {
                break;
            }
            let mid = 0.5 * (a + b);
            if sturm_count(&diag, &sub, mid) >= target {
                b = mid;
            } else {
                a = mid;
            }
        }
        0.5 * (a + b)
    };
    let pad = f64::EPSILON * scale * 4.0;
    let min = bisect(lo - pad, hi + pad, 1);
    let max = bisect(lo - pad, hi + pad, n);
    Ok((min, max))
}

/// Operator (spectral) norm via Jacobi sweeps.
pub fn op_norm_jacobi<M: SquareMatrix + ?Sized>(m: &M) -> Result<f64> {
    let eig = jacobi_eigen(m)?;
    Ok(eig.values.iter().fold(0.0f64, |acc, x| acc.max(x.abs())))
}

/// Operator norm via Householder tridiagonalization and Sturm bisection.
pub fn op_norm_tridiagonal<M: SquareMatrix + ?Sized>(m: &M) -> Result<f64> {
    let (min, max) = extreme_eigenvalues(m)?;
    Ok(min.abs().max(max.abs()))
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn op_norm<M: SquareMatrix + ?Sized>(m: &M) -> Result<f64> {
    if m.dim() <= JACOBI_MAX_DIM {
        op_norm_jacobi(m)
    } else {
        op_norm_tridiagonal(m)
    }
}

pub fn fro_norm<M: SquareMatrix + ?Sized>(m: &M) -> f64 {
    let d = m.dim();
    let mut s = 0.0;
    for j in 0..d {
        for k in 0..d {
            let x = m.get(j, k);
            s += x * x;
        }
    }
    libm::sqrt(s)
}

/// Largest absolute entry.
pub fn max_norm<M: SquareMatrix + ?Sized>(m: &M) -> f64 {
    let d = m.dim();
    let mut s = 0.0f64;
    for j in 0..d {
        for k in 0..d {
            s = s.max(m.get(j, k).abs());
        }
    }
    s
}
