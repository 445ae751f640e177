//! Symmetric Toeplitz matrices and their trigonometric symbol.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, DenseSym, SquareMatrix};

/// A `d × d` symmetric Toeplitz matrix, stored as its generating vector:
/// entry `(j, k)` is `a[|j - k|]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymToeplitz {
    a: Vec<f64>,
}

/// Build `Toep(a)`.
pub fn toep(a: Vec<f64>) -> Result<SymToeplitz> {
    SymToeplitz::new(a)
}

impl SymToeplitz {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidDimension {
                expected: 1,
                got: 0,
            });
        }
        Ok(Self { a })
    }

    pub fn zeros(d: usize) -> Result<Self> {
        Self::new(vec![0.0; d])
    }

    pub fn identity(d: usize) -> Result<Self> {
        let mut a = vec![0.0; d];
        if let Some(a0) = a.first_mut() {
            *a0 = 1.0;
        }
        Self::new(a)
    }

    /// The generating vector.
    pub fn generator(&self) -> &[f64] {
        &self.a
    }

    pub fn into_generator(self) -> Vec<f64> {
        self.a
    }

    pub fn to_dense(&self) -> DenseSym {
        DenseSym::from_fn(self.dim(), |j, k| self.get(j, k))
    }

    /// `Toep(self.a - other.a)`.
    pub fn sub(&self, other: &SymToeplitz) -> Result<SymToeplitz> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Self::new(self.a.iter().zip(&other.a).map(|(x, y)| x - y).collect())
    }
}

impl SquareMatrix for SymToeplitz {
    fn dim(&self) -> usize {
        self.a.len()
    }
    #[inline]
    fn get(&self, row: usize, col: usize) -> f64 {
        self.a[row.abs_diff(col)]
    }
}

/// Average each diagonal of a square matrix into a Toeplitz generator.
///
/// Offset `s` pools the entries of both the `+s` and `-s` diagonals, so the
/// map is idempotent on Toeplitz input and agrees with the one-sided mean
/// when the input is symmetric. A constant diagonal returns its value
/// unchanged rather than a rounded mean.
pub fn avg<M: SquareMatrix + ?Sized>(m: &M) -> SymToeplitz {
    let d = m.dim();
    let mut sums = vec![0.0; d];
    let mut constant = vec![true; d];
    for j in 0..d {
        for k in 0..d {
            let s = j.abs_diff(k);
            let v = m.get(j, k);
            constant[s] &= v == m.get(0, s);
            sums[s] += v;
        }
    }
    for (s, v) in sums.iter_mut().enumerate() {
        let count = if s == 0 { d } else { 2 * (d - s) };
        *v = if constant[s] {
            m.get(0, s)
        } else {
            *v / count as f64
        };
    }
    SymToeplitz { a: sums }
}

/// `M[R, R]` for a strictly increasing index set `R` (for example
/// [`Ruler::indices`](crate::ruler::Ruler::indices)).
pub fn principal_submatrix<M: SquareMatrix + ?Sized>(m: &M, idx: &[usize]) -> Result<DenseSym> {
    let d = m.dim();
    if idx.is_empty() {
        return Err(Error::InvalidDimension {
            expected: 1,
            got: 0,
        });
    }
    if idx.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "indices must be strictly increasing",
        ));
    }
    if let Some(&bad) = idx.iter().find(|&&i| i >= d) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            bound: d,
        });
    }
    Ok(DenseSym::from_fn(idx.len(), |p, q| m.get(idx[p], idx[q])))
}

/// `L_e(x) = e_0 + 2 Σ_{s≥1} e_s cos(2π s x)` for `x ∈ [0, 1]`.
pub fn l_func(e: &[f64], x: f64) -> Result<f64> {
    if e.is_empty() {
        return Err(Error::InvalidDimension {
            expected: 1,
            got: 0,
        });
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain("x must lie in [0, 1]"));
    }
    let tail: f64 = e
        .iter()
        .enumerate()
        .skip(1)
        .map(|(s, &es)| es * libm::cos(2.0 * PI * s as f64 * x))
        .sum();
    Ok(e[0] + 2.0 * tail)
}

/// Clenshaw evaluation of `L_e` at angle `theta = 2πx`.
fn l_clenshaw(e: &[f64], theta: f64) -> f64 {
    let c = libm::cos(theta);
    let (mut b1, mut b2) = (0.0, 0.0);
    for &es in e[1..].iter().rev() {
        let b0 = 2.0 * es + 2.0 * c * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    // Σ_{s≥1} 2 e_s cos(sθ) = b1 cos θ − b2.
    e[0] + b1 * c - b2
}

/// Certified upper bound on `sup_{x∈[0,1]} |L_e(x)|`.
///
/// Evaluates `|L_e|` on the grid `{i / grid}` and adds the Lipschitz slack
/// `4π d² max|e_s| / grid`, which dominates the variation of `L_e` between
/// grid points. Requires `grid ≥ 8 d²`.
pub fn sup_l(e: &[f64], grid: usize) -> Result<f64> {
    let d = e.len();
    if d == 0 {
        return Err(Error::InvalidDimension {
            expected: 1,
            got: 0,
        });
    }
    if grid < 8 * d * d {
        return Err(Error::InvalidArgument("grid must be at least 8 d^2"));
    }
    if e.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite generator"));
    }
    if d == 1 {
        return Ok(e[0].abs());
    }
    // L_e(x) = L_e(1 - x), so half the grid suffices.
    let mut best = 0.0f64;
    for i in 0..=grid / 2 {
        let theta = 2.0 * PI * i as f64 / grid as f64;
        best = best.max(l_clenshaw(e, theta).abs());
    }
    let emax = e[1..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(best + 4.0 * PI * (d * d) as f64 * emax / grid as f64)
}

/// Best rank-`k` approximation: keep the `k` eigenpairs of largest
/// magnitude.
pub fn best_rank_k(t: &SymToeplitz, k: usize) -> Result<DenseSym> {
    let d = t.dim();
    if k == 0 || k > d {
        return Err(Error::InvalidArgument("rank must satisfy 1 <= k <= d"));
    }
    let eig = jacobi_eigen(t)?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.values[j].abs().total_cmp(&eig.values[i].abs()));
    let keep = &order[..k];
    Ok(DenseSym::from_fn(d, |r, c| {
        keep.iter()
            .map(|&i| eig.values[i] * eig.vector_entry(r, i) * eig.vector_entry(c, i))
            .sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{fro_norm, op_norm, SquareView};
    use crate::rng;
    use crate::ruler::full_ruler;

    #[test]
    fn toep_small() {
        let t = toep(vec![2.0, 1.0, 0.0]).unwrap();
        let want = [[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]];
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!(t.get(j, k), want[j][k]);
            }
        }
        assert_eq!(toep(vec![1.0]).unwrap().to_dense(), DenseSym::identity(1));
        assert_eq!(
            SymToeplitz::identity(7).unwrap().to_dense(),
            DenseSym::identity(7)
        );
        assert!(matches!(toep(vec![]), Err(Error::InvalidDimension { .. })));
    }

    #[test]
    fn avg_examples() {
        let m = [1.0, 3.0, 5.0, 7.0];
        let a = avg(&SquareView::new(2, &m).unwrap());
        assert_eq!(a.generator(), &[4.0, 4.0]);

        let x = [1.0, 2.0];
        let outer = DenseSym::from_fn(2, |j, k| x[j] * x[k]);
        assert_eq!(avg(&outer).generator(), &[2.5, 2.0]);

        let t = toep(vec![3.0, -1.0, 0.25, 2.0]).unwrap();
        assert_eq!(avg(&t), t);
    }

    #[test]
    fn submatrix_examples() {
        let sub = principal_submatrix(&DenseSym::identity(4), &[0, 2]).unwrap();
        assert_eq!(sub, DenseSym::identity(2));

        let t = toep(vec![3.0, 2.0, 1.0, 0.0]).unwrap();
        let sub = principal_submatrix(&t, &[0, 3]).unwrap();
        assert_eq!(sub.as_slice(), &[3.0, 0.0, 0.0, 3.0]);

        let full = full_ruler(4).unwrap();
        assert_eq!(
            principal_submatrix(&t, full.indices()).unwrap(),
            t.to_dense()
        );

        assert!(matches!(
            principal_submatrix(&t, &[0, 5]),
            Err(Error::IndexOutOfRange { index: 5, bound: 4 })
        ));
        assert!(principal_submatrix(&t, &[2, 1]).is_err());
    }

    #[test]
    fn l_func_examples() {
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(l_func(&[1.0, 0.0, 0.0], x).unwrap(), 1.0);
        }
        assert_eq!(l_func(&[0.0, 1.0], 0.0).unwrap(), 2.0);
        assert!((l_func(&[0.0, 1.0], 0.5).unwrap() + 2.0).abs() < 1e-15);
        assert!((l_func(&[1.0, 1.0], 0.25).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(l_func(&[1.0], 1.5), Err(Error::Domain(_))));
        assert!(matches!(l_func(&[1.0], -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn clenshaw_matches_direct_sum() {
        let e = [0.7, -1.2, 0.3, 2.5, -0.4];
        for i in 0..=50 {
            let x = i as f64 / 50.0;
            let direct = l_func(&e, x).unwrap();
            assert!((direct - l_clenshaw(&e, 2.0 * PI * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn sup_l_examples() {
        assert_eq!(sup_l(&[1.0, 0.0, 0.0, 0.0], 128).unwrap(), 1.0);
        let e = [2.0, 1.0, 0.0];
        assert!(sup_l(&e, 72).unwrap() >= 2.0 + 2f64.sqrt());
        assert!(matches!(sup_l(&e, 71), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn best_rank_k_examples() {
        let t = toep(vec![2.0, 1.0, 0.5, 0.1]).unwrap();
        let full = best_rank_k(&t, 4).unwrap();
        assert!(fro_norm(&full.sub(&t).unwrap()) < 1e-10);

        let id = toep(vec![1.0, 0.0, 0.0]).unwrap();
        let r1 = best_rank_k(&id, 1).unwrap();
        assert!((op_norm(&r1.sub(&id).unwrap()).unwrap() - 1.0).abs() < 1e-12);

        assert!(best_rank_k(&t, 5).is_err());
        assert!(best_rank_k(&t, 0).is_err());
    }

    #[test]
    fn best_rank_k_exact_for_low_rank() {
        // Two frequencies give a rank-4 cosine Toeplitz matrix.
        let (f, p) = ([0.13, 0.41], [1.3, 0.6]);
        let a = (0..12)
            .map(|s| {
                (0..2)
                    .map(|m| p[m] * libm::cos(2.0 * PI * s as f64 * f[m]))
                    .sum()
            })
            .collect();
        let t = toep(a).unwrap();
        let t4 = best_rank_k(&t, 4).unwrap();
        assert!(fro_norm(&t4.sub(&t).unwrap()) <= 1e-8 * fro_norm(&t));
    }

    #[test]
    fn frobenius_is_entry_sum() {
        let t = toep(vec![1.5, -0.5, 2.0]).unwrap();
        let by_hand = 3.0 * 1.5f64.powi(2) + 4.0 * 0.25 + 2.0 * 4.0;
        assert!((fro_norm(&t).powi(2) - by_hand).abs() <= 1e-12 * by_hand);
    }

    proptest::proptest! {
        #[test]
        fn symbol_bounds_operator_norm(seed in proptest::num::u64::ANY, d in 1usize..=20) {
            let mut g = rng::seeded(seed);
            let e: Vec<f64> = (0..d).map(|_| rng::symmetric_uniform(&mut g, 2.0)).collect();
            let t = toep(e.clone()).unwrap();
            let bound = sup_l(&e, 8 * d * d).unwrap();
            proptest::prop_assert!(op_norm(&t).unwrap() <= bound + 1e-9);
        }

        #[test]
        fn avg_fixes_toeplitz(a in proptest::collection::vec(-5.0f64..5.0, 1..12)) {
            let t = toep(a).unwrap();
            proptest::prop_assert_eq!(avg(&t), t);
        }
    }
}
