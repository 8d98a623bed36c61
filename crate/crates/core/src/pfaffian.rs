//! Pfaffians of complex skew-symmetric matrices.
//!
//! [`pfaffian`] reduces the matrix to tridiagonal form with the Parlett–Reid
//! `L·T·Lᵀ` elimination. Each step pivots the largest entry of the current
//! column below the diagonal into the subdiagonal slot, which is a symmetric
//! row/column swap and flips the sign of the Pfaffian. The Pfaffian of the
//! tridiagonal factor is the product of its entries `T[2k, 2k+1]`.
//!
//! [`pfaffian_oracle`] is an independent cofactor expansion used only for
//! verification on small matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Relative skew residual accepted on input.
pub const TAU_SKEW: f64 = 1e-10;
/// Columns whose pivot candidates are all below this (relative to `‖a‖_F`) are treated as zero.
pub const PIVOT_FLOOR: f64 = 1e-13;
pub const ORACLE_MAX_N: usize = 12;

/// A square matrix checked to satisfy `aᵀ = −a` within [`TAU_SKEW`]`·‖a‖_F`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    a: CMatrix,
}

impl SkewMatrix {
    pub fn new(a: CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                what: "skew matrix",
                expected: "square".into(),
                found: format!("{}x{}", a.nrows(), a.ncols()),
            });
        }
        let residual = skew_residual(&a);
        if residual.is_nan() || residual > TAU_SKEW {
            return Err(Error::NotSkew { residual });
        }
        Ok(SkewMatrix { a })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.a
    }

    pub fn into_inner(self) -> CMatrix {
        self.a
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

/// `‖a + aᵀ‖_F / ‖a‖_F`, or zero for the zero matrix.
pub fn skew_residual(a: &CMatrix) -> f64 {
    let scale = linalg::frobenius(a);
    if scale == 0.0 {
        return 0.0;
    }
    linalg::frobenius(&(a + a.transpose())) / scale
}

pub fn pfaffian(a: &SkewMatrix) -> Complex64 {
    pfaffian_ltl(a.matrix())
}

/// Checks skewness and computes the Pfaffian in one call.
pub fn pfaffian_of(a: &CMatrix) -> Result<Complex64> {
    Ok(pfaffian(&SkewMatrix::new(a.clone())?))
}

fn pfaffian_ltl(input: &CMatrix) -> Complex64 {
    let n = input.nrows();
    let one = Complex64::new(1.0, 0.0);
    if n == 0 {
        return one;
    }
    if n % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let floor = PIVOT_FLOOR * linalg::frobenius(input);
    let mut a = input.clone();
    let mut pf = one;
    for k in (0..n - 1).step_by(2) {
        let (offset, best) = (k + 1..n)
            .map(|i| (i, a[(i, k)].norm()))
            .fold((k + 1, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best.is_nan() || best <= floor {
            return Complex64::new(0.0, 0.0);
        }
        if offset != k + 1 {
            linalg::swap_symmetric(&mut a, k + 1, offset);
            pf = -pf;
        }
        let pivot = a[(k, k + 1)];
        pf *= pivot;
        if k + 2 < n {
            // tau_i = a[k, i] / a[k, k+1] for i ≥ k+2; the Schur complement update
            // a[i, j] += tau_i a[j, k+1] − a[i, k+1] tau_j keeps the trailing block skew.
            let tau: Vec<Complex64> = (k + 2..n).map(|i| a[(k, i)] / pivot).collect();
            let col: Vec<Complex64> = (k + 2..n).map(|i| a[(i, k + 1)]).collect();
            let m = n - k - 2;
            for r in 0..m {
                for s in 0..m {
                    a[(k + 2 + r, k + 2 + s)] += tau[r] * col[s] - col[r] * tau[s];
                }
            }
        }
    }
    pf
}

/// Pfaffian by cofactor expansion along the first row:
/// `Pf(A) = Σ_{j≥2} (−1)^j a_{1j} Pf(A with rows/cols 1 and j removed)` (1-based).
pub fn pfaffian_oracle(a: &SkewMatrix) -> Result<Complex64> {
    let n = a.dim();
    if n > ORACLE_MAX_N {
        return Err(Error::OracleTooLarge(n));
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(expand(a.matrix(), &idx))
}

fn expand(a: &CMatrix, idx: &[usize]) -> Complex64 {
    match idx.len() {
        0 => Complex64::new(1.0, 0.0),
        l if l % 2 == 1 => Complex64::new(0.0, 0.0),
        _ => {
            let first = idx[0];
            let mut total = Complex64::new(0.0, 0.0);
            for (pos, &j) in idx.iter().enumerate().skip(1) {
                let entry = a[(first, j)];
                if entry == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let rest: Vec<usize> = idx[1..]
                    .iter()
                    .copied()
                    .filter(|&x| x != j)
                    .collect();
                // 1-based column index is pos + 1, so the sign is (−1)^(pos+1)
                let sign = if pos % 2 == 1 { 1.0 } else { -1.0 };
                total += entry * sign * expand(a, &rest);
            }
            total
        }
    }
}

/// Returns `(Pf(u·a·uᵀ), det(u)·Pf(a))`.
pub fn pfaffian_congruence_check(a: &SkewMatrix, u: &CMatrix) -> Result<(Complex64, Complex64)> {
    if u.nrows() != a.dim() || u.ncols() != a.dim() {
        return Err(Error::DimensionMismatch {
            what: "change of basis",
            expected: format!("{0}x{0}", a.dim()),
            found: format!("{}x{}", u.nrows(), u.ncols()),
        });
    }
    let transformed = u * a.matrix() * u.transpose();
    let lhs = pfaffian_of(&transformed)?;
    let rhs = linalg::determinant(u) * pfaffian(a);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, random_skew};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn two_by_two(x: Complex64) -> SkewMatrix {
        SkewMatrix::new(CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), x, -x, c(0.0, 0.0)])).unwrap()
    }

    #[test]
    fn two_by_two_is_the_entry() {
        let x = c(1.5, -0.25);
        assert_eq!(pfaffian(&two_by_two(x)), x);
        assert_eq!(pfaffian_oracle(&two_by_two(x)).unwrap(), x);
        assert_eq!(pfaffian(&two_by_two(c(1.0, 0.0))), c(1.0, 0.0));
    }

    #[test]
    fn zero_four_by_four() {
        let z = SkewMatrix::new(CMatrix::zeros(4, 4)).unwrap();
        assert_eq!(pfaffian(&z), c(0.0, 0.0));
        assert_eq!(pfaffian_oracle(&z).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn four_by_four_closed_form() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_skew(4, &mut rng);
            let expected = a[(0, 1)] * a[(2, 3)] - a[(0, 2)] * a[(1, 3)] + a[(0, 3)] * a[(1, 2)];
            let s = SkewMatrix::new(a).unwrap();
            assert!((pfaffian_oracle(&s).unwrap() - expected).norm() < 1e-13);
            assert!((pfaffian(&s) - expected).norm() < 1e-12 * (1.0 + expected.norm()));
        }
    }

    #[test]
    fn odd_dimension_is_zero() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let s = SkewMatrix::new(random_skew(5, &mut rng)).unwrap();
        assert_eq!(pfaffian(&s), c(0.0, 0.0));
        assert_eq!(pfaffian_oracle(&s).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn empty_matrix_is_one() {
        let s = SkewMatrix::new(CMatrix::zeros(0, 0)).unwrap();
        assert_eq!(pfaffian(&s), c(1.0, 0.0));
    }

    #[test]
    fn rejects_non_skew() {
        let a = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(SkewMatrix::new(a), Err(Error::NotSkew { .. })));
        assert!(matches!(SkewMatrix::new(CMatrix::zeros(2, 3)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn oracle_refuses_large() {
        let s = SkewMatrix::new(CMatrix::zeros(14, 14)).unwrap();
        assert_eq!(pfaffian_oracle(&s), Err(Error::OracleTooLarge(14)));
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        // a12 = 0 forces a swap on the first step
        let mut a = CMatrix::zeros(4, 4);
        let set = |a: &mut CMatrix, i: usize, j: usize, x: f64| {
            a[(i, j)] = c(x, 0.0);
            a[(j, i)] = c(-x, 0.0);
        };
        set(&mut a, 0, 2, 2.0);
        set(&mut a, 1, 3, 3.0);
        set(&mut a, 0, 3, 0.5);
        let s = SkewMatrix::new(a).unwrap();
        // a12 a34 − a13 a24 + a14 a23 = 0 − 2·3 + 0 = −6
        assert!((pfaffian(&s) - c(-6.0, 0.0)).norm() < 1e-14);
        assert!((pfaffian_oracle(&s).unwrap() - c(-6.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn congruence_identity_and_swap() {
        let a = two_by_two(c(2.0, 1.0));
        let (l, r) = pfaffian_congruence_check(&a, &CMatrix::identity(2, 2)).unwrap();
        assert_eq!(l, pfaffian(&a));
        assert_eq!(r, pfaffian(&a));
        let swap = crate::linalg::real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let (l, r) = pfaffian_congruence_check(&a, &swap).unwrap();
        assert!((l - c(-2.0, -1.0)).norm() < 1e-15);
        assert!((r - c(-2.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn example_block_value() {
        // [[0,μ,0,λ],[−μ,0,−λ,0],[0,λ,0,−μ̄],[−λ,0,μ̄,0]] has Pf = −λ² − |μ|²
        let lam = 0.7;
        let mu = c(0.3, -1.1);
        let z = c(0.0, 0.0);
        let l = c(lam, 0.0);
        let m = CMatrix::from_row_slice(
            4,
            4,
            &[z, mu, z, l, -mu, z, -l, z, z, l, z, -mu.conj(), -l, z, mu.conj(), z],
        );
        let pf = pfaffian(&SkewMatrix::new(m).unwrap());
        let expected = c(-lam * lam - mu.norm_sqr(), 0.0);
        assert!((pf - expected).norm() < 1e-14, "{pf}");
    }
}
