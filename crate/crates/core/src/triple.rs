//! Finite real spectral triples: the KO-dimension sign table, the antilinear
//! real structure, and structural validation.
//!
//! An antilinear operator on `ℂⁿ` is always of the form `v ↦ K·conj(v)` for
//! some matrix `K`. [`AntilinearOp`] stores `K`; every relation involving `J`
//! is then a matrix identity:
//!
//! | relation         | matrix form            |
//! |------------------|------------------------|
//! | `J² = ε`         | `K·K̄ = εI`             |
//! | `DJ = ε′JD`      | `D·K = ε′·K·D̄`         |
//! | `JΓJ⁻¹Γ = ε″`    | `K·Γ̄·K†·Γ = ε″I`       |

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// KO-dimension, an integer mod 8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KoDimension(u8);

impl KoDimension {
    pub fn new(s: i64) -> Result<Self> {
        if (0..8).contains(&s) {
            Ok(KoDimension(s as u8))
        } else {
            Err(Error::InvalidKoDimension(s))
        }
    }

    /// Reduces any integer mod 8.
    pub fn wrapping(s: i64) -> Self {
        KoDimension(s.rem_euclid(8) as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_even(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn signs(self) -> SignTriple {
        signs_for(self)
    }

    pub fn all() -> impl Iterator<Item = KoDimension> {
        (0..8).map(KoDimension)
    }
}

impl fmt::Display for KoDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The signs `(ε, ε′, ε″)` with `J² = ε`, `DJ = ε′JD`, `JΓJ⁻¹Γ = ε″`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignTriple {
    pub eps: i8,
    pub eps_prime: i8,
    pub eps_dprime: i8,
}

impl SignTriple {
    const fn new(eps: i8, eps_prime: i8, eps_dprime: i8) -> Self {
        SignTriple { eps, eps_prime, eps_dprime }
    }

    /// Whether the bilinear action `[ψ, Dψ]` is antisymmetric, i.e. `εε′ = −1`.
    pub fn action_is_skew(&self) -> bool {
        self.eps * self.eps_prime == -1
    }
}

const SIGN_TABLE: [SignTriple; 8] = [
    SignTriple::new(1, 1, 1),
    SignTriple::new(1, -1, 1),
    SignTriple::new(-1, 1, -1),
    SignTriple::new(-1, 1, 1),
    SignTriple::new(-1, 1, 1),
    SignTriple::new(-1, -1, 1),
    SignTriple::new(1, 1, -1),
    SignTriple::new(1, 1, 1),
];

pub fn signs_for(s: KoDimension) -> SignTriple {
    SIGN_TABLE[s.0 as usize]
}

fn sign_c(x: i8) -> Complex64 {
    Complex64::new(f64::from(x), 0.0)
}

/// Antilinear operator `v ↦ K·conj(v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntilinearOp {
    k: CMatrix,
}

impl AntilinearOp {
    pub fn new(k_matrix: CMatrix) -> Result<Self> {
        if !k_matrix.is_square() {
            return Err(Error::DimensionMismatch {
                what: "k_matrix",
                expected: "square".into(),
                found: format!("{}x{}", k_matrix.nrows(), k_matrix.ncols()),
            });
        }
        Ok(AntilinearOp { k: k_matrix })
    }

    /// Plain entrywise conjugation.
    pub fn conjugation(n: usize) -> Self {
        AntilinearOp { k: CMatrix::identity(n, n) }
    }

    pub fn k_matrix(&self) -> &CMatrix {
        &self.k
    }

    pub fn dim(&self) -> usize {
        self.k.nrows()
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "vector",
                expected: self.dim().to_string(),
                found: v.len().to_string(),
            });
        }
        Ok(self.apply_unchecked(v))
    }

    pub(crate) fn apply_unchecked(&self, v: &CVector) -> CVector {
        &self.k * linalg::conj_vec(v)
    }

    /// The matrix of `J²`, which is linear: `K·K̄`.
    pub fn square(&self) -> CMatrix {
        &self.k * linalg::conj(&self.k)
    }

    /// The linear operator `J·A·J⁻¹ = K·Ā·K†` (valid for unitary `K`).
    pub fn conjugate_linear(&self, a: &CMatrix) -> CMatrix {
        &self.k * linalg::conj(a) * self.k.adjoint()
    }

    /// Sign of `J²`, read off from `K·K̄` (`+1` or `−1` by the closer of the two).
    pub fn epsilon(&self) -> i8 {
        let sq = self.square();
        let n = self.dim();
        let id = CMatrix::identity(n, n);
        if linalg::frobenius(&(&sq - &id)) <= linalg::frobenius(&(&sq + &id)) {
            1
        } else {
            -1
        }
    }
}

pub fn apply_antilinear(j: &AntilinearOp, v: &CVector) -> Result<CVector> {
    j.apply(v)
}

/// A finite real spectral triple with algebra `ℂ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTriple {
    s: KoDimension,
    signs: SignTriple,
    d: CMatrix,
    gamma: CMatrix,
    j: AntilinearOp,
}

impl SpectralTriple {
    /// Assembles a triple after checking shapes. Use [`validate`] for the axioms.
    pub fn new(s: KoDimension, d: CMatrix, gamma: CMatrix, j: AntilinearOp) -> Result<Self> {
        let n = d.nrows();
        let shape = |what: &'static str, m: &CMatrix| -> Result<()> {
            if m.nrows() != n || m.ncols() != n {
                Err(Error::DimensionMismatch {
                    what,
                    expected: format!("{n}x{n}"),
                    found: format!("{}x{}", m.nrows(), m.ncols()),
                })
            } else {
                Ok(())
            }
        };
        shape("d", &d)?;
        shape("gamma", &gamma)?;
        shape("j_k", j.k_matrix())?;
        if n == 0 {
            return Err(Error::DimensionMismatch {
                what: "dimension",
                expected: "n > 0".into(),
                found: "0".into(),
            });
        }
        Ok(SpectralTriple { s, signs: signs_for(s), d, gamma, j })
    }

    /// Odd-s triple with `Γ = I`.
    pub fn odd(s: KoDimension, d: CMatrix, j: AntilinearOp) -> Result<Self> {
        let n = d.nrows();
        Self::new(s, d, CMatrix::identity(n, n), j)
    }

    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    pub fn s(&self) -> KoDimension {
        self.s
    }

    pub fn signs(&self) -> SignTriple {
        self.signs
    }

    pub fn dirac(&self) -> &CMatrix {
        &self.d
    }

    pub fn gamma(&self) -> &CMatrix {
        &self.gamma
    }

    pub fn j(&self) -> &AntilinearOp {
        &self.j
    }

    /// The same structures with a different Dirac operator.
    pub fn with_dirac(&self, d: CMatrix) -> Result<Self> {
        Self::new(self.s, d, self.gamma.clone(), self.j.clone())
    }

    /// Orthogonal direct sum of two triples of the same KO-dimension.
    pub fn direct_sum(&self, other: &SpectralTriple) -> Result<Self> {
        if self.s != other.s {
            return Err(Error::DimensionMismatch {
                what: "KO-dimension",
                expected: self.s.to_string(),
                found: other.s.to_string(),
            });
        }
        let d = linalg::block_diag(&[&self.d, &other.d]);
        let g = linalg::block_diag(&[&self.gamma, &other.gamma]);
        let k = linalg::block_diag(&[self.j.k_matrix(), other.j.k_matrix()]);
        Self::new(self.s, d, g, AntilinearOp { k })
    }

    /// Eigenvalues of `D`, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.d)
    }

    /// Orthogonal projector `P± = (Γ ± 1)/2` onto the `±1` eigenspace of `Γ`.
    ///
    /// `P₋` here is `(1 − Γ)/2`, so that it is a projector rather than minus one.
    pub fn chiral_projector(&self, plus: bool) -> CMatrix {
        let n = self.n();
        let id = CMatrix::identity(n, n);
        let half = Complex64::new(0.5, 0.0);
        if plus {
            (&self.gamma + id) * half
        } else {
            (id - &self.gamma) * half
        }
    }
}

/// Relations checked by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    DiracHermitian,
    GammaHermitian,
    GammaInvolution,
    JUnitary,
    JSquared,
    DiracJ,
    JGamma,
    GammaAnticommutes,
    GammaTrivial,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Relation::DiracHermitian => "D not Hermitian",
            Relation::GammaHermitian => "Γ not Hermitian",
            Relation::GammaInvolution => "Γ²≠I",
            Relation::JUnitary => "J not unitary",
            Relation::JSquared => "J²≠εI",
            Relation::DiracJ => "DJ≠ε′JD",
            Relation::JGamma => "JΓJ⁻¹Γ≠ε″I",
            Relation::GammaAnticommutes => "ΓD+DΓ≠0",
            Relation::GammaTrivial => "Γ≠±I",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub relation: Relation,
    pub residual: f64,
}

/// Every relation with its residual; `violations` are those above tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub tol: f64,
    pub residuals: Vec<(Relation, f64)>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, r: Relation) -> bool {
        self.violations.iter().any(|v| v.relation == r)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return writeln!(f, "OK");
        }
        writeln!(f, "{:<14} {:>24}  status", "relation", "residual")?;
        for (r, res) in &self.residuals {
            let status = if *res > self.tol { "FAIL" } else { "ok" };
            writeln!(f, "{:<14} {:>24.16e}  {status}", r.to_string(), res)?;
        }
        Ok(())
    }
}

/// Checks all structural axioms of `t`. Residuals are Frobenius norms relative
/// to `‖D‖_F` for relations involving `D` and to `√n = ‖I‖_F` otherwise.
pub fn validate(t: &SpectralTriple, tol: f64) -> ValidationReport {
    let n = t.n();
    let d = &t.d;
    let g = &t.gamma;
    let k = t.j.k_matrix();
    let id = CMatrix::identity(n, n);
    let signs = t.signs;
    let d_scale = linalg::frobenius(d);
    let unit_scale = (n as f64).sqrt();

    let mut residuals = vec![
        (Relation::DiracHermitian, linalg::relative(&(d - d.adjoint()), d_scale)),
        (Relation::GammaHermitian, linalg::relative(&(g - g.adjoint()), unit_scale)),
        (Relation::GammaInvolution, linalg::relative(&(g * g - &id), unit_scale)),
        (Relation::JUnitary, linalg::relative(&(k * k.adjoint() - &id), unit_scale)),
        (
            Relation::JSquared,
            linalg::relative(&(t.j.square() - &id * sign_c(signs.eps)), unit_scale),
        ),
        (
            Relation::DiracJ,
            linalg::relative(&(d * k - k * linalg::conj(d) * sign_c(signs.eps_prime)), d_scale),
        ),
        (
            Relation::JGamma,
            linalg::relative(
                &(t.j.conjugate_linear(g) * g - &id * sign_c(signs.eps_dprime)),
                unit_scale,
            ),
        ),
    ];
    if t.s.is_even() {
        residuals.push((Relation::GammaAnticommutes, linalg::relative(&(g * d + d * g), d_scale)));
    } else {
        let plus = linalg::frobenius(&(g - &id));
        let minus = linalg::frobenius(&(g + &id));
        residuals.push((Relation::GammaTrivial, plus.min(minus) / unit_scale));
    }

    let violations = residuals
        .iter()
        .filter(|(_, r)| r.is_nan() || *r > tol)
        .map(|&(relation, residual)| Violation { relation, residual })
        .collect();
    ValidationReport { tol, residuals, violations }
}

/// Whether the eigenvalues of `D` pair up as `λ_i = −λ_{n+1−i}` within
/// `tol·max(1, max|λ|)`.
pub fn spectrum_is_symmetric(t: &SpectralTriple, tol: f64) -> bool {
    let ev = t.spectrum();
    let scale = ev.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let n = ev.len();
    (0..n).all(|i| (ev[i] + ev[n - 1 - i]).abs() <= tol * scale)
}
