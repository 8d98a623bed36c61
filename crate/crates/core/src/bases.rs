//! Ordered orthonormal bases adapted to the real structure and the chirality.
//!
//! The phase of a Pfaffian `Pf(M)` with `M_jk = ⟨J e_j, D e_k⟩` depends on the
//! basis only through `det U` of the change of basis. Restricting to bases
//! built here limits that freedom:
//!
//! * [`real_basis`] (`J² = 1`): vectors fixed by `J`, changes of basis are real
//!   orthogonal, so only a sign remains.
//! * [`quaternionic_basis`] (`J² = −1`): ordered pairs `(e, Je)`, changes of
//!   basis are symplectic with `det U = 1`.
//! * [`chiral_adapted_basis`]: eigenvectors of `Γ`, all of `H₊` before `H₋`.
//!
//! All constructions sweep a deterministic list of seed vectors (the standard
//! basis unless the caller supplies others), so the output is reproducible.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::triple::{AntilinearOp, SpectralTriple};

/// A seed whose component orthogonal to the current span is shorter than this is skipped.
pub const SPAN_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Real,
    QuaternionicPaired,
    ChiralAdapted,
    Generic,
}

impl BasisKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BasisKind::Real => "real",
            BasisKind::QuaternionicPaired => "quaternionic_paired",
            BasisKind::ChiralAdapted => "chiral_adapted",
            BasisKind::Generic => "generic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subspace {
    Plus,
    Minus,
    Both,
}

/// Ordered orthonormal vectors stored as the columns of an `n × m` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalBasis {
    vectors: CMatrix,
    kind: BasisKind,
}

impl CanonicalBasis {
    /// Wraps arbitrary columns. Orthonormality is the caller's responsibility;
    /// see [`CanonicalBasis::orthonormality_residual`].
    pub fn from_columns(vectors: CMatrix, kind: BasisKind) -> Self {
        CanonicalBasis { vectors, kind }
    }

    fn from_list(n: usize, list: &[CVector], kind: BasisKind) -> Self {
        CanonicalBasis { vectors: linalg::columns_to_matrix(n, list), kind }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }

    pub fn vectors(&self) -> impl Iterator<Item = CVector> + '_ {
        self.vectors.column_iter().map(|c| c.into_owned())
    }

    /// The same basis with vectors `a` and `b` exchanged. The kind becomes
    /// [`BasisKind::Generic`] unless the swap keeps the kind's defining property.
    pub fn swapped(&self, a: usize, b: usize) -> Self {
        let mut v = self.vectors.clone();
        v.swap_columns(a, b);
        let kind = match self.kind {
            BasisKind::Real | BasisKind::Generic => self.kind,
            _ => BasisKind::Generic,
        };
        CanonicalBasis { vectors: v, kind }
    }

    /// The same basis with vector `k` multiplied by `e^{iα}`.
    pub fn with_phase(&self, k: usize, alpha: f64) -> Self {
        let mut v = self.vectors.clone();
        let mut col = v.column_mut(k);
        col *= Complex64::from_polar(1.0, alpha);
        let kind = match self.kind {
            BasisKind::ChiralAdapted => BasisKind::ChiralAdapted,
            _ => BasisKind::Generic,
        };
        CanonicalBasis { vectors: v, kind }
    }

    /// Concatenation; the kind is kept only if both parts share it.
    pub fn concat(&self, other: &CanonicalBasis) -> Self {
        let n = self.dim();
        let mut v = CMatrix::zeros(n, self.len() + other.len());
        v.view_mut((0, 0), (n, self.len())).copy_from(&self.vectors);
        v.view_mut((0, self.len()), (n, other.len())).copy_from(&other.vectors);
        let kind = if self.kind == other.kind { self.kind } else { BasisKind::Generic };
        CanonicalBasis { vectors: v, kind }
    }

    /// `‖E†E − I‖_F`.
    pub fn orthonormality_residual(&self) -> f64 {
        let m = self.len();
        linalg::frobenius(&(self.vectors.adjoint() * &self.vectors - CMatrix::identity(m, m)))
    }

    /// `max_k ‖J e_k − e_k‖`.
    pub fn real_residual(&self, j: &AntilinearOp) -> f64 {
        self.vectors()
            .map(|e| (j.apply_unchecked(&e) - &e).norm())
            .fold(0.0, f64::max)
    }

    /// `max_k ‖e_{2k} − J e_{2k−1}‖` (1-based).
    pub fn pairing_residual(&self, j: &AntilinearOp) -> f64 {
        (0..self.len() / 2)
            .map(|k| (self.vector(2 * k + 1) - j.apply_unchecked(&self.vector(2 * k))).norm())
            .fold(0.0, f64::max)
    }

    /// The matrix `U` with `e′_j = Σ_k U_jk e_k`, i.e. `U = (E†E′)ᵀ` for orthonormal `E`.
    pub fn change_of_basis_to(&self, other: &CanonicalBasis) -> CMatrix {
        (self.vectors.adjoint() * &other.vectors).transpose()
    }
}

fn standard_seeds(n: usize) -> Vec<CVector> {
    (0..n)
        .map(|i| {
            let mut v = CVector::zeros(n);
            v[i] = Complex64::new(1.0, 0.0);
            v
        })
        .collect()
}

/// Normalized component of `v` orthogonal to `basis`, or `None` if it is already spanned.
fn fresh_direction(v: &CVector, basis: &[CVector]) -> Option<CVector> {
    let norm = v.norm();
    if norm == 0.0 {
        return None;
    }
    let w = linalg::orthogonalize(&(v / Complex64::new(norm, 0.0)), basis);
    let r = w.norm();
    if r < SPAN_THRESHOLD {
        None
    } else {
        Some(w / Complex64::new(r, 0.0))
    }
}

fn require_epsilon(j: &AntilinearOp, required: i8) -> Result<()> {
    let found = j.epsilon();
    if found != required {
        return Err(Error::WrongEpsilon { required, found });
    }
    Ok(())
}

/// Orthonormal basis of `J`-fixed vectors, from the standard basis as seeds.
pub fn real_basis(j: &AntilinearOp) -> Result<CanonicalBasis> {
    real_basis_from_seeds(j, standard_seeds(j.dim()))
}

/// Orthonormal basis of `J`-fixed vectors built by sweeping `seeds`.
///
/// Each seed `v` contributes the fixed vectors `v + Jv` and `i(v − Jv)`, tried in
/// that order. Inner products of fixed vectors are real, so Gram–Schmidt with
/// the real parts of the coefficients stays inside the fixed set.
pub fn real_basis_from_seeds<I>(j: &AntilinearOp, seeds: I) -> Result<CanonicalBasis>
where
    I: IntoIterator<Item = CVector>,
{
    require_epsilon(j, 1)?;
    let n = j.dim();
    let mut basis: Vec<CVector> = Vec::with_capacity(n);
    for v in seeds {
        if basis.len() == n {
            break;
        }
        let jv = j.apply_unchecked(&v);
        let candidates = [&v + &jv, (&v - &jv) * linalg::I];
        for w in candidates {
            if basis.len() == n {
                break;
            }
            if let Some(e) = fresh_real_direction(&w, &basis, j) {
                basis.push(e);
            }
        }
    }
    if basis.len() < n {
        return Err(Error::BasisIncomplete { found: basis.len(), expected: n });
    }
    Ok(CanonicalBasis::from_list(n, &basis, BasisKind::Real))
}

fn fresh_real_direction(w: &CVector, basis: &[CVector], j: &AntilinearOp) -> Option<CVector> {
    let norm = w.norm();
    if norm < SPAN_THRESHOLD {
        return None;
    }
    let mut x = w / Complex64::new(norm, 0.0);
    for _ in 0..2 {
        for b in basis {
            let p = linalg::inner(b, &x).re;
            x -= b * Complex64::new(p, 0.0);
        }
    }
    // symmetrize once so rounding does not drift off the fixed set
    x = (&x + j.apply_unchecked(&x)) * Complex64::new(0.5, 0.0);
    let r = x.norm();
    if r < SPAN_THRESHOLD {
        None
    } else {
        Some(x / Complex64::new(r, 0.0))
    }
}

/// Basis `(e₁, Je₁, e₂, Je₂, …)` of `ℂⁿ`, from the standard basis as seeds.
pub fn quaternionic_basis(j: &AntilinearOp) -> Result<CanonicalBasis> {
    quaternionic_basis_from_seeds(j, standard_seeds(j.dim()))
}

/// Basis `(e₁, Je₁, e₂, Je₂, …)` where each `e_k` is the next seed made
/// orthogonal to the pairs already chosen.
///
/// `⟨e, Je⟩ = 0` whenever `J² = −1`, and the span of the pairs is `J`-invariant,
/// so `Je` is automatically orthogonal to the earlier pairs.
pub fn quaternionic_basis_from_seeds<I>(j: &AntilinearOp, seeds: I) -> Result<CanonicalBasis>
where
    I: IntoIterator<Item = CVector>,
{
    require_epsilon(j, -1)?;
    let n = j.dim();
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let list = pair_seeds(j, seeds, n, &[]);
    if list.len() < n {
        return Err(Error::BasisIncomplete { found: list.len(), expected: n });
    }
    Ok(CanonicalBasis::from_list(n, &list, BasisKind::QuaternionicPaired))
}

/// Greedy `(e, Je)` pairing of `seeds` until `target` vectors are found.
/// Seeds are first made orthogonal to `exclude` (an orthonormal `J`-invariant set).
pub(crate) fn pair_seeds<I>(j: &AntilinearOp, seeds: I, target: usize, exclude: &[CVector]) -> Vec<CVector>
where
    I: IntoIterator<Item = CVector>,
{
    let mut span: Vec<CVector> = exclude.to_vec();
    let mut out = Vec::with_capacity(target);
    for v in seeds {
        if out.len() >= target {
            break;
        }
        if let Some(e) = fresh_direction(&v, &span) {
            let je = j.apply_unchecked(&e);
            span.push(e.clone());
            span.push(je.clone());
            out.push(e);
            out.push(je);
        }
    }
    out
}

/// Orthonormal basis of the `±1` eigenspace of `Γ`, as `P±` applied to the
/// standard basis followed by Gram–Schmidt.
fn eigenspace_vectors(t: &SpectralTriple, plus: bool) -> Vec<CVector> {
    let p = t.chiral_projector(plus);
    let mut out: Vec<CVector> = Vec::new();
    for i in 0..t.n() {
        let v = p.column(i).into_owned();
        if let Some(mut e) = fresh_direction(&v, &out) {
            // re-project to stay inside the eigenspace
            e = &p * e;
            let r = e.norm();
            out.push(e / Complex64::new(r, 0.0));
        }
    }
    out
}

fn j_paired_eigenspace(t: &SpectralTriple, plus: bool) -> Result<Vec<CVector>> {
    let seeds = eigenspace_vectors(t, plus);
    let dim = seeds.len();
    if dim % 2 == 1 {
        return Err(Error::OddDimension(dim));
    }
    let list = pair_seeds(t.j(), seeds, dim, &[]);
    if list.len() < dim {
        return Err(Error::BasisIncomplete { found: list.len(), expected: dim });
    }
    Ok(list)
}

/// Orthonormal `Γ`-eigenbasis of the requested eigenspace(s), `H₊` first.
///
/// For s = 4, where `J` preserves each eigenspace, every eigenspace is further
/// `J`-paired as in [`quaternionic_basis`].
pub fn chiral_adapted_basis(t: &SpectralTriple, subspace: Subspace) -> Result<CanonicalBasis> {
    if !t.s().is_even() {
        return Err(Error::UnsupportedKo {
            s: t.s().value(),
            rule: "chirality splitting requires even KO-dimension",
        });
    }
    let pair = t.s().value() == 4;
    let part = |plus: bool| -> Result<Vec<CVector>> {
        if pair {
            j_paired_eigenspace(t, plus)
        } else {
            Ok(eigenspace_vectors(t, plus))
        }
    };
    let mut list = Vec::new();
    if matches!(subspace, Subspace::Plus | Subspace::Both) {
        list.extend(part(true)?);
    }
    if matches!(subspace, Subspace::Minus | Subspace::Both) {
        list.extend(part(false)?);
    }
    Ok(CanonicalBasis::from_list(t.n(), &list, BasisKind::ChiralAdapted))
}

/// `J`-paired basis of one `Γ`-eigenspace. Only possible when `J² = −1` and
/// `J` maps the eigenspace to itself (`ε″ = +1`).
pub fn j_paired_chiral_basis(t: &SpectralTriple, plus: bool) -> Result<CanonicalBasis> {
    let signs = t.signs();
    if !t.s().is_even() || signs.eps != -1 || signs.eps_dprime != 1 {
        return Err(Error::UnsupportedKo {
            s: t.s().value(),
            rule: "J-pairing inside a chirality eigenspace needs ε = −1 and ε″ = +1",
        });
    }
    let list = j_paired_eigenspace(t, plus)?;
    Ok(CanonicalBasis::from_list(t.n(), &list, BasisKind::ChiralAdapted))
}

/// For `ε″ = −1` (`J` swaps `H₊` and `H₋`): the `H₋` basis `(J f_m, …, J f₁)`
/// obtained from an `H₊` basis `(f₁, …, f_m)`.
///
/// The reversed order makes `(f₁, …, f_m, J f_m, …, J f₁)` an even
/// permutation of the paired order `(f₁, J f₁, …, f_m, J f_m)`.
pub fn j_related_minus_basis(t: &SpectralTriple, plus_basis: &CanonicalBasis) -> CanonicalBasis {
    let list: Vec<CVector> = (0..plus_basis.len())
        .rev()
        .map(|k| t.j().apply_unchecked(&plus_basis.vector(k)))
        .collect();
    CanonicalBasis::from_list(t.n(), &list, plus_basis.kind())
}
