//! The complex, real and chiral fermion integrals.
//!
//! * complex: `Z = det(iD)`, basis independent.
//! * real: `F = Pf(iM)` with `M_jk = [e_j, D e_k] = ⟨J e_j, D e_k⟩`. `M` is
//!   antisymmetric exactly when `εε′ = −1` (s = 1, 2, 3, 4); otherwise the
//!   Grassmann action vanishes and so does the integral.
//! * chiral (s = 2): `F± = Pf(iM±)` with `M` restricted to `H±`.
//!
//! For an orthonormal basis with columns `E`, `M = Eᵀ·K†·D·E`, where `K` is
//! the matrix of `J`. A change of basis `E ↦ E·Uᵀ` sends `M ↦ U·M·Uᵀ` and
//! `Pf(M) ↦ det U·Pf(M)`; [`Ambiguity`] records what is left of that freedom
//! after restricting to the bases from [`crate::bases`].

use std::fmt;

use num_complex::Complex64;

use crate::bases::{self, BasisKind, CanonicalBasis, Subspace};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, I};
use crate::pfaffian;
use crate::triple::{AntilinearOp, KoDimension, SpectralTriple};

/// Kernel threshold for [`index_of`], relative to the spectral norm of `D`.
pub const KERNEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ambiguity {
    None,
    Sign,
    Phase,
}

impl Ambiguity {
    pub fn as_str(self) -> &'static str {
        match self {
            Ambiguity::None => "none",
            Ambiguity::Sign => "sign",
            Ambiguity::Phase => "phase",
        }
    }
}

impl fmt::Display for Ambiguity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: Complex64,
    pub ambiguity: Ambiguity,
    pub basis_kind: BasisKind,
}

/// The matrix `M_jk = ⟨J e_j, D e_k⟩` of the bilinear action in a given basis.
#[derive(Debug, Clone, PartialEq)]
pub struct RealFormMatrix {
    pub m: CMatrix,
    /// Whether `εε′ = −1`, i.e. whether `M` is expected to be antisymmetric.
    pub skew: bool,
}

impl RealFormMatrix {
    /// `‖M + Mᵀ‖_F / ‖M‖_F`.
    pub fn skew_residual(&self) -> f64 {
        pfaffian::skew_residual(&self.m)
    }

    /// `‖M − Mᵀ‖_F / ‖M‖_F`.
    pub fn symmetry_residual(&self) -> f64 {
        linalg::relative(&(&self.m - self.m.transpose()), linalg::frobenius(&self.m))
    }

    /// `Pf(M)`; errors unless `M` is antisymmetric.
    pub fn pfaffian(&self) -> Result<Complex64> {
        pfaffian::pfaffian_of(&self.m)
    }

    /// `Pf(iM)`, the value of the real integral in this basis.
    pub fn pfaffian_i(&self) -> Result<Complex64> {
        pfaffian::pfaffian_of(&(&self.m * I))
    }
}

fn bilinear_form(j: &AntilinearOp, d: &CMatrix, e: &CMatrix) -> CMatrix {
    e.transpose() * j.k_matrix().adjoint() * d * e
}

/// `M_jk = ⟨J e_j, D e_k⟩`. The basis may span a subspace, giving the restriction of `M`.
pub fn real_form_matrix(t: &SpectralTriple, b: &CanonicalBasis) -> Result<RealFormMatrix> {
    if b.dim() != t.n() {
        return Err(Error::DimensionMismatch {
            what: "basis",
            expected: t.n().to_string(),
            found: b.dim().to_string(),
        });
    }
    let rf = RealFormMatrix {
        m: bilinear_form(t.j(), t.dirac(), b.matrix()),
        skew: t.signs().action_is_skew(),
    };
    if rf.skew {
        let residual = rf.skew_residual();
        if residual.is_nan() || residual > pfaffian::TAU_SKEW {
            return Err(Error::NotSkew { residual });
        }
    }
    Ok(rf)
}

/// `V = ⊕ [[0, 1], [−1, 0]]`, the matrix with `conj(M) = V·M·Vᵀ` in a quaternionic basis.
pub fn symplectic_blocks(n: usize) -> CMatrix {
    let mut v = CMatrix::zeros(n, n);
    for k in 0..n / 2 {
        v[(2 * k, 2 * k + 1)] = Complex64::new(1.0, 0.0);
        v[(2 * k + 1, 2 * k)] = Complex64::new(-1.0, 0.0);
    }
    v
}

/// `Z = det(iD)`.
pub fn complex_integral(t: &SpectralTriple) -> IntegralResult {
    IntegralResult {
        value: linalg::determinant(&(t.dirac() * I)),
        ambiguity: Ambiguity::None,
        basis_kind: BasisKind::Generic,
    }
}

/// The reproducible basis used for the real integral: [`bases::real_basis`]
/// when `J² = 1`, [`bases::quaternionic_basis`] when `J² = −1`.
pub fn canonical_basis(t: &SpectralTriple) -> Result<CanonicalBasis> {
    if t.signs().eps == 1 {
        bases::real_basis(t.j())
    } else {
        bases::quaternionic_basis(t.j())
    }
}

fn real_ambiguity(s: KoDimension) -> Ambiguity {
    match s.value() {
        1 => Ambiguity::Sign,
        _ => Ambiguity::None,
    }
}

/// `F = Pf(iM)` in the canonical basis, or `0` when `εε′ ≠ −1`.
pub fn real_integral(t: &SpectralTriple) -> Result<IntegralResult> {
    let b = canonical_basis(t)?;
    real_integral_in_basis(t, &b)
}

/// `F = Pf(iM)` in a caller-chosen basis of all of `H`.
pub fn real_integral_in_basis(t: &SpectralTriple, b: &CanonicalBasis) -> Result<IntegralResult> {
    if b.len() != t.n() {
        return Err(Error::DimensionMismatch {
            what: "basis size",
            expected: t.n().to_string(),
            found: b.len().to_string(),
        });
    }
    let rf = real_form_matrix(t, b)?;
    let value = if rf.skew { rf.pfaffian_i()? } else { Complex64::new(0.0, 0.0) };
    Ok(IntegralResult { value, ambiguity: real_ambiguity(t.s()), basis_kind: b.kind() })
}

/// `Pf(M)` (without the factor `i`) in the canonical basis. Requires `εε′ = −1`.
pub fn action_pfaffian(t: &SpectralTriple) -> Result<Complex64> {
    if !t.signs().action_is_skew() {
        return Err(Error::UnsupportedKo {
            s: t.s().value(),
            rule: "the action matrix is symmetric unless εε′ = −1 (s ∈ {1, 2, 3, 4})",
        });
    }
    real_form_matrix(t, &canonical_basis(t)?)?.pfaffian()
}

/// For s = 1: the real integral in the canonical real basis and in the same
/// basis with its first two vectors exchanged.
pub fn sign_ambiguity_witness_s1(t: &SpectralTriple) -> Result<(Complex64, Complex64)> {
    if t.s().value() != 1 {
        return Err(Error::UnsupportedKo { s: t.s().value(), rule: "the sign witness is for s = 1" });
    }
    if t.n() < 2 {
        return Err(Error::DimensionMismatch {
            what: "dimension",
            expected: "n ≥ 2".into(),
            found: t.n().to_string(),
        });
    }
    let b = bases::real_basis(t.j())?;
    let a = real_integral_in_basis(t, &b)?.value;
    let swapped = real_integral_in_basis(t, &b.swapped(0, 1))?.value;
    Ok((a, swapped))
}

/// Two 2×2 triples at s = 3 with `D = λI` and `D = −λI`, whose `Pf(M)` are
/// `λ` and `−λ` in the canonical quaternionic basis.
pub fn s3_sign_example_with(lambda: f64) -> (SpectralTriple, SpectralTriple) {
    let s = KoDimension::new(3).expect("3 is a KO-dimension");
    let k = linalg::real_matrix(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let j = AntilinearOp::new(k).expect("square");
    let d = |x: f64| CMatrix::identity(2, 2) * Complex64::new(x, 0.0);
    let pos = SpectralTriple::odd(s, d(lambda), j.clone()).expect("2x2 shapes");
    let neg = SpectralTriple::odd(s, d(-lambda), j).expect("2x2 shapes");
    (pos, neg)
}

pub fn s3_sign_example() -> (SpectralTriple, SpectralTriple) {
    s3_sign_example_with(1.0)
}

fn require_s(t: &SpectralTriple, s: u8, rule: &'static str) -> Result<()> {
    if t.s().value() != s {
        return Err(Error::UnsupportedKo { s: t.s().value(), rule });
    }
    Ok(())
}

const CHIRAL_RULE: &str = "chiral integrals are non-trivial only for s = 2 (ε″ = −1 with εε′ = −1)";

/// The chirality-adapted bases of `H₊` and `H₋` at s = 2, the latter being
/// `J` applied to the former in reverse order (see [`bases::j_related_minus_basis`]).
pub fn chiral_bases(t: &SpectralTriple) -> Result<(CanonicalBasis, CanonicalBasis)> {
    require_s(t, 2, CHIRAL_RULE)?;
    let plus = bases::chiral_adapted_basis(t, Subspace::Plus)?;
    let minus = bases::j_related_minus_basis(t, &plus);
    Ok((plus, minus))
}

/// `F± = Pf(iM±)` in the bases of [`chiral_bases`].
pub fn chiral_integral(t: &SpectralTriple, side: Subspace) -> Result<IntegralResult> {
    let (plus, minus) = chiral_bases(t)?;
    match side {
        Subspace::Plus => chiral_integral_in_basis(t, &plus),
        Subspace::Minus => chiral_integral_in_basis(t, &minus),
        Subspace::Both => Err(Error::UnsupportedKo {
            s: 2,
            rule: "a chiral integral is over H₊ or H₋; the product over both is the real integral",
        }),
    }
}

/// `Pf(iM)` with `M` restricted to the span of `b`, which should lie in one chirality eigenspace.
pub fn chiral_integral_in_basis(t: &SpectralTriple, b: &CanonicalBasis) -> Result<IntegralResult> {
    require_s(t, 2, CHIRAL_RULE)?;
    let rf = real_form_matrix(t, b)?;
    Ok(IntegralResult { value: rf.pfaffian_i()?, ambiguity: Ambiguity::Phase, basis_kind: b.kind() })
}

/// Index `tr(Γ|ker D)`, with the kernel spanned by eigenvectors whose
/// eigenvalues satisfy `|λ| ≤ tol·max|λ|`.
pub fn index_of(t: &SpectralTriple, tol: f64) -> Result<i64> {
    if !t.s().is_even() {
        return Err(Error::UnsupportedKo { s: t.s().value(), rule: "the index needs a chirality grading" });
    }
    let (values, vectors) = linalg::hermitian_eigen(t.dirac());
    let cut = tol * values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let trace: f64 = values
        .iter()
        .enumerate()
        .filter(|(_, l)| l.abs() <= cut)
        .map(|(k, _)| {
            let v = vectors.column(k).into_owned();
            linalg::inner(&v, &(t.gamma() * &v)).re
        })
        .sum();
    Ok(trace.round() as i64)
}

/// An s = 4 triple together with the s = 2 triple on `H ⊕ H` built from it:
/// `Γ′ = diag(Γ, −Γ)`, `D′ = [[D, μ̄Γ], [μΓ, D]]`, `J′ = [[0, J], [J, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubledTriple {
    pub base: SpectralTriple,
    pub mu: Complex64,
    pub derived: SpectralTriple,
}

pub fn double_triple(base: &SpectralTriple, mu: Complex64) -> Result<DoubledTriple> {
    require_s(base, 4, "the doubling construction starts from s = 4")?;
    let n = base.n();
    let g = base.gamma();
    let d = base.dirac();
    let k = base.j().k_matrix();

    let mut gamma = CMatrix::zeros(2 * n, 2 * n);
    gamma.view_mut((0, 0), (n, n)).copy_from(g);
    gamma.view_mut((n, n), (n, n)).copy_from(&(-g));

    let mut dirac = CMatrix::zeros(2 * n, 2 * n);
    dirac.view_mut((0, 0), (n, n)).copy_from(d);
    dirac.view_mut((n, n), (n, n)).copy_from(d);
    dirac.view_mut((0, n), (n, n)).copy_from(&(g * mu.conj()));
    dirac.view_mut((n, 0), (n, n)).copy_from(&(g * mu));

    let mut kk = CMatrix::zeros(2 * n, 2 * n);
    kk.view_mut((0, n), (n, n)).copy_from(k);
    kk.view_mut((n, 0), (n, n)).copy_from(k);

    let s2 = KoDimension::new(2).expect("2 is a KO-dimension");
    let derived = SpectralTriple::new(s2, dirac, gamma, AntilinearOp::new(kk)?)?;
    Ok(DoubledTriple { base: base.clone(), mu, derived })
}

fn embed(n: usize, v: &CVector, upper: bool) -> CVector {
    let mut w = CVector::zeros(2 * n);
    let at = if upper { 0 } else { n };
    w.rows_mut(at, n).copy_from(v);
    w
}

/// Basis of `H′₊ ≅ H₊ ⊕ H₋` made of the `J`-paired bases of the base triple's
/// `H₊` (upper copy) followed by its `H₋` (lower copy).
pub fn doubled_chiral_basis(dt: &DoubledTriple) -> Result<CanonicalBasis> {
    let n = dt.base.n();
    let plus = bases::j_paired_chiral_basis(&dt.base, true)?;
    let minus = bases::j_paired_chiral_basis(&dt.base, false)?;
    let list: Vec<CVector> = plus
        .vectors()
        .map(|v| embed(n, &v, true))
        .chain(minus.vectors().map(|v| embed(n, &v, false)))
        .collect();
    Ok(CanonicalBasis::from_columns(linalg::columns_to_matrix(2 * n, &list), BasisKind::ChiralAdapted))
}

/// `F₊ = Pf(iM′₊)` for the derived s = 2 triple in [`doubled_chiral_basis`].
/// Changes between such bases are symplectic on each summand, so the value is unambiguous.
pub fn doubled_chiral_integral(dt: &DoubledTriple) -> Result<IntegralResult> {
    let b = doubled_chiral_basis(dt)?;
    let rf = real_form_matrix(&dt.derived, &b)?;
    Ok(IntegralResult { value: rf.pfaffian_i()?, ambiguity: Ambiguity::None, basis_kind: b.kind() })
}

/// `det(D² + |μ|²)^{1/4} · e^{iθ I_D / 2}` with `e^{iθ} = iμ/|μ|`, `θ ∈ (−π, π]`.
pub fn closed_form_fchiral(dt: &DoubledTriple) -> Result<Complex64> {
    if dt.mu == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroMu);
    }
    let d = dt.base.dirac();
    let n = d.nrows();
    let shifted = d * d + CMatrix::identity(n, n) * Complex64::new(dt.mu.norm_sqr(), 0.0);
    let modulus = linalg::determinant(&shifted).re.powf(0.25);
    let theta = (I * dt.mu).arg();
    let index = index_of(&dt.base, KERNEL_TOL)?;
    Ok(Complex64::from_polar(modulus, theta * index as f64 / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockKind {
    /// Four vectors built from an eigenvector with eigenvalue `λ > 0`.
    Eigen(f64),
    /// A `J`-pair of zero modes in `H₊`.
    ZeroPlus,
    /// A `J`-pair of zero modes in `H₋`.
    ZeroMinus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiralBlock {
    pub kind: BlockKind,
    /// The diagonal block of `M′₊` on this block's basis vectors.
    pub m: CMatrix,
    pub pfaffian: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    pub blocks: Vec<ChiralBlock>,
    pub basis: CanonicalBasis,
    /// Full `M′₊` in `basis`.
    pub m: CMatrix,
}

impl BlockDecomposition {
    /// `Π Pf(i·block)`.
    pub fn value(&self) -> Complex64 {
        self.blocks
            .iter()
            .map(|b| pfaffian::pfaffian_of(&(&b.m * I)).unwrap_or(Complex64::new(0.0, 0.0)))
            .product()
    }

    /// Relative size of `M′₊` outside the diagonal blocks.
    pub fn off_block_residual(&self) -> f64 {
        let mut off = self.m.clone();
        let mut at = 0;
        for b in &self.blocks {
            let k = b.m.nrows();
            off.view_mut((at, at), (k, k)).fill(Complex64::new(0.0, 0.0));
            at += k;
        }
        linalg::relative(&off, linalg::frobenius(&self.m))
    }
}

/// Makes the first component with modulus above `1e-12` real and positive.
fn fix_phase(v: &CVector) -> CVector {
    match v.iter().find(|z| z.norm() > 1e-12) {
        Some(z) => v * (z.conj() / z.norm()),
        None => v.clone(),
    }
}

/// Splits `H′₊` into the blocks of the eigenvector recipe: for each `J`-pair
/// representative `ψ` of a positive eigenvalue `λ`,
/// `ψ₁ = (1+Γ)ψ/√2, ψ₂ = Jψ₁, ψ₃ = (1−Γ)ψ/√2, ψ₄ = Jψ₃` embedded as
/// `(ψ₁,0), (ψ₂,0), (0,ψ₃), (0,ψ₄)`; then `J`-pairs of zero modes in `H₊`
/// (upper copy) and in `H₋` (lower copy).
pub fn doubled_block_decomposition(dt: &DoubledTriple) -> Result<BlockDecomposition> {
    let base = &dt.base;
    let n = base.n();
    let j = base.j();
    let (values, vectors) = linalg::hermitian_eigen(base.dirac());
    let spectral_norm = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let cut = KERNEL_TOL * spectral_norm;
    let cluster_gap = crate::TAU_EIG * spectral_norm.max(1.0);
    let column = |k: usize| fix_phase(&vectors.column(k).into_owned());

    let mut vecs: Vec<CVector> = Vec::with_capacity(n);
    let mut kinds: Vec<(BlockKind, usize)> = Vec::new();
    let plus_proj = base.chiral_projector(true);
    let minus_proj = base.chiral_projector(false);
    let sqrt2 = Complex64::new(std::f64::consts::SQRT_2, 0.0);

    // positive eigenvalues, clustered
    let mut k = 0;
    while k < n {
        if values[k] <= cut {
            k += 1;
            continue;
        }
        let start = k;
        while k + 1 < n && values[k + 1] - values[k] <= cluster_gap {
            k += 1;
        }
        let cluster: Vec<CVector> = (start..=k).map(column).collect();
        let dim = cluster.len();
        let lambda = values[start..=k].iter().sum::<f64>() / dim as f64;
        let pairs = bases::pair_seeds(j, cluster, dim, &[]);
        for psi in pairs.iter().step_by(2) {
            let psi1 = (&plus_proj * psi) * Complex64::new(2.0, 0.0) / sqrt2;
            let psi2 = j.apply_unchecked(&psi1);
            let psi3 = (&minus_proj * psi) * Complex64::new(2.0, 0.0) / sqrt2;
            let psi4 = j.apply_unchecked(&psi3);
            vecs.push(embed(n, &psi1, true));
            vecs.push(embed(n, &psi2, true));
            vecs.push(embed(n, &psi3, false));
            vecs.push(embed(n, &psi4, false));
            kinds.push((BlockKind::Eigen(lambda), 4));
        }
        k += 1;
    }

    // zero modes, split by chirality
    let kernel: Vec<CVector> = (0..n).filter(|&k| values[k].abs() <= cut).map(column).collect();
    for (proj, upper, kind) in [(&plus_proj, true, BlockKind::ZeroPlus), (&minus_proj, false, BlockKind::ZeroMinus)] {
        let mut part: Vec<CVector> = Vec::new();
        for v in &kernel {
            let w = proj * v;
            if let Some(e) = normalized_fresh(&w, &part) {
                part.push(e);
            }
        }
        let dim = part.len();
        let pairs = bases::pair_seeds(j, part, dim, &[]);
        for pair in pairs.chunks(2) {
            for v in pair {
                vecs.push(embed(n, v, upper));
            }
            kinds.push((kind, 2));
        }
    }

    if vecs.len() != n {
        return Err(Error::BasisIncomplete { found: vecs.len(), expected: n });
    }
    let basis = CanonicalBasis::from_columns(linalg::columns_to_matrix(2 * n, &vecs), BasisKind::ChiralAdapted);
    let m = real_form_matrix(&dt.derived, &basis)?.m;
    let mut blocks = Vec::with_capacity(kinds.len());
    let mut at = 0;
    for (kind, size) in kinds {
        let block = m.view((at, at), (size, size)).into_owned();
        let pf = pfaffian::pfaffian_of(&block)?;
        blocks.push(ChiralBlock { kind, m: block, pfaffian: pf });
        at += size;
    }
    Ok(BlockDecomposition { blocks, basis, m })
}

fn normalized_fresh(v: &CVector, basis: &[CVector]) -> Option<CVector> {
    let w = linalg::orthogonalize(v, basis);
    let r = w.norm();
    if r < bases::SPAN_THRESHOLD {
        None
    } else {
        Some(w / Complex64::new(r, 0.0))
    }
}
