//! Random Dirac operators for a fixed `(Γ, J)` and batch evaluation of the integrals.
//!
//! The measure is Gaussian: a GUE-like Hermitian matrix is drawn and then
//! projected onto the operators allowed by the KO-dimension,
//!
//! ```text
//! H ← (H + ε′·J H J⁻¹) / 2          (DJ = ε′JD)
//! H ← (H − Γ H Γ) / 2               (even s: DΓ = −ΓD)
//! ```
//!
//! Both maps are averaging projectors that commute with each other, and both
//! preserve Hermiticity.
//!
//! Random streams: sample `i` of a run with seed `σ` draws from
//! `ChaCha20Rng::seed_from_u64(σ)` switched to stream `i`. Samples therefore do
//! not depend on each other and parallel runs reproduce serial ones.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::bases::Subspace;
use crate::error::{Error, Result};
use crate::integrals::{self, KERNEL_TOL};
use crate::linalg::{self, CMatrix};
use crate::triple::{AntilinearOp, KoDimension, SpectralTriple};

fn infeasible(s: KoDimension, n: usize, reason: impl Into<String>) -> Error {
    Error::Infeasible { s: s.value(), n, reason: reason.into() }
}

/// `⊕ [[0, −1], [1, 0]]` on `m` dimensions (`m` even).
fn symplectic(m: usize) -> CMatrix {
    let mut k = CMatrix::zeros(m, m);
    for b in 0..m / 2 {
        k[(2 * b, 2 * b + 1)] = Complex64::new(-1.0, 0.0);
        k[(2 * b + 1, 2 * b)] = Complex64::new(1.0, 0.0);
    }
    k
}

fn chirality(p: usize, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        if i != j {
            Complex64::new(0.0, 0.0)
        } else if i < p {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        }
    })
}

/// Reference chirality and real structure for KO-dimension `s` on `ℂⁿ`.
///
/// `Γ = diag(1_p, −1_{n−p})` for even s (identity for odd s) and `K` is built
/// from identity and `[[0, −1], [1, 0]]` blocks:
///
/// | s    | Γ               | K                                  |
/// |------|-----------------|------------------------------------|
/// | 0    | diag(1_p, −1_q) | I                                  |
/// | 1, 7 | I               | I                                  |
/// | 2    | diag(1_m, −1_m) | [[0, −I_m], [I_m, 0]]              |
/// | 3, 5 | I               | ⊕ [[0, −1], [1, 0]]                |
/// | 4    | diag(1_p, −1_q) | symplectic on each eigenspace      |
/// | 6    | diag(1_m, −1_m) | [[0, I_m], [I_m, 0]]               |
///
/// `plus_dim` is `p = dim H₊` and defaults to `n/2`; s = 2 and 6 force `p = n/2`,
/// s = 4 needs `p` and `n − p` even.
pub fn standard_structures(
    s: KoDimension,
    n: usize,
    plus_dim: Option<usize>,
) -> Result<(CMatrix, AntilinearOp)> {
    if n == 0 {
        return Err(infeasible(s, n, "dimension must be positive"));
    }
    let signs = s.signs();
    if signs.eps == -1 && n % 2 == 1 {
        return Err(infeasible(s, n, "J² = −1 needs even n"));
    }
    if !s.is_even() {
        if plus_dim.is_some_and(|p| p != n) {
            return Err(infeasible(s, n, "odd KO-dimension uses Γ = I"));
        }
        let k = if signs.eps == 1 { CMatrix::identity(n, n) } else { symplectic(n) };
        return Ok((CMatrix::identity(n, n), AntilinearOp::new(k)?));
    }
    let p = match plus_dim {
        Some(p) => p,
        None if n.is_multiple_of(2) => n / 2,
        None => return Err(infeasible(s, n, "balanced chirality needs even n (pass dim H₊ explicitly)")),
    };
    if p > n {
        return Err(infeasible(s, n, format!("dim H₊ = {p} exceeds n")));
    }
    let q = n - p;
    let k = match s.value() {
        0 => CMatrix::identity(n, n),
        2 | 6 => {
            if p != q {
                return Err(infeasible(s, n, "J exchanges H₊ and H₋, so dim H₊ = n/2"));
            }
            let sign = if s.value() == 2 { -1.0 } else { 1.0 };
            let mut k = CMatrix::zeros(n, n);
            for i in 0..p {
                k[(i, p + i)] = Complex64::new(sign, 0.0);
                k[(p + i, i)] = Complex64::new(1.0, 0.0);
            }
            k
        }
        4 => {
            if p % 2 == 1 || q % 2 == 1 {
                return Err(infeasible(
                    s,
                    n,
                    format!("J² = −1 on each eigenspace needs dim H₊ and dim H₋ even, got {p} and {q}"),
                ));
            }
            linalg::block_diag(&[&symplectic(p), &symplectic(q)])
        }
        _ => unreachable!("even KO-dimensions are 0, 2, 4, 6"),
    };
    Ok((chirality(p, n), AntilinearOp::new(k)?))
}

/// [`standard_structures`] rotated by a Haar unitary `W`: `Γ ↦ WΓW†`, `K ↦ W K Wᵀ`.
pub fn rotated_structures<R: Rng + ?Sized>(
    s: KoDimension,
    n: usize,
    plus_dim: Option<usize>,
    rng: &mut R,
) -> Result<(CMatrix, AntilinearOp)> {
    let (g, j) = standard_structures(s, n, plus_dim)?;
    let w = linalg::random_unitary(n, rng);
    let g = &w * g * w.adjoint();
    let k = &w * j.k_matrix() * w.transpose();
    Ok((g, AntilinearOp::new(k)?))
}

/// Projects a Hermitian matrix onto the Dirac operators allowed at KO-dimension `s`.
pub fn project_dirac(s: KoDimension, gamma: &CMatrix, j: &AntilinearOp, h: &CMatrix) -> CMatrix {
    let half = Complex64::new(0.5, 0.0);
    let eps_prime = Complex64::new(f64::from(s.signs().eps_prime), 0.0);
    let mut d = (h + j.conjugate_linear(h) * eps_prime) * half;
    if s.is_even() {
        d = (&d - gamma * &d * gamma) * half;
    }
    // exact Hermitian part, removes rounding asymmetry
    (&d + d.adjoint()) * half
}

/// Gaussian Hermitian matrix with entry scale `scale`, projected by [`project_dirac`].
pub fn random_dirac<R: Rng + ?Sized>(
    s: KoDimension,
    gamma: &CMatrix,
    j: &AntilinearOp,
    scale: f64,
    rng: &mut R,
) -> CMatrix {
    let n = gamma.nrows();
    let g = linalg::random_complex_matrix(n, n, rng);
    let h = (&g + g.adjoint()) * Complex64::new(0.5 * scale, 0.0);
    project_dirac(s, gamma, j, &h)
}

/// Random triple with reference structures and a random Dirac operator.
pub fn random_triple<R: Rng + ?Sized>(
    s: KoDimension,
    n: usize,
    plus_dim: Option<usize>,
    scale: f64,
    rng: &mut R,
) -> Result<SpectralTriple> {
    let (g, j) = standard_structures(s, n, plus_dim)?;
    let d = random_dirac(s, &g, &j, scale, rng);
    SpectralTriple::new(s, d, g, j)
}

/// Random triple whose structures are also rotated by a random unitary.
pub fn random_rotated_triple<R: Rng + ?Sized>(
    s: KoDimension,
    n: usize,
    plus_dim: Option<usize>,
    scale: f64,
    rng: &mut R,
) -> Result<SpectralTriple> {
    let (g, j) = rotated_structures(s, n, plus_dim, rng)?;
    let d = random_dirac(s, &g, &j, scale, rng);
    SpectralTriple::new(s, d, g, j)
}

/// The generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub s: KoDimension,
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    /// Majorana mass for doubling runs at s = 4.
    pub mu: Option<Complex64>,
    pub scale: f64,
    pub plus_dim: Option<usize>,
}

impl EnsembleConfig {
    pub fn new(s: KoDimension, n: usize, count: usize, seed: u64) -> Self {
        EnsembleConfig { s, n, count, seed, mu: None, scale: 1.0, plus_dim: None }
    }

    pub fn check(&self) -> Result<()> {
        if self.count == 0 {
            return Err(infeasible(self.s, self.n, "count must be at least 1"));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(infeasible(self.s, self.n, "scale must be positive and finite"));
        }
        if self.mu.is_some() && self.s.value() != 4 {
            return Err(infeasible(self.s, self.n, "μ is only used by the s = 4 doubling"));
        }
        standard_structures(self.s, self.n, self.plus_dim).map(|_| ())
    }
}

/// One sampled Dirac operator. `None` marks a quantity that does not apply to
/// the run (or, with `error` set, could not be computed).
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRecord {
    pub sample: usize,
    pub det_i_d: Option<Complex64>,
    pub real_f: Option<Complex64>,
    pub chiral_fplus: Option<Complex64>,
    pub index: Option<i64>,
    pub min_abs_eig: Option<f64>,
    pub max_abs_eig: Option<f64>,
    pub error: Option<String>,
}

impl EnsembleRecord {
    fn failed(sample: usize, e: Error) -> Self {
        EnsembleRecord {
            sample,
            det_i_d: None,
            real_f: None,
            chiral_fplus: None,
            index: None,
            min_abs_eig: None,
            max_abs_eig: None,
            error: Some(e.to_string()),
        }
    }
}

/// Evaluates every applicable integral for one triple.
pub fn record_for(sample: usize, t: &SpectralTriple, mu: Option<Complex64>) -> EnsembleRecord {
    match evaluate(sample, t, mu) {
        Ok(r) => r,
        Err(e) => EnsembleRecord::failed(sample, e),
    }
}

fn evaluate(sample: usize, t: &SpectralTriple, mu: Option<Complex64>) -> Result<EnsembleRecord> {
    let s = t.s().value();
    let det_i_d = integrals::complex_integral(t).value;
    let real_f = integrals::real_integral(t)?.value;
    let chiral_fplus = match (s, mu) {
        (2, _) => Some(integrals::chiral_integral(t, Subspace::Plus)?.value),
        (4, Some(mu)) => {
            let dt = integrals::double_triple(t, mu)?;
            Some(integrals::doubled_chiral_integral(&dt)?.value)
        }
        _ => None,
    };
    let index = if t.s().is_even() { Some(integrals::index_of(t, KERNEL_TOL)?) } else { None };
    let abs: Vec<f64> = t.spectrum().iter().map(|x| x.abs()).collect();
    Ok(EnsembleRecord {
        sample,
        det_i_d: Some(det_i_d),
        real_f: Some(real_f),
        chiral_fplus,
        index,
        min_abs_eig: abs.iter().copied().reduce(f64::min),
        max_abs_eig: abs.iter().copied().reduce(f64::max),
        error: None,
    })
}

/// Draws `count` Dirac operators for the reference structures and evaluates
/// each. Records come back in sample order; per-sample failures are recorded.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<Vec<EnsembleRecord>> {
    cfg.check()?;
    let (g, j) = standard_structures(cfg.s, cfg.n, cfg.plus_dim)?;
    let records = (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(cfg.seed, i as u64);
            let d = random_dirac(cfg.s, &g, &j, cfg.scale, &mut rng);
            match SpectralTriple::new(cfg.s, d, g.clone(), j.clone()) {
                Ok(t) => record_for(i, &t, cfg.mu),
                Err(e) => EnsembleRecord::failed(i, e),
            }
        })
        .collect();
    Ok(records)
}
