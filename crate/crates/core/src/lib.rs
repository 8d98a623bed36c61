//! Fermion functional integrals for finite real spectral triples.
//!
//! A finite real spectral triple is stored as a Hermitian Dirac operator `D`,
//! a chirality `Γ` and an antilinear real structure `J`, all acting on `ℂⁿ`.
//! The crate evaluates the complex integral `det(iD)`, the real integral
//! `Pf(iM)` with `M_jk = ⟨J e_j, D e_k⟩`, and the chiral integrals `Pf(iM±)`,
//! each tagged with how much of its value depends on the chosen basis.
//!
//! Module map:
//!
//! * [`triple`]: KO-dimension sign table, [`SpectralTriple`], validation.
//! * [`pfaffian`]: Parlett–Reid Pfaffian plus a cofactor-expansion oracle.
//! * [`bases`]: real, quaternionic and chirality-adapted orthonormal bases.
//! * [`integrals`]: the three integrals and the s=4 → s=2 doubling.
//! * [`ensemble`]: random Dirac operators and batch sampling.
//! * [`io`]: JSON triple files and CSV / JSON-lines ensemble output.

pub mod bases;
pub mod ensemble;
pub mod error;
pub mod integrals;
pub mod io;
pub mod linalg;
pub mod pfaffian;
pub mod triple;

pub use bases::{BasisKind, CanonicalBasis, Subspace};
pub use error::{Error, Result};
pub use integrals::{Ambiguity, DoubledTriple, IntegralResult, RealFormMatrix};
pub use linalg::{CMatrix, CVector};
pub use num_complex::Complex64;
pub use pfaffian::SkewMatrix;
pub use triple::{AntilinearOp, KoDimension, Relation, SignTriple, SpectralTriple, ValidationReport};

/// Structural residual tolerance, relative to the Frobenius norm of the inputs.
pub const TAU_UNIT: f64 = 1e-10;
/// Tolerance for pairing eigenvalues.
pub const TAU_EIG: f64 = 1e-8;
