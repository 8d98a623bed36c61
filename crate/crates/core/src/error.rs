use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {what} is {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("KO-dimension must lie in 0..=7, got {0}")]
    InvalidKoDimension(i64),

    #[error("matrix is not skew-symmetric (relative residual {residual:.3e})")]
    NotSkew { residual: f64 },

    #[error("Pfaffian oracle refuses n = {0} (limit 12)")]
    OracleTooLarge(usize),

    #[error("real structure has J² = {found:+}, required {required:+}")]
    WrongEpsilon { required: i8, found: i8 },

    #[error("odd dimension {0} where an even one is required")]
    OddDimension(usize),

    #[error("unsupported KO-dimension s = {s}: {rule}")]
    UnsupportedKo { s: u8, rule: &'static str },

    #[error("infeasible structure for s = {s}, n = {n}: {reason}")]
    Infeasible { s: u8, n: usize, reason: String },

    #[error("Majorana mass μ must be non-zero")]
    ZeroMu,

    #[error("could not complete basis: found {found} of {expected} vectors")]
    BasisIncomplete { found: usize, expected: usize },

    #[error("triple file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
