use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("series needs more than {cap} terms (tail {tail:.3e} against tolerance {tol:.3e})")]
    CapExceeded { cap: usize, tail: f64, tol: f64 },

    #[error("truncation at N = {trunc} leaves {tail:.3e} of the norm (tolerance {tol:.3e})")]
    TruncationInsufficient { trunc: usize, tail: f64, tol: f64 },

    #[error("quadrature rule does not match the sampled grid: {0}")]
    GridMismatch(String),

    #[error("grid misses {lost:.3e} of the state norm")]
    GridSupport { lost: f64 },

    #[error("closed-form series disagrees with direct evaluation in `{term}`: deviation {deviation:.3e} > {tolerance:.3e}")]
    SeriesMismatch {
        term: String,
        deviation: f64,
        tolerance: f64,
    },

    #[error("negative variance {value:.3e} for quadrature q = {q}")]
    NegativeVariance { q: u8, value: f64 },

    #[error("commutator on level {n} is not a multiple of the input state")]
    NonScalarCommutator { n: usize },

    #[error("state is not a combination of the auxiliary eigenspinors: {0}")]
    NotInBasis(String),
}
