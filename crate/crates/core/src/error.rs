use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument or parameter lies outside the domain of the operation.
    #[error("{0}")]
    Domain(String),

    #[error("eigensolver failed to converge after {iterations} QR iterations ({unconverged} eigenvalues left in the active block of a {dim}x{dim} matrix)")]
    NoConvergence {
        iterations: usize,
        unconverged: usize,
        dim: usize,
    },

    /// Complex eigenvalue without a conjugate partner; the spectrum of a
    /// PT-symmetric matrix is closed under conjugation, so this points at a
    /// solver failure.
    #[error("eigenvalue {re:e}{im:+e}i has no complex-conjugate partner within {tolerance:e}")]
    UnpairedEigenvalue { re: f64, im: f64, tolerance: f64 },

    #[error("Poisson tail {tail:e} beyond cutoff {cutoff} exceeds tolerance {tolerance:e}; need cutoff >= {suggested}")]
    Truncation {
        cutoff: usize,
        tail: f64,
        tolerance: f64,
        suggested: usize,
    },

    #[error("time evolution diverged at t = {time}: largest |Im E| = {max_imag:e}")]
    Divergence { time: f64, max_imag: f64 },

    #[error("{0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of a numerical algorithm (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::Domain(_) | Error::Truncation { .. })
    }
}
