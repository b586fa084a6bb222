//! Simulation toolkit for the PT-symmetric non-Hermitian SSH chain with
//! staggered gain and loss.
//!
//! The crate is organized bottom-up:
//!
//! - [`lattice`]: position-basis Hamiltonian and its PT symmetry.
//! - [`eigen`]: dense complex Schur decomposition with left and right
//!   eigenvectors (H is non-normal, so symmetric solvers do not apply).
//! - [`spectral`]: exact spectra, PT-phase classification and the closed-form
//!   dispersion of the strongly dimerized chain.
//! - [`modes`]: the analytic biorthogonal mode basis and its commutator Grams.
//! - [`coherent`]: coherent-like states in the positive-energy branch.
//! - [`dynamics`]: analytic and exact time evolution, centroid trajectories
//!   and their Fourier shape analysis.
//!
//! All physics uses the flat site index `l = 1..=2N` with `A_j -> 2j-1` and
//! `B_j -> 2j` (0-based `2j-2` / `2j-1` in storage).

pub mod coherent;
pub mod dynamics;
pub mod eigen;
mod error;
pub mod export;
pub mod lattice;
pub mod modes;
pub mod spectral;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix (column-major).
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<C64>;
