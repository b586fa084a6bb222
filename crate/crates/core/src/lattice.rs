//! Position-basis Hamiltonian of the dimerized chain with alternating
//! imaginary potentials, and matrix forms of its discrete symmetries.
//!
//! With `t1 = (1+δ)J`, `t2 = (1-δ)J` and `g = γJ` the matrix in the flat
//! basis `(A1, B1, A2, B2, ..., AN, BN)` is
//!
//! ```text
//!  [ ig   t1                        ]
//!  [ t1  -ig   t2                   ]
//!  [      t2   ig   t1              ]
//!  [           t1  -ig   ...        ]
//! ```
//!
//! Parity maps `(j, A) <-> (N+1-j, B)`, which in the flat index is the
//! reversal `l <-> 2N+1-l`. Time reversal is entrywise conjugation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{CMatrix, CVector, Error, Result, C64};

/// Absolute tolerance on `|γ - 2δ|` for treating parameters as sitting at the
/// exceptional point.
pub const EP_TOLERANCE: f64 = 1e-12;

/// Physical parameters of a chain with `n_cells` unit cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n_cells: usize,
    pub delta: f64,
    pub gamma: f64,
    pub energy_scale: f64,
}

impl ChainParams {
    pub fn new(n_cells: usize, delta: f64, gamma: f64) -> Result<Self> {
        Self::with_scale(n_cells, delta, gamma, 1.0)
    }

    pub fn with_scale(n_cells: usize, delta: f64, gamma: f64, energy_scale: f64) -> Result<Self> {
        let p = ChainParams {
            n_cells,
            delta,
            gamma,
            energy_scale,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 2 {
            return Err(Error::domain(format!(
                "n_cells must be >= 2, got {}",
                self.n_cells
            )));
        }
        if !self.delta.is_finite() || self.delta.abs() >= 1.0 {
            return Err(Error::domain(format!(
                "delta must satisfy |delta| < 1, got {}",
                self.delta
            )));
        }
        if !self.gamma.is_finite() || self.gamma < 0.0 {
            return Err(Error::domain(format!(
                "gamma must be finite and >= 0, got {}",
                self.gamma
            )));
        }
        if !self.energy_scale.is_finite() || self.energy_scale <= 0.0 {
            return Err(Error::domain(format!(
                "energy_scale must be finite and > 0, got {}",
                self.energy_scale
            )));
        }
        Ok(())
    }

    /// Hilbert-space dimension `2N`.
    pub fn dim(&self) -> usize {
        2 * self.n_cells
    }

    /// Intra-cell hopping `(1+δ)J`.
    pub fn intra_hopping(&self) -> f64 {
        (1.0 + self.delta) * self.energy_scale
    }

    /// Inter-cell hopping `(1-δ)J`.
    pub fn inter_hopping(&self) -> f64 {
        (1.0 - self.delta) * self.energy_scale
    }

    /// The closed-form results of the strong-dimerization analysis are only
    /// claimed for `0 < δ < 1`.
    pub fn in_analytic_regime(&self) -> bool {
        self.delta > 0.0 && self.delta < 1.0
    }

    /// `γ = 2δ` to within [`EP_TOLERANCE`].
    pub fn at_exceptional_point(&self) -> bool {
        (self.gamma - 2.0 * self.delta).abs() <= EP_TOLERANCE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

/// A lattice site, addressed both by `(cell, sublattice)` and by the 1-based
/// flat index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SiteIndex {
    cell: usize,
    sublattice: Sublattice,
}

impl SiteIndex {
    pub fn new(cell: usize, sublattice: Sublattice, n_cells: usize) -> Result<Self> {
        if cell == 0 || cell > n_cells {
            return Err(Error::domain(format!(
                "cell {cell} outside [1, {n_cells}]"
            )));
        }
        Ok(SiteIndex { cell, sublattice })
    }

    pub fn from_flat(flat: usize, n_cells: usize) -> Result<Self> {
        if flat == 0 || flat > 2 * n_cells {
            return Err(Error::domain(format!(
                "flat index {flat} outside [1, {}]",
                2 * n_cells
            )));
        }
        let sublattice = if flat % 2 == 1 {
            Sublattice::A
        } else {
            Sublattice::B
        };
        Ok(SiteIndex {
            cell: flat.div_ceil(2),
            sublattice,
        })
    }

    pub fn cell(&self) -> usize {
        self.cell
    }

    pub fn sublattice(&self) -> Sublattice {
        self.sublattice
    }

    /// 1-based flat index.
    pub fn flat(&self) -> usize {
        match self.sublattice {
            Sublattice::A => 2 * self.cell - 1,
            Sublattice::B => 2 * self.cell,
        }
    }

    /// 0-based storage offset.
    pub fn offset(&self) -> usize {
        self.flat() - 1
    }
}

/// Dense `2N x 2N` Hamiltonian together with the parameters it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    matrix: CMatrix,
    params: ChainParams,
}

impl HamiltonianMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Extract the three bands. Fails if any entry outside the tridiagonal
    /// band is nonzero.
    pub fn tridiagonal(&self) -> Result<Tridiagonal> {
        Tridiagonal::from_dense(&self.matrix)
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }
}

/// Tridiagonal view of a matrix, used for O(n) matrix-vector products.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<C64>,
    /// `lower[i] = M[i+1, i]`
    pub lower: Vec<C64>,
    /// `upper[i] = M[i, i+1]`
    pub upper: Vec<C64>,
}

impl Tridiagonal {
    pub fn from_dense(m: &CMatrix) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::domain("tridiagonal extraction needs a square matrix"));
        }
        if bandwidth(m) > 1 {
            return Err(Error::domain(format!(
                "matrix has bandwidth {} (> 1)",
                bandwidth(m)
            )));
        }
        Ok(Tridiagonal {
            diag: (0..n).map(|i| m[(i, i)]).collect(),
            lower: (0..n.saturating_sub(1)).map(|i| m[(i + 1, i)]).collect(),
            upper: (0..n.saturating_sub(1)).map(|i| m[(i, i + 1)]).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `out = M x`
    pub fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        let n = self.diag.len();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(out.len(), n);
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * x[i + 1];
            }
            out[i] = acc;
        }
    }
}

/// Largest `|i - j|` over nonzero entries.
pub fn bandwidth(m: &CMatrix) -> usize {
    let mut bw = 0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] != C64::new(0.0, 0.0) {
                bw = bw.max(i.abs_diff(j));
            }
        }
    }
    bw
}

pub fn build_hamiltonian(params: &ChainParams) -> Result<HamiltonianMatrix> {
    params.validate()?;
    let n = params.n_cells;
    let dim = params.dim();
    let t1 = C64::new(params.intra_hopping(), 0.0);
    let t2 = C64::new(params.inter_hopping(), 0.0);
    let gain = C64::new(0.0, params.gamma * params.energy_scale);

    let mut m = CMatrix::zeros(dim, dim);
    for j in 0..n {
        let a = 2 * j;
        let b = 2 * j + 1;
        m[(a, a)] = gain;
        m[(b, b)] = -gain;
        m[(a, b)] = t1;
        m[(b, a)] = t1;
        if j + 1 < n {
            m[(b, a + 2)] = t2;
            m[(a + 2, b)] = t2;
        }
    }
    Ok(HamiltonianMatrix {
        matrix: m,
        params: *params,
    })
}

/// Permutation matrix of the parity operation on `n_cells` cells.
pub fn parity_matrix(n_cells: usize) -> Result<CMatrix> {
    if n_cells == 0 {
        return Err(Error::domain("parity needs at least one cell"));
    }
    let dim = 2 * n_cells;
    let one = C64::new(1.0, 0.0);
    Ok(DMatrix::from_fn(dim, dim, |i, j| {
        if i + j == dim - 1 {
            one
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_even_square(h: &CMatrix) -> Result<usize> {
    let dim = h.nrows();
    if h.ncols() != dim || dim == 0 || dim % 2 != 0 {
        return Err(Error::domain(format!(
            "parity is defined on 2N x 2N matrices, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    Ok(dim / 2)
}

/// Max-entry norm of `P conj(H) P - H`; zero iff `[PT, H] = 0`.
pub fn pt_defect(h: &CMatrix) -> Result<f64> {
    let n = check_even_square(h)?;
    let p = parity_matrix(n)?;
    let transformed = &p * h.map(|z| z.conj()) * &p;
    Ok(max_entry(&(transformed - h)))
}

/// Max-entry norm of `P H P - H`.
pub fn parity_defect(h: &CMatrix) -> Result<f64> {
    let n = check_even_square(h)?;
    let p = parity_matrix(n)?;
    Ok(max_entry(&(&p * h * &p - h)))
}

/// Max-entry norm of `conj(H) - H`.
pub fn time_reversal_defect(h: &CMatrix) -> f64 {
    max_entry(&(h.map(|z| z.conj()) - h))
}

/// Max-entry norm of `H - H†`.
pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    max_entry(&(h - h.adjoint()))
}
