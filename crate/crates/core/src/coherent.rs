//! Coherent-like superpositions over the positive-energy branch, their Dirac
//! probability profile and centroid.

use serde::{Deserialize, Serialize};

use crate::lattice::ChainParams;
use crate::modes::ModeBasis;
use crate::spectral::ExactSpectrum;
use crate::{CMatrix, CVector, Error, Result, C64};

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentSpec {
    pub alpha: C64,
    /// Highest mode index kept; `None` selects the default.
    pub cutoff: Option<usize>,
    pub tail_tolerance: f64,
}

impl CoherentSpec {
    pub fn new(alpha: C64) -> Self {
        CoherentSpec {
            alpha,
            cutoff: None,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
        }
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Self {
        Self::new(C64::from_polar(magnitude, phase))
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    pub fn with_tail_tolerance(mut self, tol: f64) -> Self {
        self.tail_tolerance = tol;
        self
    }

    /// Same spec with `α -> α e^{-iθ}`.
    pub fn rotated(&self, theta: f64) -> Self {
        CoherentSpec {
            alpha: self.alpha * C64::from_polar(1.0, -theta),
            ..*self
        }
    }

    /// `min(N-1, ⌈|α|² + 8|α| + 10⌉)`.
    pub fn default_cutoff(&self, n_modes: usize) -> usize {
        let a = self.alpha.norm();
        let want = (a * a + 8.0 * a + 10.0).ceil() as usize;
        want.min(n_modes.saturating_sub(1))
    }

    /// Cutoff to use for `n_modes` available modes, checked against the
    /// Poisson tail.
    pub fn resolve_cutoff(&self, n_modes: usize) -> Result<usize> {
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return Err(Error::domain("coherent amplitude must be finite"));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(Error::domain("tail tolerance must be positive"));
        }
        if n_modes == 0 {
            return Err(Error::domain("no modes available"));
        }
        let cutoff = self.cutoff.unwrap_or_else(|| self.default_cutoff(n_modes));
        if cutoff >= n_modes {
            return Err(Error::domain(format!(
                "cutoff {cutoff} exceeds the {} available modes (max {})",
                n_modes,
                n_modes - 1
            )));
        }
        let a = self.alpha.norm();
        let tail = poisson_tail(a, cutoff);
        if tail > self.tail_tolerance {
            return Err(Error::Truncation {
                cutoff,
                tail,
                tolerance: self.tail_tolerance,
                suggested: minimal_cutoff(a, self.tail_tolerance),
            });
        }
        Ok(cutoff)
    }
}

fn ln_poisson(mag: f64, n: usize, ln_fact: f64) -> f64 {
    if mag == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mag * mag + 2.0 * n as f64 * mag.ln() - ln_fact
}

/// `e^{-|α|²}|α|^{2n}/n!` for `n = 0..=cutoff`.
pub fn poisson_weights(mag: f64, cutoff: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut ln_fact = 0.0;
    for n in 0..=cutoff {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        out.push(ln_poisson(mag, n, ln_fact).exp());
    }
    out
}

/// `Σ_{n > cutoff}` of the Poisson weights, summed directly.
pub fn poisson_tail(mag: f64, cutoff: usize) -> f64 {
    if mag == 0.0 {
        return 0.0;
    }
    let mut ln_fact: f64 = (1..=cutoff + 1).map(|i| (i as f64).ln()).sum();
    let mut tail = 0.0;
    let mut n = cutoff + 1;
    loop {
        let term = ln_poisson(mag, n, ln_fact).exp();
        tail += term;
        let past_peak = (n as f64) > mag * mag;
        if past_peak && (term <= tail * 1e-17 || term == 0.0) {
            break;
        }
        n += 1;
        ln_fact += (n as f64).ln();
    }
    tail
}

/// Smallest cutoff whose Poisson tail is at most `tol`.
pub fn minimal_cutoff(mag: f64, tol: f64) -> usize {
    let mut n = 0;
    while poisson_tail(mag, n) > tol {
        n += 1;
    }
    n
}

/// `e^{-|α|²/2} αⁿ/√(n!)` for `n = 0..=cutoff`, computed in log space.
pub fn expansion_coefficients(spec: &CoherentSpec, n_modes: usize) -> Result<Vec<C64>> {
    let cutoff = spec.resolve_cutoff(n_modes)?;
    let mag = spec.alpha.norm();
    let arg = spec.alpha.arg();
    let mut ln_fact = 0.0;
    let mut out = Vec::with_capacity(cutoff + 1);
    for n in 0..=cutoff {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let m = (0.5 * ln_poisson(mag, n, ln_fact)).exp();
        out.push(C64::from_polar(m, n as f64 * arg));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchSource {
    Analytic,
    Exact,
}

/// Dirac-orthonormal positive-energy single-particle states `|ψ_n⟩`, one row
/// per mode, ordered by energy.
#[derive(Debug, Clone)]
pub struct PositiveBranch {
    pub params: ChainParams,
    pub rows: CMatrix,
    pub energies: Vec<f64>,
    pub source: BranchSource,
}

impl PositiveBranch {
    pub fn analytic(basis: &ModeBasis) -> Self {
        PositiveBranch {
            params: basis.params,
            rows: basis.psi_plus.clone(),
            energies: basis.eps.iter().map(|e| e.re).collect(),
            source: BranchSource::Analytic,
        }
    }

    /// Positive-energy right eigenvectors of the exact Hamiltonian, normalized
    /// and phase-aligned so that each has a real positive Dirac overlap with
    /// the matching analytic row.
    pub fn exact(basis: &ModeBasis, spectrum: &ExactSpectrum) -> Result<Self> {
        let n = basis.n_modes();
        if spectrum.dim() != 2 * n {
            return Err(Error::domain("spectrum and mode basis sizes differ"));
        }
        let mut idx: Vec<usize> = (0..spectrum.values.len())
            .filter(|&i| spectrum.values[i].re > 0.0)
            .collect();
        if idx.len() != n {
            return Err(Error::domain(format!(
                "expected {n} positive levels, found {}",
                idx.len()
            )));
        }
        idx.sort_by(|&a, &b| spectrum.values[a].re.total_cmp(&spectrum.values[b].re));
        let mut rows = CMatrix::zeros(n, 2 * n);
        let mut energies = Vec::with_capacity(n);
        for (r, &i) in idx.iter().enumerate() {
            let v = spectrum.right.column(i);
            let reference = basis.psi_plus.row(r);
            let ov: C64 = reference
                .iter()
                .zip(v.iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            let phase = if ov.norm() > 0.0 {
                ov.conj() / ov.norm()
            } else {
                C64::new(1.0, 0.0)
            };
            let scale = phase / v.norm();
            for l in 0..2 * n {
                rows[(r, l)] = v[l] * scale;
            }
            energies.push(spectrum.values[i].re);
        }
        Ok(PositiveBranch {
            params: basis.params,
            rows,
            energies,
            source: BranchSource::Exact,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.rows.nrows()
    }

    /// Dirac projections `⟨ψ_n|v⟩` for every mode.
    pub fn project(&self, v: &CVector) -> Vec<C64> {
        (0..self.n_modes())
            .map(|n| self.rows.row(n).iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub params: ChainParams,
    pub alpha: Option<C64>,
    pub cutoff: Option<usize>,
    pub branch: Option<BranchSource>,
    pub time: f64,
    pub method: String,
}

#[derive(Debug, Clone)]
pub struct StateVector {
    pub amplitudes: CVector,
    pub dirac_norm: f64,
    pub provenance: Provenance,
}

impl StateVector {
    pub fn new(amplitudes: CVector, provenance: Provenance) -> Self {
        let dirac_norm = amplitudes.norm();
        StateVector {
            amplitudes,
            dirac_norm,
            provenance,
        }
    }

    /// Flat-site basis vector `e_l` (1-based `l`).
    pub fn site(params: &ChainParams, l: usize) -> Result<Self> {
        let dim = params.dim();
        if l == 0 || l > dim {
            return Err(Error::domain(format!("site {l} outside 1..={dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[l - 1] = C64::new(1.0, 0.0);
        Ok(StateVector::new(
            v,
            Provenance {
                params: *params,
                alpha: None,
                cutoff: None,
                branch: None,
                time: 0.0,
                method: "site".into(),
            },
        ))
    }
}

/// `e^{-|α|²/2} Σ_{n ≤ n_max} αⁿ/√(n!) |ψ_n⟩`.
pub fn coherent_state(spec: &CoherentSpec, branch: &PositiveBranch) -> Result<StateVector> {
    let coeffs = expansion_coefficients(spec, branch.n_modes())?;
    let dim = branch.rows.ncols();
    let mut amp = CVector::zeros(dim);
    for (n, c) in coeffs.iter().enumerate() {
        for l in 0..dim {
            amp[l] += c * branch.rows[(n, l)];
        }
    }
    Ok(StateVector::new(
        amp,
        Provenance {
            params: branch.params,
            alpha: Some(spec.alpha),
            cutoff: Some(coeffs.len() - 1),
            branch: Some(branch.source),
            time: 0.0,
            method: "coherent".into(),
        },
    ))
}

/// `⟨n̂⟩` with `n̂|ψ_n⟩ = n|ψ_n⟩`, evaluated from the Dirac projections of the
/// built state onto the branch.
pub fn mean_occupation(spec: &CoherentSpec, branch: &PositiveBranch) -> Result<f64> {
    let state = coherent_state(spec, branch)?;
    let p = branch.project(&state.amplitudes);
    Ok(p.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum())
}

/// `P_D(l) = |⟨l|ψ⟩|²` for `l = 1..=2N`.
pub fn dirac_profile(state: &StateVector) -> Vec<f64> {
    state.amplitudes.iter().map(|z| z.norm_sqr()).collect()
}

fn moments(state: &StateVector) -> Result<(f64, f64)> {
    let p = dirac_profile(state);
    let total: f64 = p.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::domain("centroid of a zero-norm or non-finite state"));
    }
    let mean = p.iter().enumerate().map(|(i, w)| (i + 1) as f64 * w).sum::<f64>() / total;
    let var = p
        .iter()
        .enumerate()
        .map(|(i, w)| ((i + 1) as f64 - mean).powi(2) * w)
        .sum::<f64>()
        / total;
    Ok((mean, var))
}

/// `r_c = Σ l P_D(l) / Σ P_D(l)` in the flat index `1..=2N`.
pub fn center_of_mass(state: &StateVector) -> Result<f64> {
    Ok(moments(state)?.0)
}

/// Standard deviation of the normalized Dirac profile.
pub fn profile_spread(state: &StateVector) -> Result<f64> {
    Ok(moments(state)?.1.sqrt())
}

/// `r_c(|α|, arg α)` over a grid; rows follow `magnitudes`.
pub fn com_phase_map(
    magnitudes: &[f64],
    phases: &[f64],
    branch: &PositiveBranch,
) -> Result<Vec<Vec<f64>>> {
    magnitudes
        .iter()
        .map(|&m| com_phase_row(m, phases, branch))
        .collect()
}

pub fn com_phase_row(magnitude: f64, phases: &[f64], branch: &PositiveBranch) -> Result<Vec<f64>> {
    if !magnitude.is_finite() || magnitude < 0.0 {
        return Err(Error::domain(format!("|α| must be finite and non-negative, got {magnitude}")));
    }
    phases
        .iter()
        .map(|&p| {
            if !p.is_finite() {
                return Err(Error::domain("phase grid must be finite"));
            }
            center_of_mass(&coherent_state(&CoherentSpec::from_polar(magnitude, p), branch)?)
        })
        .collect()
}

/// Half peak-to-peak of each row of a phase map.
pub fn phase_map_amplitudes(map: &[Vec<f64>]) -> Vec<f64> {
    map.iter()
        .map(|row| {
            let hi = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = row.iter().cloned().fold(f64::INFINITY, f64::min);
            0.5 * (hi - lo)
        })
        .collect()
}
