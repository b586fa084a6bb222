//! Exact spectra, PT-phase classification, and the closed-form dispersion of
//! the strongly dimerized chain.
//!
//! In the strong-dimerization limit the chain splits into bonding and
//! antibonding sub-chains with `ε⁰_k = (1+δ) - (1-δ) cos k`, and the gain/loss
//! term mixes them into `ε_k = sqrt((ε⁰_k)² - γ²)` with mixing angle
//! `tan φ_k = γ / ε_k`, for `k = (n+1)π/(N+1)`, `n = 0..N-1`.

use serde::{Deserialize, Serialize};

use crate::eigen;
use crate::lattice::{ChainParams, HamiltonianMatrix};
use crate::{CMatrix, Error, Result, C64};

/// Exact eigendecomposition of a Hamiltonian with diagnostics.
#[derive(Debug, Clone)]
pub struct ExactSpectrum {
    /// Sorted by `(Re, Im)`.
    pub values: Vec<C64>,
    /// Unit-norm right eigenvectors (columns).
    pub right: CMatrix,
    /// Unit-norm left eigenvectors (columns), `w† H = E w†`.
    pub left: CMatrix,
    /// `max_n ‖H v_n - E_n v_n‖ / ‖H‖₂`.
    pub max_residual: f64,
    /// `|w_n† v_n|` for unit vectors; small values flag near-coalescence.
    pub pairing_overlaps: Vec<f64>,
    /// Frobenius condition number of the right-eigenvector matrix.
    pub condition: f64,
    pub iterations: usize,
}

/// Pairing overlap below which biorthogonal normalization is skipped.
pub const COALESCENCE_OVERLAP: f64 = 1e-6;

impl ExactSpectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Left vectors rescaled so that `w_n† v_n = 1`. Pairs whose overlap is
    /// below [`COALESCENCE_OVERLAP`] are left unit-normalized and reported in
    /// the returned index list.
    pub fn biorthonormal_left(&self) -> (CMatrix, Vec<usize>) {
        let mut left = self.left.clone();
        let mut skipped = Vec::new();
        for n in 0..self.dim() {
            let s = self.left.column(n).dotc(&self.right.column(n));
            if s.norm() < COALESCENCE_OVERLAP {
                skipped.push(n);
                continue;
            }
            let scale = C64::new(1.0, 0.0) / s.conj();
            for i in 0..self.dim() {
                left[(i, n)] *= scale;
            }
        }
        (left, skipped)
    }
}

pub fn exact_eigen(h: &HamiltonianMatrix) -> Result<ExactSpectrum> {
    let m = h.matrix();
    let e = eigen::eigen(m)?;
    let hnorm = eigen::spectral_norm_estimate(m).max(f64::MIN_POSITIVE);
    let n = e.values.len();
    let mut max_residual: f64 = 0.0;
    let mut overlaps = Vec::with_capacity(n);
    for k in 0..n {
        let v = e.right.column(k);
        let r = m * v - v * e.values[k];
        max_residual = max_residual.max(r.norm() / hnorm);
        overlaps.push(e.left.column(k).dotc(&v).norm());
    }
    let inv_sq: f64 = overlaps.iter().map(|s| 1.0 / (s * s)).sum();
    let condition = ((n as f64) * inv_sq).sqrt();
    Ok(ExactSpectrum {
        values: e.values,
        right: e.right,
        left: e.left,
        max_residual,
        pairing_overlaps: overlaps,
        condition,
        iterations: e.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    /// Fully real spectrum with a finite gap around zero.
    UnbrokenGapped,
    /// Fully real spectrum with a coalescing pair at zero energy.
    ExceptionalGapless,
    /// Complex-conjugate eigenvalue pairs present.
    Broken,
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::UnbrokenGapped => "UnbrokenGapped",
            Phase::ExceptionalGapless => "ExceptionalGapless",
            Phase::Broken => "Broken",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTolerances {
    /// `|Im E| <= realness * max(J, |Re E|)` counts as real.
    pub realness: f64,
    /// Maximum distance on `(Re, |Im|)` between conjugate partners, relative
    /// to `max(J, |E|)`.
    pub pairing: f64,
    /// Gap tolerance; `None` means `3 * (spectral width) / 2N`.
    pub gap: Option<f64>,
}

impl Default for SpectrumTolerances {
    fn default() -> Self {
        SpectrumTolerances {
            realness: 1e-8,
            pairing: 1e-6,
            gap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<C64>,
    pub realness_tolerance: f64,
    pub n_real: usize,
    pub n_complex_pairs: usize,
    /// `min |Re E|`: the distance of the nearest level from zero, i.e. half the
    /// separation of the two branches.
    pub gap_estimate: f64,
    pub gap_tolerance: f64,
    /// Number of real levels with `|E| <= gap_tolerance`.
    pub near_zero_levels: usize,
    pub phase: Phase,
}

impl SpectrumResult {
    /// Real eigenvalues with positive real part, ascending.
    pub fn positive_real_levels(&self) -> Vec<f64> {
        let mut pos: Vec<f64> = self
            .eigenvalues
            .iter()
            .filter(|e| is_real(**e, self.realness_tolerance, 1.0) && e.re > 0.0)
            .map(|e| e.re)
            .collect();
        pos.sort_by(f64::total_cmp);
        pos
    }

    pub fn max_imag(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.im.abs()).fold(0.0, f64::max)
    }
}

fn is_real(e: C64, tol: f64, scale: f64) -> bool {
    e.im.abs() <= tol * scale.max(e.re.abs())
}

pub fn classify_spectrum(
    eigs: &[C64],
    params: &ChainParams,
    tol: &SpectrumTolerances,
) -> Result<SpectrumResult> {
    if eigs.is_empty() {
        return Err(Error::domain("empty spectrum"));
    }
    let scale = params.energy_scale;
    let (real, complex): (Vec<C64>, Vec<C64>) =
        eigs.iter().partition(|e| is_real(**e, tol.realness, scale));

    // Greedy conjugate matching: upper half-plane against lower half-plane.
    let (upper, lower): (Vec<C64>, Vec<C64>) = complex.iter().partition(|e| e.im > 0.0);
    let mut used = vec![false; lower.len()];
    for u in &upper {
        let mut best: Option<(usize, f64)> = None;
        for (j, l) in lower.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (u.re - l.re).abs() + (u.im.abs() - l.im.abs()).abs();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let limit = tol.pairing * scale.max(u.norm());
        match best {
            Some((j, d)) if d <= limit => used[j] = true,
            _ => {
                return Err(Error::UnpairedEigenvalue {
                    re: u.re,
                    im: u.im,
                    tolerance: limit,
                })
            }
        }
    }
    if let Some((j, _)) = used.iter().enumerate().find(|(_, u)| !**u) {
        let l = lower[j];
        return Err(Error::UnpairedEigenvalue {
            re: l.re,
            im: l.im,
            tolerance: tol.pairing * scale.max(l.norm()),
        });
    }
    let n_complex_pairs = upper.len();

    let re_min = eigs.iter().map(|e| e.re).fold(f64::INFINITY, f64::min);
    let re_max = eigs.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    let gap_tolerance = tol
        .gap
        .unwrap_or(3.0 * (re_max - re_min) / eigs.len() as f64);
    let gap_estimate = eigs.iter().map(|e| e.re.abs()).fold(f64::INFINITY, f64::min);
    let near_zero_levels = real.iter().filter(|e| e.re.abs() <= gap_tolerance).count();

    let phase = if n_complex_pairs > 0 {
        Phase::Broken
    } else if params.gamma > 0.0 && gap_estimate <= gap_tolerance && near_zero_levels >= 2 {
        Phase::ExceptionalGapless
    } else {
        Phase::UnbrokenGapped
    };

    Ok(SpectrumResult {
        eigenvalues: eigs.to_vec(),
        realness_tolerance: tol.realness,
        n_real: real.len(),
        n_complex_pairs,
        gap_estimate,
        gap_tolerance,
        near_zero_levels,
        phase,
    })
}

/// Result of the closed-form gap `Δ = sqrt(4δ² - γ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BandGap {
    Real(f64),
    /// `γ > 2δ`: the formula has no real value (broken region).
    NotReal,
}

impl BandGap {
    pub fn value(&self) -> Option<f64> {
        match self {
            BandGap::Real(v) => Some(*v),
            BandGap::NotReal => None,
        }
    }
}

pub fn band_gap(params: &ChainParams) -> BandGap {
    let arg = 4.0 * params.delta * params.delta - params.gamma * params.gamma;
    if arg >= 0.0 {
        BandGap::Real(params.energy_scale * arg.sqrt())
    } else {
        BandGap::NotReal
    }
}

/// `γ_c = 2δ`.
pub fn critical_gamma(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!(
            "critical gamma needs 0 < delta < 1, got {delta}"
        )));
    }
    Ok(2.0 * delta)
}

/// Standing-wave momentum `k = (n+1)π/(N+1)`.
pub fn momentum(n_cells: usize, n: usize) -> f64 {
    (n + 1) as f64 * std::f64::consts::PI / (n_cells + 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    pub n: usize,
    pub k: f64,
    pub eps_k: C64,
    pub phi_k: C64,
    pub eps0_k: f64,
}

fn check_mode(params: &ChainParams, n: usize) -> Result<()> {
    if n >= params.n_cells {
        return Err(Error::domain(format!(
            "mode index {n} outside [0, {}]",
            params.n_cells - 1
        )));
    }
    Ok(())
}

/// `ε⁰_k = (1+δ) - (1-δ) cos k` in units of J.
pub fn hermitian_dispersion(params: &ChainParams, n: usize) -> Result<f64> {
    check_mode(params, n)?;
    let k = momentum(params.n_cells, n);
    Ok(params.energy_scale * ((1.0 + params.delta) - (1.0 - params.delta) * k.cos()))
}

/// Mixing angle from `tan φ = γ/ε`, with `φ = π/2` at `ε = 0`.
pub(crate) fn mixing_angle(gamma: f64, eps: C64) -> C64 {
    if eps.norm() == 0.0 {
        C64::new(std::f64::consts::FRAC_PI_2, 0.0)
    } else if eps.im == 0.0 {
        C64::new(gamma.atan2(eps.re), 0.0)
    } else {
        (C64::new(gamma, 0.0) / eps).atan()
    }
}

pub fn analytic_dispersion(params: &ChainParams, n: usize) -> Result<DispersionPoint> {
    let eps0 = hermitian_dispersion(params, n)?;
    let g = params.gamma * params.energy_scale;
    let eps = C64::new(eps0 * eps0 - g * g, 0.0).sqrt();
    let eps = if eps.im == 0.0 { C64::new(eps.re, 0.0) } else { eps };
    Ok(DispersionPoint {
        n,
        k: momentum(params.n_cells, n),
        eps_k: eps,
        phi_k: mixing_angle(g, eps),
        eps0_k: eps0,
    })
}

/// Level spacing `ω = J sqrt(2δ(1-δ)) π/(N+1)` of the linear region at the EP.
///
/// Only meaningful for `0 < δ < 1` at `γ = 2δ`; callers that want to warn
/// should check [`ChainParams::at_exceptional_point`].
pub fn linearized_frequency(params: &ChainParams) -> f64 {
    params.energy_scale
        * (2.0 * params.delta * (1.0 - params.delta)).abs().sqrt()
        * std::f64::consts::PI
        / (params.n_cells + 1) as f64
}

/// Successive spacings of the lowest `count` positive real levels
/// (`count - 1` values).
pub fn level_spacing_profile(spectrum: &SpectrumResult, count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::domain("need at least two levels for a spacing"));
    }
    let pos = spectrum.positive_real_levels();
    if pos.len() < count {
        return Err(Error::domain(format!(
            "only {} positive real levels, {count} requested",
            pos.len()
        )));
    }
    Ok(pos[..count].windows(2).map(|w| w[1] - w[0]).collect())
}

/// Bisection for the smallest γ at which complex pairs appear, bracketed by
/// `[lo, hi]` (unbroken at `lo`, broken at `hi`).
pub fn pt_transition_gamma(
    n_cells: usize,
    delta: f64,
    lo: f64,
    hi: f64,
    resolution: f64,
) -> Result<f64> {
    let broken = |gamma: f64| -> Result<bool> {
        let p = ChainParams::new(n_cells, delta, gamma)?;
        let h = crate::lattice::build_hamiltonian(&p)?;
        let eigs = eigen::eigenvalues(h.matrix())?;
        let tol = SpectrumTolerances::default();
        Ok(classify_spectrum(&eigs, &p, &tol)?.phase == Phase::Broken)
    };
    if broken(lo)? || !broken(hi)? {
        return Err(Error::domain(format!(
            "[{lo}, {hi}] does not bracket the PT transition"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > resolution {
        let mid = 0.5 * (a + b);
        if broken(mid)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_hamiltonian;
    use std::f64::consts::PI;

    #[test]
    fn weak_gain_loss_spectrum_is_real_and_gapped() {
        let p = ChainParams::new(20, 0.5, 0.3).unwrap();
        let spec = exact_eigen(&build_hamiltonian(&p).unwrap()).unwrap();
        assert!(spec.max_residual < 1e-12);
        let res = classify_spectrum(&spec.values, &p, &SpectrumTolerances::default()).unwrap();
        assert_eq!(res.n_real, 40);
        assert_eq!(res.near_zero_levels, 0);
        assert_eq!(res.phase, Phase::UnbrokenGapped);
    }

    #[test]
    fn gap_formula() {
        let p = |d, g| ChainParams::new(10, d, g).unwrap();
        assert!((band_gap(&p(0.5, 0.0)).value().unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(band_gap(&p(0.5, 1.0)).value(), Some(0.0));
        assert_eq!(band_gap(&p(0.9, 1.8)).value(), Some(0.0));
        assert_eq!(band_gap(&p(0.5, 1.2)), BandGap::NotReal);
    }

    #[test]
    fn critical_gamma_values() {
        assert_eq!(critical_gamma(0.5).unwrap(), 1.0);
        assert_eq!(critical_gamma(0.9).unwrap(), 1.8);
        assert!(critical_gamma(1e-9).unwrap() < 1e-8);
        assert!(critical_gamma(0.0).is_err());
        assert!(critical_gamma(1.0).is_err());
        assert!(critical_gamma(-0.2).is_err());
    }

    #[test]
    fn dispersion_band_edges() {
        // k -> π: ε = (1+δ) + (1-δ) = 2 at γ = 0
        let p = ChainParams::new(2000, 0.3, 0.0).unwrap();
        let top = analytic_dispersion(&p, 1999).unwrap();
        assert!((top.eps_k.re - 2.0).abs() < 1e-5);
        assert_eq!(top.phi_k, C64::new(0.0, 0.0));
        // k -> 0: ε⁰ -> 2δ
        let bottom = hermitian_dispersion(&p, 0).unwrap();
        assert!((bottom - 0.6).abs() < 1e-5);
        assert!(analytic_dispersion(&p, 2000).is_err());
    }

    #[test]
    fn dispersion_identities() {
        let p = ChainParams::new(37, 0.7, 1.1).unwrap();
        for n in 0..37 {
            let d = analytic_dispersion(&p, n).unwrap();
            let lhs = d.eps_k * d.eps_k + p.gamma * p.gamma;
            assert!((lhs.re - d.eps0_k * d.eps0_k).abs() < 1e-12 * d.eps0_k * d.eps0_k);
            assert!(lhs.im.abs() < 1e-12);
            assert!(((d.phi_k.tan() * d.eps_k).re - p.gamma).abs() < 1e-12);
        }
    }

    #[test]
    fn broken_region_dispersion_is_complex() {
        let p = ChainParams::new(20, 0.5, 1.2).unwrap();
        let d = analytic_dispersion(&p, 0).unwrap();
        assert!(d.eps_k.im.abs() > 0.0);
        assert!(((d.phi_k.tan() * d.eps_k) - C64::new(1.2, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ep_zero_mode_is_nearly_linear() {
        let p = ChainParams::new(100, 0.5, 1.0).unwrap();
        let d = analytic_dispersion(&p, 0).unwrap();
        let k = PI / 101.0;
        let lin = (2.0 * 0.5 * 0.5f64).sqrt() * k;
        assert!(d.eps_k.re > 0.0);
        assert!((d.eps_k.re - lin).abs() < 0.01 * lin);
        assert!(d.phi_k.re > 1.5 && d.phi_k.re < PI / 2.0);
    }

    #[test]
    fn exact_zero_eps_gives_right_angle() {
        assert_eq!(mixing_angle(1.0, C64::new(0.0, 0.0)).re, PI / 2.0);
    }

    #[test]
    fn linear_frequency_values() {
        let w = |n, d| linearized_frequency(&ChainParams::new(n, d, 2.0 * d).unwrap());
        assert!((w(500, 0.9) - 0.18f64.sqrt() * PI / 501.0).abs() < 1e-18);
        assert!((w(500, 0.9) - 2.661e-3).abs() < 1e-6);
        assert!((w(150, 0.9) - 8.828e-3).abs() < 1e-5);
        assert!((w(100, 0.5) - 0.5f64.sqrt() * PI / 101.0).abs() < 1e-18);
    }

    #[test]
    fn linearization_tracks_exact_formula() {
        let p = ChainParams::new(500, 0.9, 1.8).unwrap();
        let w = linearized_frequency(&p);
        let d = analytic_dispersion(&p, 3).unwrap();
        assert!((d.eps_k.re - 4.0 * w).abs() < 0.05 * 4.0 * w);
    }

    #[test]
    fn hermitian_dispersion_matches_identity_at_ep() {
        let p = ChainParams::new(150, 0.9, 1.8).unwrap();
        let e0 = hermitian_dispersion(&p, 0).unwrap();
        assert!(e0 > 1.8 && e0 - 1.8 < 1e-3);
        let d = analytic_dispersion(&p, 0).unwrap();
        assert!(((d.eps_k.norm_sqr() + 1.8 * 1.8).sqrt() - e0).abs() < 1e-12);
    }

    #[test]
    fn unpaired_complex_eigenvalue_is_an_error() {
        let p = ChainParams::new(2, 0.5, 1.0).unwrap();
        let eigs = [
            C64::new(-1.0, 0.0),
            C64::new(0.0, 0.5),
            C64::new(0.3, -0.5),
            C64::new(1.0, 0.0),
        ];
        let err = classify_spectrum(&eigs, &p, &SpectrumTolerances::default()).unwrap_err();
        assert!(matches!(err, Error::UnpairedEigenvalue { .. }));
    }

    #[test]
    fn spacing_needs_enough_levels() {
        let p = ChainParams::new(3, 0.5, 0.0).unwrap();
        let spec = exact_eigen(&build_hamiltonian(&p).unwrap()).unwrap();
        let res = classify_spectrum(&spec.values, &p, &SpectrumTolerances::default()).unwrap();
        assert!(level_spacing_profile(&res, 4).is_err());
        assert_eq!(level_spacing_profile(&res, 3).unwrap().len(), 2);
    }

    #[test]
    fn biorthonormal_scaling() {
        let p = ChainParams::new(6, 0.6, 0.4).unwrap();
        let spec = exact_eigen(&build_hamiltonian(&p).unwrap()).unwrap();
        let (left, skipped) = spec.biorthonormal_left();
        assert!(skipped.is_empty());
        let g = left.adjoint() * &spec.right;
        for i in 0..12 {
            for j in 0..12 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - C64::new(target, 0.0)).norm() < 1e-10);
            }
        }
    }
}
