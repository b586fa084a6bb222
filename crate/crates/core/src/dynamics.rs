//! Time evolution of positive-branch states, centroid trajectories and their
//! Fourier shape.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::coherent::{
    center_of_mass, coherent_state, profile_spread, CoherentSpec, PositiveBranch, StateVector,
};
use crate::eigen::{eigenvalues, spectral_norm_estimate};
use crate::lattice::{ChainParams, HamiltonianMatrix};
use crate::spectral::{exact_eigen, linearized_frequency};
use crate::{CVector, Error, Result, C64};

/// Default RK4 step in units of `1/‖H‖`.
pub const DEFAULT_STEP_FACTOR: f64 = 0.02;
/// Largest admissible RK4 step in units of `1/‖H‖`.
pub const MAX_STEP_FACTOR: f64 = 0.05;
/// Eigenvector condition number above which eigen-expansion is not used.
pub const MAX_EXPANSION_CONDITION: f64 = 1e8;
/// Dirac norm treated as blow-up.
pub const DIVERGENCE_NORM: f64 = 1e150;
/// `|α|` above which the small-amplitude sinusoid is outside its regime.
pub const SMALL_ALPHA_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrajectoryMethod {
    AnalyticPhase,
    ExactPropagation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Propagator {
    /// RK4 at the exceptional point, eigen-expansion elsewhere when the
    /// eigenvector matrix is well conditioned.
    #[default]
    Auto,
    Rk4,
    EigenExpansion,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EvolveOptions {
    pub propagator: Propagator,
    /// RK4 step; defaults to `0.02/‖H‖`.
    pub dt: Option<f64>,
}

/// `e^{-iωt}` times the coherent state with `α -> α e^{-iωt}`.
pub fn evolve_analytic(spec: &CoherentSpec, branch: &PositiveBranch, t: f64) -> Result<StateVector> {
    if !t.is_finite() {
        return Err(Error::domain("time must be finite"));
    }
    let omega = linearized_frequency(&branch.params);
    let rotated = CoherentSpec {
        cutoff: Some(spec.resolve_cutoff(branch.n_modes())?),
        ..spec.rotated(omega * t)
    };
    let mut s = coherent_state(&rotated, branch)?;
    s.amplitudes *= C64::from_polar(1.0, -omega * t);
    s.provenance.alpha = Some(spec.alpha);
    s.provenance.time = t;
    s.provenance.method = "analytic-phase".into();
    Ok(s)
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::domain("no snapshot times requested"));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::domain("snapshot times must be finite and non-negative"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("snapshot times must be strictly increasing"));
    }
    Ok(())
}

fn divergence(h: &HamiltonianMatrix, time: f64) -> Error {
    let max_imag = eigenvalues(h.matrix())
        .map(|v| v.iter().map(|z| z.im.abs()).fold(0.0, f64::max))
        .unwrap_or(f64::NAN);
    Error::Divergence { time, max_imag }
}

fn snapshot(amp: CVector, base: &StateVector, t: f64, method: &str) -> StateVector {
    let mut prov = base.provenance.clone();
    prov.time = t;
    prov.method = method.into();
    StateVector::new(amp, prov)
}

/// Integrates `i dψ/dt = Hψ` from `t = 0` and returns one snapshot per
/// requested time.
pub fn evolve_exact(
    h: &HamiltonianMatrix,
    state0: &StateVector,
    times: &[f64],
    opts: EvolveOptions,
) -> Result<Vec<StateVector>> {
    check_times(times)?;
    if state0.amplitudes.len() != h.dim() {
        return Err(Error::domain("state and Hamiltonian dimensions differ"));
    }
    let hnorm = spectral_norm_estimate(h.matrix());
    if let Some(dt) = opts.dt {
        if !(dt > 0.0) || dt > MAX_STEP_FACTOR / hnorm {
            return Err(Error::domain(format!(
                "step {dt} must lie in (0, {:.6e}] (0.05/‖H‖)",
                MAX_STEP_FACTOR / hnorm
            )));
        }
    }
    match opts.propagator {
        Propagator::Rk4 => rk4(h, state0, times, opts.dt.unwrap_or(DEFAULT_STEP_FACTOR / hnorm)),
        Propagator::EigenExpansion => eigen_expansion(h, state0, times, true),
        Propagator::Auto => {
            if h.params().at_exceptional_point() {
                rk4(h, state0, times, opts.dt.unwrap_or(DEFAULT_STEP_FACTOR / hnorm))
            } else {
                match eigen_expansion(h, state0, times, false) {
                    Err(Error::Numerical(_)) => {
                        rk4(h, state0, times, opts.dt.unwrap_or(DEFAULT_STEP_FACTOR / hnorm))
                    }
                    other => other,
                }
            }
        }
    }
}

fn rk4(h: &HamiltonianMatrix, state0: &StateVector, times: &[f64], dt: f64) -> Result<Vec<StateVector>> {
    let tri = h.tridiagonal()?;
    let n = h.dim();
    let mi = C64::new(0.0, -1.0);
    let mut psi: Vec<C64> = state0.amplitudes.iter().copied().collect();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![C64::default(); n], vec![C64::default(); n], vec![C64::default(); n], vec![C64::default(); n]);
    let mut tmp = vec![C64::default(); n];
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());

    for &target in times {
        let span = target - t;
        let steps = if span > 0.0 { (span / dt).ceil() as usize } else { 0 };
        let h_step = if steps > 0 { span / steps as f64 } else { 0.0 };
        for _ in 0..steps {
            tri.apply_into(&psi, &mut k1);
            k1.iter_mut().for_each(|z| *z *= mi);
            for i in 0..n {
                tmp[i] = psi[i] + k1[i] * (0.5 * h_step);
            }
            tri.apply_into(&tmp, &mut k2);
            k2.iter_mut().for_each(|z| *z *= mi);
            for i in 0..n {
                tmp[i] = psi[i] + k2[i] * (0.5 * h_step);
            }
            tri.apply_into(&tmp, &mut k3);
            k3.iter_mut().for_each(|z| *z *= mi);
            for i in 0..n {
                tmp[i] = psi[i] + k3[i] * h_step;
            }
            tri.apply_into(&tmp, &mut k4);
            k4.iter_mut().for_each(|z| *z *= mi);
            let mut norm2 = 0.0;
            for i in 0..n {
                psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h_step / 6.0);
                norm2 += psi[i].norm_sqr();
            }
            t += h_step;
            if !norm2.is_finite() || norm2 > DIVERGENCE_NORM * DIVERGENCE_NORM {
                return Err(divergence(h, t));
            }
        }
        t = target;
        out.push(snapshot(CVector::from_vec(psi.clone()), state0, target, "rk4"));
    }
    Ok(out)
}

fn eigen_expansion(
    h: &HamiltonianMatrix,
    state0: &StateVector,
    times: &[f64],
    forced: bool,
) -> Result<Vec<StateVector>> {
    let spec = exact_eigen(h)?;
    if !forced && !(spec.condition < MAX_EXPANSION_CONDITION) {
        return Err(Error::Numerical(format!(
            "eigenvector condition {:.3e} too large for expansion",
            spec.condition
        )));
    }
    let coeffs = spec
        .right
        .clone()
        .lu()
        .solve(&state0.amplitudes)
        .ok_or_else(|| Error::Numerical("eigenvector matrix is singular".into()))?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let rotated = CVector::from_fn(coeffs.len(), |i, _| coeffs[i] * (C64::new(0.0, -t) * spec.values[i]).exp());
        let amp = &spec.right * rotated;
        let nrm = amp.norm();
        if !nrm.is_finite() || nrm > DIVERGENCE_NORM {
            return Err(divergence(h, t));
        }
        out.push(snapshot(amp, state0, t, "eigen-expansion"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub r_c: Vec<f64>,
    pub dirac_norms: Vec<f64>,
    pub spread: Vec<f64>,
    pub method: TrajectoryMethod,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max_t |‖ψ(t)‖/‖ψ(0)‖ - 1|`.
    pub fn max_norm_drift(&self) -> f64 {
        let n0 = self.dirac_norms[0];
        self.dirac_norms.iter().map(|n| (n / n0 - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn peak_to_peak(&self) -> f64 {
        let hi = self.r_c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = self.r_c.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

/// Centroid, norm and spread of every snapshot.
pub fn trajectory(snapshots: &[StateVector], method: TrajectoryMethod) -> Result<Trajectory> {
    if snapshots.is_empty() {
        return Err(Error::domain("no snapshots"));
    }
    let times: Vec<f64> = snapshots.iter().map(|s| s.provenance.time).collect();
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("snapshot times must be strictly increasing"));
    }
    let mut r_c = Vec::with_capacity(snapshots.len());
    let mut spread = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        r_c.push(center_of_mass(s)?);
        spread.push(profile_spread(s)?);
    }
    Ok(Trajectory {
        times,
        r_c,
        dirac_norms: snapshots.iter().map(|s| s.dirac_norm).collect(),
        spread,
        method,
    })
}

pub fn analytic_trajectory(spec: &CoherentSpec, branch: &PositiveBranch, times: &[f64]) -> Result<Trajectory> {
    check_times(times)?;
    let snaps = times
        .iter()
        .map(|&t| evolve_analytic(spec, branch, t))
        .collect::<Result<Vec<_>>>()?;
    trajectory(&snaps, TrajectoryMethod::AnalyticPhase)
}

pub fn exact_trajectory(
    h: &HamiltonianMatrix,
    state0: &StateVector,
    times: &[f64],
    opts: EvolveOptions,
) -> Result<Trajectory> {
    trajectory(&evolve_exact(h, state0, times, opts)?, TrajectoryMethod::ExactPropagation)
}

/// `samples` uniformly spaced times on `[0, t_final]`, both ends included.
pub fn uniform_times(t_final: f64, samples: usize) -> Result<Vec<f64>> {
    if !(t_final > 0.0) || !t_final.is_finite() || samples < 2 {
        return Err(Error::domain("need t_final > 0 and at least two samples"));
    }
    let dt = t_final / (samples - 1) as f64;
    Ok((0..samples).map(|i| i as f64 * dt).collect())
}

/// `N - (64N/9π²)|α| cos(ωt - arg α)` in the flat index.
pub fn sinusoid_prediction(params: &ChainParams, alpha: C64, t: f64) -> f64 {
    let n = params.n_cells as f64;
    let omega = linearized_frequency(params);
    n - 64.0 * n / (9.0 * PI * PI) * alpha.norm() * (omega * t - alpha.arg()).cos()
}

/// `|2N(ωt/π - 2m)|` with `m` the nearest period index: a triangle wave of
/// period `2π/ω` sweeping `0..2N`.
pub fn triangle_prediction(params: &ChainParams, t: f64) -> f64 {
    let x = linearized_frequency(params) * t / PI;
    let m = (x / 2.0).round();
    2.0 * params.n_cells as f64 * (x - 2.0 * m).abs()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrajectoryFit {
    /// Magnitude of the fundamental Fourier component.
    pub amplitude: f64,
    pub frequency: f64,
    /// `θ` in `A cos(ωt - θ)`.
    pub phase_offset: f64,
    pub mean_level: f64,
    /// `|c₃|/|c₁|`; `0` for a sinusoid and `1/9` for a triangle wave.
    pub shape_metric: f64,
    /// Whole periods in the analysis window.
    pub periods: usize,
}

fn trapezoid(t: &[f64], f: impl Fn(usize) -> C64) -> C64 {
    let mut acc = C64::default();
    for i in 1..t.len() {
        acc += (f(i) + f(i - 1)) * (0.5 * (t[i] - t[i - 1]));
    }
    acc
}

/// Frequency of the strongest spectral peak of a Hann-windowed signal.
pub fn dominant_frequency(times: &[f64], values: &[f64]) -> Result<f64> {
    let n = times.len();
    if n < 8 || values.len() != n {
        return Err(Error::domain("need at least 8 matching samples"));
    }
    let span = times[n - 1] - times[0];
    let mean = values.iter().sum::<f64>() / n as f64;
    let hann: Vec<f64> = (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos()).collect();
    let power = |w: f64| {
        trapezoid(times, |i| C64::from_polar((values[i] - mean) * hann[i], -w * (times[i] - times[0]))).norm()
    };
    let dt = span / (n - 1) as f64;
    let w_lo = PI / span;
    let w_hi = PI / dt;
    let grid = 8 * n;
    let step = (w_hi - w_lo) / grid as f64;
    let (mut best_w, mut best_p) = (w_lo, power(w_lo));
    for i in 1..=grid {
        let w = w_lo + i as f64 * step;
        let p = power(w);
        if p > best_p {
            best_w = w;
            best_p = p;
        }
    }
    // refine by least-squares sinusoid fit inside the bracketing cells
    let (mut a, mut b) = ((best_w - 2.0 * step).max(w_lo), (best_w + 2.0 * step).min(w_hi));
    let explained = |w: f64| sinusoid_fit_quality(times, values, w);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if explained(c) > explained(d) {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(0.5 * (a + b))
}

/// Variance explained by the least-squares fit of `c + p cos ωt + q sin ωt`.
fn sinusoid_fit_quality(times: &[f64], values: &[f64], w: f64) -> f64 {
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut atb = nalgebra::Vector3::<f64>::zeros();
    for (&t, &y) in times.iter().zip(values) {
        let row = nalgebra::Vector3::new(1.0, (w * t).cos(), (w * t).sin());
        ata += row * row.transpose();
        atb += row * y;
    }
    match ata.cholesky() {
        Some(ch) => ch.solve(&atb).dot(&atb),
        None => 0.0,
    }
}

/// Fourier decomposition of `r_c(t)` at `ω` and `3ω` over a whole number of
/// periods. When `omega` is `None` the fundamental is located by peak search.
pub fn fit_trajectory(traj: &Trajectory, omega: Option<f64>) -> Result<TrajectoryFit> {
    let t = &traj.times;
    let n = t.len();
    if n < 8 || traj.r_c.len() != n {
        return Err(Error::domain("trajectory too short to fit"));
    }
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    if t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0)) {
        return Err(Error::domain("fit needs uniformly sampled times"));
    }
    let omega = match omega {
        Some(w) if w > 0.0 && w.is_finite() => w,
        Some(w) => return Err(Error::domain(format!("frequency must be positive, got {w}"))),
        None => dominant_frequency(t, &traj.r_c)?,
    };
    let period = 2.0 * PI / omega;
    let span = t[n - 1] - t[0];
    let periods = (span / period + 0.01).floor() as usize;
    if periods < 2 {
        return Err(Error::domain(format!(
            "trajectory spans {:.3} periods, need at least 2",
            span / period
        )));
    }
    let end = t[0] + periods as f64 * period;
    let last = t.iter().rposition(|&x| x <= end + 1e-9 * dt).unwrap_or(n - 1);
    let tw = &t[..=last];
    let width = tw[last] - tw[0];
    let mean = trapezoid(tw, |i| C64::new(traj.r_c[i], 0.0)).re / width;
    let harmonic = |m: f64| {
        trapezoid(tw, |i| C64::from_polar(traj.r_c[i] - mean, -m * omega * (tw[i] - tw[0]))) * (2.0 / width)
    };
    let c1 = harmonic(1.0);
    let c3 = harmonic(3.0);
    // phase is referred to absolute time
    let theta = -c1.arg() + omega * tw[0];
    Ok(TrajectoryFit {
        amplitude: c1.norm(),
        frequency: omega,
        phase_offset: theta.rem_euclid(2.0 * PI),
        mean_level: mean,
        shape_metric: if c1.norm() > 0.0 { c3.norm() / c1.norm() } else { 0.0 },
        periods,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub alpha: f64,
    /// `[α² - 4α, α² + 4α]` clipped at zero.
    pub full_window: (usize, usize),
    /// `[α² - 2α, α² + 2α]` clipped at zero.
    pub core_window: (usize, usize),
    pub max_rel_deviation_full: f64,
    pub max_rel_deviation_core: f64,
    /// The full window reaches beyond the highest available mode.
    pub depleted: bool,
    pub warning: Option<String>,
}

/// Compares Poisson amplitudes `e^{-α²/2}αⁿ/√(n!)` with the Gaussian
/// `e^{-(n-α²)²/4α²}/(α√(2π))^{1/2}`.
pub fn gaussian_envelope_check(alpha: f64, n_modes: usize) -> Result<EnvelopeReport> {
    if !(alpha.abs() >= 3.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("envelope check needs |α| ≥ 3, got {alpha}")));
    }
    let a = alpha.abs();
    let mu = a * a;
    let window = |w: f64| {
        let lo = (mu - w * a).ceil().max(0.0) as usize;
        let hi = (mu + w * a).floor() as usize;
        (lo, hi)
    };
    let full = window(4.0);
    let core = window(2.0);
    let mut ln_fact = vec![0.0f64; full.1 + 1];
    for i in 1..=full.1 {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let dev = |(lo, hi): (usize, usize)| {
        (lo..=hi)
            .map(|n| {
                let poisson = (-0.5 * mu + n as f64 * a.ln() - 0.5 * ln_fact[n]).exp();
                let gauss = (-(n as f64 - mu).powi(2) / (4.0 * mu)).exp() / (a * (2.0 * PI).sqrt()).sqrt();
                (poisson / gauss - 1.0).abs()
            })
            .fold(0.0, f64::max)
    };
    let depleted = full.1 + 1 > n_modes;
    let warning = depleted.then(|| {
        format!(
            "occupied modes reach n = {} but only {} exist (mode depletion)",
            full.1, n_modes
        )
    });
    Ok(EnvelopeReport {
        alpha: a,
        full_window: full,
        core_window: core,
        max_rel_deviation_full: dev(full),
        max_rel_deviation_core: dev(core),
        depleted,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_hamiltonian;
    use crate::modes::build_mode_basis;

    fn setup(n: usize, d: f64, g: f64) -> (ChainParams, PositiveBranch, HamiltonianMatrix) {
        let p = ChainParams::new(n, d, g).unwrap();
        let b = PositiveBranch::analytic(&build_mode_basis(&p).unwrap());
        (p, b, build_hamiltonian(&p).unwrap())
    }

    #[test]
    fn analytic_evolution_is_periodic() {
        let (p, b, _) = setup(60, 0.9, 1.8);
        let spec = CoherentSpec::from_polar(0.7, 0.4);
        let s0 = evolve_analytic(&spec, &b, 0.0).unwrap();
        let period = 2.0 * PI / linearized_frequency(&p);
        let s1 = evolve_analytic(&spec, &b, period).unwrap();
        assert!((s0.amplitudes.clone() - s1.amplitudes).norm() < 1e-12);
        let direct = coherent_state(&spec, &b).unwrap();
        assert!((s0.amplitudes - direct.amplitudes).norm() < 1e-15);
    }

    #[test]
    fn half_period_flips_alpha() {
        let (p, b, _) = setup(80, 0.9, 1.8);
        let spec = CoherentSpec::new(C64::new(0.4, 0.0));
        let t = PI / linearized_frequency(&p);
        let half = center_of_mass(&evolve_analytic(&spec, &b, t).unwrap()).unwrap();
        let flipped = center_of_mass(&coherent_state(&CoherentSpec::new(C64::new(-0.4, 0.0)), &b).unwrap()).unwrap();
        assert!((half - flipped).abs() < 1e-9);
    }

    #[test]
    fn hermitian_propagation_is_unitary() {
        let (p, _, h) = setup(20, 0.6, 0.0);
        let s0 = StateVector::site(&p, 7).unwrap();
        let times = uniform_times(100.0, 11).unwrap();
        for prop in [Propagator::Rk4, Propagator::EigenExpansion] {
            let snaps = evolve_exact(&h, &s0, &times, EvolveOptions { propagator: prop, dt: None }).unwrap();
            for s in &snaps {
                assert!((s.dirac_norm - 1.0).abs() < 1e-8, "{prop:?}");
            }
        }
    }

    #[test]
    fn rk4_matches_expansion_off_ep() {
        let (p, _, h) = setup(15, 0.7, 0.5);
        let s0 = StateVector::site(&p, 3).unwrap();
        let times = [1.0, 5.0, 12.5];
        let a = evolve_exact(&h, &s0, &times, EvolveOptions { propagator: Propagator::Rk4, dt: None }).unwrap();
        let b = evolve_exact(&h, &s0, &times, EvolveOptions { propagator: Propagator::EigenExpansion, dt: None }).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.amplitudes.clone() - y.amplitudes.clone()).norm() < 1e-8);
            assert_eq!(x.provenance.time, y.provenance.time);
        }
    }

    #[test]
    fn oversized_step_is_rejected() {
        let (p, _, h) = setup(10, 0.5, 0.2);
        let s0 = StateVector::site(&p, 1).unwrap();
        let r = evolve_exact(&h, &s0, &[1.0], EvolveOptions { propagator: Propagator::Rk4, dt: Some(0.5) });
        assert!(matches!(r, Err(Error::Domain(_))));
        let r = evolve_exact(&h, &s0, &[2.0, 1.0], EvolveOptions::default());
        assert!(r.is_err());
    }

    #[test]
    fn broken_phase_blows_up() {
        let (p, _, h) = setup(10, 0.5, 1.2);
        let s0 = StateVector::site(&p, 4).unwrap();
        let r = evolve_exact(&h, &s0, &[2000.0], EvolveOptions { propagator: Propagator::Rk4, dt: None });
        match r {
            Err(Error::Divergence { max_imag, .. }) => assert!(max_imag > 0.1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn triangle_prediction_landmarks() {
        let p = ChainParams::new(150, 0.9, 1.8).unwrap();
        let w = linearized_frequency(&p);
        assert_eq!(triangle_prediction(&p, 0.0), 0.0);
        assert!((triangle_prediction(&p, PI / (2.0 * w)) - 150.0).abs() < 1e-9);
        assert!((triangle_prediction(&p, PI / w * (1.0 - 1e-12)) - 300.0).abs() < 1e-6);
        assert!(triangle_prediction(&p, 2.0 * PI / w).abs() < 1e-9);
    }

    #[test]
    fn sinusoid_prediction_minimum() {
        let p = ChainParams::new(500, 0.9, 1.8).unwrap();
        let v = sinusoid_prediction(&p, C64::new(0.1, 0.0), 0.0);
        assert!((v - (500.0 - 3200.0 / (9.0 * PI * PI))).abs() < 1e-9);
    }

    fn synthetic(f: impl Fn(f64) -> f64, omega: f64, samples: usize) -> Trajectory {
        let times = uniform_times(2.0 * 2.0 * PI / omega, samples).unwrap();
        Trajectory {
            r_c: times.iter().map(|&t| f(t)).collect(),
            dirac_norms: vec![1.0; samples],
            spread: vec![0.0; samples],
            times,
            method: TrajectoryMethod::AnalyticPhase,
        }
    }

    #[test]
    fn fit_cosine_and_triangle() {
        let w = 0.37;
        let cos = synthetic(|t| 10.0 - 3.0 * (w * t - 0.5).cos(), w, 801);
        let fit = fit_trajectory(&cos, Some(w)).unwrap();
        assert!((fit.amplitude - 3.0).abs() < 1e-3);
        assert!(fit.shape_metric < 1e-3);
        assert!((fit.mean_level - 10.0).abs() < 1e-3);
        assert!(((fit.phase_offset - (0.5 + PI)).rem_euclid(2.0 * PI)).min(2.0 * PI - (fit.phase_offset - (0.5 + PI)).rem_euclid(2.0 * PI)) < 1e-3);

        let tri = synthetic(
            |t| {
                let x = w * t / PI;
                (x - 2.0 * (x / 2.0).round()).abs()
            },
            w,
            2001,
        );
        let fit = fit_trajectory(&tri, Some(w)).unwrap();
        assert!((fit.shape_metric - 1.0 / 9.0).abs() < 1e-3, "{}", fit.shape_metric);

        let est = fit_trajectory(&cos, None).unwrap();
        assert!((est.frequency / w - 1.0).abs() < 1e-3);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let w = 1.0;
        let mut tr = synthetic(|t| t.cos(), w, 100);
        assert!(fit_trajectory(&tr, Some(0.5)).is_err());
        tr.times[3] += 1e-3;
        assert!(fit_trajectory(&tr, Some(w)).is_err());
    }

    #[test]
    fn envelope_check() {
        assert!(gaussian_envelope_check(2.0, 500).is_err());
        let r6 = gaussian_envelope_check(6.0, 500).unwrap();
        let r3 = gaussian_envelope_check(3.0, 500).unwrap();
        assert!(r6.max_rel_deviation_core < 0.1);
        assert!(r3.max_rel_deviation_core > r6.max_rel_deviation_core);
        assert!(!r6.depleted);
        let r12 = gaussian_envelope_check(12.0, 150).unwrap();
        assert!(r12.depleted && r12.warning.is_some());
    }
}
