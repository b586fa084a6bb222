use std::path::Path;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde_json::{json, Value};

use ptssh::coherent::{
    center_of_mass, coherent_state, dirac_profile, mean_occupation, phase_map_amplitudes,
    profile_spread, com_phase_row, CoherentSpec, PositiveBranch, Provenance, StateVector,
};
use ptssh::dynamics::{
    analytic_trajectory, evolve_analytic, evolve_exact, fit_trajectory, trajectory,
    uniform_times, EvolveOptions, Propagator, Trajectory, TrajectoryMethod, SMALL_ALPHA_LIMIT,
};
use ptssh::export::{complex_matrix_csv, csv_columns, csv_table, fmt_f64};
use ptssh::lattice::{build_hamiltonian, ChainParams, HamiltonianMatrix};
use ptssh::modes::{build_mode_basis, canonical_gram, coalescence_selfnorm, eigenstate_report, quasi_canonical_gram};
use ptssh::spectral::{
    band_gap, classify_spectrum, critical_gamma, exact_eigen, linearized_frequency, SpectrumTolerances,
};
use ptssh::CVector;

use crate::args::*;
use crate::error::CliError;
use crate::output::{provenance, write_atomic, write_csv_with_sidecar, write_json};

/// Time unit used in the trajectory figures.
const FIGURE_TIME_UNIT: f64 = 20.0;

fn core(module: &'static str) -> impl Fn(ptssh::Error) -> CliError {
    move |e| CliError::from_core(module, e)
}

pub fn chain_params(cells: usize, delta: f64, gamma: f64, scale: f64) -> Result<ChainParams, CliError> {
    if cells < 2 {
        return Err(CliError::Usage(format!("--cells must be at least 2, got {cells}")));
    }
    if !delta.is_finite() || delta.abs() >= 1.0 {
        return Err(CliError::Usage(format!("--delta must satisfy |δ| < 1, got {delta}")));
    }
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(CliError::Usage(format!("--gamma must be finite and ≥ 0, got {gamma}")));
    }
    if !scale.is_finite() || scale <= 0.0 {
        return Err(CliError::Usage(format!("--scale must be finite and > 0, got {scale}")));
    }
    if delta <= 0.0 {
        eprintln!("warning: δ = {delta} lies outside (0, 1); closed-form dispersion and mode formulas assume strong positive dimerization");
    }
    ChainParams::with_scale(cells, delta, gamma, scale).map_err(core("lattice"))
}

fn params_of(c: &ChainArgs) -> Result<ChainParams, CliError> {
    chain_params(c.cells, c.delta, c.gamma, c.scale)
}

fn tolerances(realness: f64, pairing: f64, gap: Option<f64>) -> Result<SpectrumTolerances, CliError> {
    if !(realness > 0.0) {
        return Err(CliError::Usage(format!("--realness-tol must be > 0, got {realness}")));
    }
    if !(pairing > 0.0) {
        return Err(CliError::Usage(format!("--pairing-tol must be > 0, got {pairing}")));
    }
    if let Some(g) = gap {
        if !(g > 0.0) {
            return Err(CliError::Usage(format!("--gap-tol must be > 0, got {g}")));
        }
    }
    Ok(SpectrumTolerances { realness, pairing, gap })
}

pub fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    if jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j);
    }
    b.build().map_err(|e| CliError::Numerical(format!("thread pool: {e}")))
}

pub fn spectrum(a: &SpectrumArgs) -> Result<(), CliError> {
    let p = params_of(&a.chain)?;
    let tol = tolerances(a.realness_tol, a.pairing_tol, a.gap_tol)?;
    let h = build_hamiltonian(&p).map_err(core("lattice"))?;
    let ex = exact_eigen(&h).map_err(core("spectral"))?;
    let result = classify_spectrum(&ex.values, &p, &tol).map_err(core("spectral"))?;
    let mut csv = String::from("index,re_E,im_E\n");
    for (i, z) in ex.values.iter().enumerate() {
        csv.push_str(&format!("{},{},{}\n", i + 1, fmt_f64(z.re), fmt_f64(z.im)));
    }
    let summary = json!({
        "phase": result.phase.label(),
        "n_real": result.n_real,
        "n_complex_pairs": result.n_complex_pairs,
        "gap_estimate": result.gap_estimate,
        "gap_tolerance": result.gap_tolerance,
        "near_zero_levels": result.near_zero_levels,
        "max_imag": result.max_imag(),
        "analytic_band_gap": band_gap(&p).value(),
        "critical_gamma": critical_gamma(p.delta).ok(),
        "max_residual": ex.max_residual,
        "eigenvector_condition": ex.condition,
    });
    write_csv_with_sidecar(&a.out, &csv, provenance("spectrum", a), summary)?;
    if let Some(m) = &a.matrix_out {
        write_atomic(m, &complex_matrix_csv(h.matrix()))?;
    }
    println!(
        "phase {} | real {} | complex pairs {} | gap {} | near-zero {}",
        result.phase.label(),
        result.n_real,
        result.n_complex_pairs,
        fmt_f64(result.gap_estimate),
        result.near_zero_levels
    );
    Ok(())
}

pub fn phase_sweep(a: &PhaseSweepArgs, jobs: Option<usize>) -> Result<(), CliError> {
    if a.steps < 2 {
        return Err(CliError::Usage(format!("--steps must be at least 2, got {}", a.steps)));
    }
    if !(a.gamma_from >= 0.0 && a.gamma_to > a.gamma_from && a.gamma_to.is_finite()) {
        return Err(CliError::Usage("need 0 ≤ --gamma-from < --gamma-to".into()));
    }
    let tol = tolerances(a.realness_tol, a.pairing_tol, a.gap_tol)?;
    chain_params(a.cells, a.delta, a.gamma_from, a.scale)?;
    let gammas: Vec<f64> = (0..a.steps)
        .map(|i| a.gamma_from + (a.gamma_to - a.gamma_from) * i as f64 / (a.steps - 1) as f64)
        .collect();
    let results = pool(jobs)?.install(|| {
        gammas
            .par_iter()
            .map(|&g| {
                let p = ChainParams::with_scale(a.cells, a.delta, g, a.scale).map_err(core("lattice"))?;
                let h = build_hamiltonian(&p).map_err(core("lattice"))?;
                let vals = ptssh::eigen::eigenvalues(h.matrix()).map_err(core("spectral"))?;
                classify_spectrum(&vals, &p, &tol).map_err(core("spectral")).map(|r| (p, r))
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let mut csv = String::from("gamma,phase,n_real,n_complex_pairs,gap_estimate,max_imag,analytic_gap\n");
    for (p, r) in &results {
        let gap = band_gap(p).value().map(fmt_f64).unwrap_or_else(|| "nan".into());
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(p.gamma),
            r.phase.label(),
            r.n_real,
            r.n_complex_pairs,
            fmt_f64(r.gap_estimate),
            fmt_f64(r.max_imag()),
            gap
        ));
    }
    let transitions: Vec<Value> = results
        .windows(2)
        .filter(|w| w[0].1.phase != w[1].1.phase)
        .map(|w| json!({"from": w[0].1.phase.label(), "to": w[1].1.phase.label(), "gamma_low": w[0].0.gamma, "gamma_high": w[1].0.gamma}))
        .collect();
    write_csv_with_sidecar(
        &a.out,
        &csv,
        provenance("phase-sweep", a),
        json!({"transitions": transitions, "critical_gamma": critical_gamma(a.delta).ok()}),
    )?;
    println!("{} points, {} phase changes", results.len(), transitions.len());
    Ok(())
}

pub fn modes(a: &ModesArgs) -> Result<(), CliError> {
    let p = params_of(&a.chain)?;
    let basis = build_mode_basis(&p).map_err(core("modes"))?;
    let canonical = canonical_gram(&basis);
    let quasi = quasi_canonical_gram(&basis);
    let h = build_hamiltonian(&p).map_err(core("lattice"))?;
    let eig = eigenstate_report(&basis, &h).map_err(core("modes"))?;
    let max_res = eig.residual_plus.iter().chain(&eig.residual_minus).cloned().fold(0.0, f64::max);
    let selfnorm = coalescence_selfnorm(&p).ok().map(|z| json!({"re": z.re, "im": z.im, "abs": z.norm()}));
    let quasi_json = match &quasi {
        Ok(r) => json!(r),
        Err(e) => json!({"error": e.to_string()}),
    };
    let report = json!({
        "provenance": provenance("modes", a),
        "canonical": canonical,
        "quasi_canonical": quasi_json,
        "defective_rows": basis.defective_rows,
        "pinned_zero_mode": basis.pinned_zero_mode,
        "eigenstates": {
            "max_relative_residual": max_res,
            "orthonormality_deviation": eig.orthonormality_deviation,
            "plus_minus_overlap_abs": eig.plus_minus_overlap.iter().map(|z| z.norm()).collect::<Vec<_>>(),
        },
        "coalescence_selfnorm": selfnorm,
    });
    write_json(&a.report, &report)?;
    for r in canonical.iter().chain(quasi.iter().flatten()) {
        println!("{:<16} max deviation {}", r.relation, fmt_f64(r.max_abs_deviation));
    }
    if let Err(e) = quasi {
        println!("quasi-canonical relations skipped: {e}");
    }
    Ok(())
}

fn coherent_spec(c: &CoherentArgs) -> Result<CoherentSpec, CliError> {
    let mag = c.alpha_mag.ok_or_else(|| CliError::Usage("--alpha-mag is required".into()))?;
    if !mag.is_finite() || mag < 0.0 {
        return Err(CliError::Usage(format!("--alpha-mag must be finite and ≥ 0, got {mag}")));
    }
    if !c.alpha_phase.is_finite() {
        return Err(CliError::Usage("--alpha-phase must be finite".into()));
    }
    if !(c.tail_tol > 0.0) {
        return Err(CliError::Usage(format!("--tail-tol must be > 0, got {}", c.tail_tol)));
    }
    let mut s = CoherentSpec::from_polar(mag, c.alpha_phase).with_tail_tolerance(c.tail_tol);
    if let Some(k) = c.cutoff {
        s = s.with_cutoff(k);
    }
    Ok(s)
}

fn branch(p: &ChainParams, which: BranchArg) -> Result<(PositiveBranch, HamiltonianMatrix), CliError> {
    let basis = build_mode_basis(p).map_err(core("modes"))?;
    let h = build_hamiltonian(p).map_err(core("lattice"))?;
    let b = match which {
        BranchArg::Analytic => PositiveBranch::analytic(&basis),
        BranchArg::Exact => {
            let ex = exact_eigen(&h).map_err(core("spectral"))?;
            PositiveBranch::exact(&basis, &ex).map_err(core("coherent"))?
        }
    };
    Ok((b, h))
}

pub fn profile(a: &ProfileArgs) -> Result<(), CliError> {
    let p = params_of(&a.chain)?;
    let spec = coherent_spec(&a.coherent)?;
    let (b, _) = branch(&p, a.branch)?;
    let state = coherent_state(&spec, &b).map_err(core("coherent"))?;
    let prof = dirac_profile(&state);
    let rc = center_of_mass(&state).map_err(core("coherent"))?;
    let nbar = mean_occupation(&spec, &b).map_err(core("coherent"))?;
    let summary = json!({
        "r_c": rc,
        "n_bar": nbar,
        "spread": profile_spread(&state).map_err(core("coherent"))?,
        "dirac_norm": state.dirac_norm,
        "cutoff": state.provenance.cutoff,
    });
    let mut csv = String::from("l,P_D\n");
    for (i, v) in prof.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", i + 1, fmt_f64(*v)));
    }
    write_csv_with_sidecar(&a.out, &csv, provenance("profile", a), summary)?;
    println!("r_c {} | n_bar {} | norm {}", fmt_f64(rc), fmt_f64(nbar), fmt_f64(state.dirac_norm));
    Ok(())
}

/// `start:stop:count` (inclusive) or a comma-separated list.
pub fn parse_grid(flag: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("{flag} {s:?}: {why}"));
    let parts: Vec<&str> = s.split(':').collect();
    let values: Vec<f64> = if parts.len() == 3 {
        let start: f64 = parts[0].trim().parse().map_err(|_| bad("start is not a number"))?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad("stop is not a number"))?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad("count is not an integer"))?;
        match count {
            0 => return Err(bad("count must be positive")),
            1 => vec![start],
            _ => (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect(),
        }
    } else if parts.len() == 1 {
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad("expected comma-separated numbers")))
            .collect::<Result<_, _>>()?
    } else {
        return Err(bad("expected start:stop:count or a comma list"));
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(values)
}

pub fn phase_map(a: &PhaseMapArgs, jobs: Option<usize>) -> Result<(), CliError> {
    let p = params_of(&a.chain)?;
    let mags = parse_grid("--mag-grid", &a.mag_grid)?;
    let phases = parse_grid("--phase-grid", &a.phase_grid)?;
    if mags.iter().any(|m| *m < 0.0) {
        return Err(CliError::Usage("--mag-grid values must be ≥ 0".into()));
    }
    let (b, _) = branch(&p, a.branch)?;
    let map = pool(jobs)?.install(|| {
        mags.par_iter()
            .map(|&m| com_phase_row(m, &phases, &b).map_err(core("coherent")))
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let mut headers = vec!["abs_alpha".to_string()];
    headers.extend((1..=phases.len()).map(|j| format!("theta_{j}")));
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = mags
        .iter()
        .zip(&map)
        .map(|(m, row)| std::iter::once(*m).chain(row.iter().copied()).collect())
        .collect();
    let amps = phase_map_amplitudes(&map);
    write_csv_with_sidecar(
        &a.out,
        &csv_table(&header_refs, &rows),
        provenance("phase-map", a),
        json!({"phase_grid": phases, "abs_alpha": mags, "half_peak_to_peak": amps}),
    )?;
    println!("{} x {} centroid map written", mags.len(), phases.len());
    Ok(())
}

fn random_state(p: &ChainParams, seed: u64) -> StateVector {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let v = CVector::from_fn(p.dim(), |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    StateVector::new(
        v.normalize(),
        Provenance {
            params: *p,
            alpha: None,
            cutoff: None,
            branch: None,
            time: 0.0,
            method: format!("random(seed={seed})"),
        },
    )
}

pub fn evolve(a: &EvolveArgs) -> Result<(), CliError> {
    let p = params_of(&a.chain)?;
    let times = uniform_times(a.t_final, a.samples).map_err(core("dynamics"))?;
    let omega = linearized_frequency(&p);
    if a.method == MethodArg::Analytic && a.initial == InitialArg::Random {
        return Err(CliError::Usage("--initial random needs --method exact".into()));
    }
    if a.method == MethodArg::Analytic && a.coherent.alpha_mag.is_some_and(|m| m > SMALL_ALPHA_LIMIT) {
        eprintln!("note: |α| beyond {SMALL_ALPHA_LIMIT} leaves the small-amplitude sinusoid regime");
    }
    let (traj, snaps): (Trajectory, Vec<StateVector>) = match a.method {
        MethodArg::Analytic => {
            let spec = coherent_spec(&a.coherent)?;
            let (b, _) = branch(&p, BranchArg::Analytic)?;
            let snaps = times
                .iter()
                .map(|&t| evolve_analytic(&spec, &b, t))
                .collect::<Result<Vec<_>, _>>()
                .map_err(core("dynamics"))?;
            let traj = if a.profile_out.is_some() {
                trajectory(&snaps, TrajectoryMethod::AnalyticPhase)
            } else {
                analytic_trajectory(&spec, &b, &times)
            }
            .map_err(core("dynamics"))?;
            (traj, snaps)
        }
        MethodArg::Exact => {
            let (s0, h) = match a.initial {
                InitialArg::Coherent => {
                    let spec = coherent_spec(&a.coherent)?;
                    let (b, h) = branch(&p, a.branch)?;
                    (coherent_state(&spec, &b).map_err(core("coherent"))?, h)
                }
                InitialArg::Random => (random_state(&p, a.seed), build_hamiltonian(&p).map_err(core("lattice"))?),
            };
            let opts = EvolveOptions {
                propagator: match a.propagator {
                    PropagatorArg::Auto => Propagator::Auto,
                    PropagatorArg::Rk4 => Propagator::Rk4,
                    PropagatorArg::Eigen => Propagator::EigenExpansion,
                },
                dt: a.dt,
            };
            let snaps = evolve_exact(&h, &s0, &times, opts).map_err(core("dynamics"))?;
            (trajectory(&snaps, TrajectoryMethod::ExactPropagation).map_err(core("dynamics"))?, snaps)
        }
    };
    let t_fig: Vec<f64> = traj.times.iter().map(|t| t / FIGURE_TIME_UNIT).collect();
    let csv = csv_columns(
        &["t", "r_c", "norm", "spread", "t_fig"],
        &[&traj.times, &traj.r_c, &traj.dirac_norms, &traj.spread, &t_fig],
    );
    let summary = json!({
        "omega": omega,
        "period": 2.0 * std::f64::consts::PI / omega,
        "method": traj.method,
        "max_norm_drift": traj.max_norm_drift(),
        "peak_to_peak": traj.peak_to_peak(),
        "figure_time_unit": FIGURE_TIME_UNIT,
    });
    write_csv_with_sidecar(&a.out, &csv, provenance("evolve", a), summary)?;
    if let Some(path) = &a.profile_out {
        write_profile_matrix(path, &snaps)?;
    }
    println!(
        "{} snapshots | r_c {} -> {} | max norm drift {}",
        traj.len(),
        fmt_f64(traj.r_c[0]),
        fmt_f64(*traj.r_c.last().unwrap()),
        fmt_f64(traj.max_norm_drift())
    );
    Ok(())
}

fn write_profile_matrix(path: &Path, snaps: &[StateVector]) -> Result<(), CliError> {
    let dim = snaps[0].amplitudes.len();
    let mut headers = vec!["t".to_string()];
    headers.extend((1..=dim).map(|l| format!("l_{l}")));
    let refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = snaps
        .iter()
        .map(|s| std::iter::once(s.provenance.time).chain(dirac_profile(s)).collect())
        .collect();
    write_atomic(path, &csv_table(&refs, &rows))
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| CliError::Io(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let ti = col("t").ok_or_else(|| CliError::Usage(format!("{}: missing column t", path.display())))?;
    let ri = col("r_c").ok_or_else(|| CliError::Usage(format!("{}: missing column r_c", path.display())))?;
    let ni = col("norm");
    let (mut times, mut rc, mut norms) = (Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Io(e.to_string()))?;
        let num = |j: usize| -> Result<f64, CliError> {
            rec.get(j)
                .and_then(|x| x.trim().parse().ok())
                .ok_or_else(|| CliError::Usage(format!("{}: row {} column {} is not a number", path.display(), i + 2, j + 1)))
        };
        times.push(num(ti)?);
        rc.push(num(ri)?);
        norms.push(match ni {
            Some(j) => num(j)?,
            None => 1.0,
        });
    }
    let n = times.len();
    Ok(Trajectory {
        times,
        r_c: rc,
        dirac_norms: norms,
        spread: vec![f64::NAN; n],
        method: TrajectoryMethod::ExactPropagation,
    })
}

pub fn fit(a: &FitArgs) -> Result<(), CliError> {
    let traj = read_trajectory(&a.input)?;
    let f = fit_trajectory(&traj, a.omega).map_err(core("dynamics"))?;
    write_json(&a.out, &json!({"provenance": provenance("fit", a), "fit": f}))?;
    println!(
        "amplitude {} | frequency {} | shape {}",
        fmt_f64(f.amplitude),
        fmt_f64(f.frequency),
        fmt_f64(f.shape_metric)
    );
    Ok(())
}
