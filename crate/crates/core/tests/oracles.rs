//! Independent reference computations checked against the library.

use std::f64::consts::PI;

use proptest::prelude::*;
use ptssh::coherent::{
    center_of_mass, coherent_state, expansion_coefficients, mean_occupation, CoherentSpec,
    PositiveBranch,
};
use ptssh::dynamics::{analytic_trajectory, exact_trajectory, triangle_prediction, uniform_times, EvolveOptions};
use ptssh::lattice::{build_hamiltonian, pt_defect, ChainParams};
use ptssh::modes::{aligned_overlap, build_mode_basis};
use ptssh::spectral::{exact_eigen, linearized_frequency, pt_transition_gamma};
use ptssh::{CVector, C64};

/// Eigenvalues of the real symmetric tridiagonal chain with zero diagonal and
/// alternating couplings `1+δ`, `1-δ`, by Sturm-sequence bisection.
fn hopping_levels(n_cells: usize, delta: f64) -> Vec<f64> {
    let dim = 2 * n_cells;
    let off: Vec<f64> = (0..dim - 1)
        .map(|i| if i % 2 == 0 { 1.0 + delta } else { 1.0 - delta })
        .collect();
    let count_below = |x: f64| {
        let mut count = 0;
        let mut q = -x;
        if q < 0.0 {
            count += 1;
        }
        for b in &off {
            let prev = if q == 0.0 { 1e-300 } else { q };
            q = -x - b * b / prev;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let bound = 2.0 + 1e-9;
    (0..dim)
        .map(|k| {
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// `E = ±√(λ² - γ²)` since the gain/loss term anticommutes with the hopping.
fn oracle_spectrum(n_cells: usize, delta: f64, gamma: f64) -> Vec<C64> {
    let mut out: Vec<C64> = hopping_levels(n_cells, delta)
        .iter()
        .map(|&l| {
            let r = C64::new(l * l - gamma * gamma, 0.0).sqrt();
            if l >= 0.0 { r } else { -r }
        })
        .collect();
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    out
}

fn matched_distance(a: &[C64], b: &[C64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

#[test]
fn exact_spectrum_matches_bisection_oracle() {
    for &(n, d, g) in &[(20, 0.5, 0.3), (30, 0.9, 1.0), (25, 0.5, 1.2), (40, -0.3, 0.2)] {
        let p = ChainParams::new(n, d, g).unwrap();
        let exact = exact_eigen(&build_hamiltonian(&p).unwrap()).unwrap();
        let oracle = oracle_spectrum(n, d, g);
        let dist = matched_distance(&exact.values, &oracle);
        assert!(dist < 1e-9, "(N={n}, δ={d}, γ={g}) off by {dist:e}");
        assert!(exact.max_residual < 1e-10);
    }
}

#[test]
fn transition_gamma_tracks_oracle_gap() {
    let n = 60;
    let d = 0.5;
    let lmin = hopping_levels(n, d).iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
    let g = pt_transition_gamma(n, d, 0.5, 1.5, 1e-6).unwrap();
    assert!((g - lmin).abs() < 1e-5, "{g} vs {lmin}");
    assert!((g - 2.0 * d).abs() < 0.01);
}

#[test]
fn analytic_rows_overlap_exact_vectors() {
    for &g in &[1.0, 1.8] {
        let p = ChainParams::new(80, 0.9, g).unwrap();
        let basis = build_mode_basis(&p).unwrap();
        let ex = exact_eigen(&build_hamiltonian(&p).unwrap()).unwrap();
        let mut pos: Vec<usize> = (0..ex.values.len()).filter(|&i| ex.values[i].re > 0.0).collect();
        pos.sort_by(|&a, &b| ex.values[a].re.total_cmp(&ex.values[b].re));
        for n in 0..10 {
            let a: CVector = basis.psi_plus.row(n).transpose();
            let b: CVector = ex.right.column(pos[n]).into_owned();
            let (ov, _, _) = aligned_overlap(&a, &b);
            assert!(ov >= 0.99, "γ={g}, n={n}: {ov}");
        }
    }
}

/// `Σ_l l·2Re(ψ₀(l)ψ₁(l))/N` from the closed-form standing waves at the EP,
/// i.e. the first-order centroid shift per unit `N|α|`.
fn first_order_shift(n_cells: usize) -> f64 {
    let s = |k: f64, j: usize| (-1f64).powi(j as i32) * (k * j as f64).sin() / ((n_cells + 1) as f64).sqrt();
    let k0 = PI / (n_cells + 1) as f64;
    let k1 = 2.0 * k0;
    let p = ChainParams::new(n_cells, 0.9, 1.8).unwrap();
    let eps1 = ptssh::spectral::analytic_dispersion(&p, 1).unwrap();
    let phi1 = eps1.phi_k.re;
    let mut acc = 0.0;
    for j in 1..=n_cells {
        // A site at l = 2j-1, B site at l = 2j; ψ₀ carries e^{-iπ/2} on B
        let a = s(k0, j) * s(k1, j);
        let b = (C64::new(0.0, 1.0) * s(k0, j) * s(k1, j) * C64::from_polar(1.0, -phi1)).re;
        acc += (2 * j - 1) as f64 * 2.0 * a + (2 * j) as f64 * 2.0 * b;
    }
    -acc / n_cells as f64
}

#[test]
fn small_alpha_centroid_matches_first_order_oracle() {
    let n = 500;
    let p = ChainParams::new(n, 0.9, 1.8).unwrap();
    let branch = PositiveBranch::analytic(&build_mode_basis(&p).unwrap());
    let a = 0.01;
    let rc0 = center_of_mass(&coherent_state(&CoherentSpec::new(C64::new(0.0, 0.0)), &branch).unwrap()).unwrap();
    let rc = center_of_mass(&coherent_state(&CoherentSpec::new(C64::new(a, 0.0)), &branch).unwrap()).unwrap();
    let shift = (rc0 - rc) / (n as f64 * a);
    let oracle = first_order_shift(n);
    assert!((shift / oracle - 1.0).abs() < 0.02, "{shift} vs {oracle}");
    assert!((oracle / (64.0 / (9.0 * PI * PI)) - 1.0).abs() < 0.01, "{oracle}");
}

#[test]
fn centroid_example_at_tenth_amplitude() {
    let n = 500;
    let p = ChainParams::new(n, 0.9, 1.8).unwrap();
    let branch = PositiveBranch::analytic(&build_mode_basis(&p).unwrap());
    let state = coherent_state(&CoherentSpec::new(C64::new(0.1, 0.0)), &branch).unwrap();
    let brute: f64 = state.amplitudes.iter().enumerate().map(|(i, z)| (i + 1) as f64 * z.norm_sqr()).sum::<f64>()
        / state.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>();
    assert!((brute - center_of_mass(&state).unwrap()).abs() < 1e-9);
    assert!((brute - 464.0).abs() < 1.5, "{brute}");
}

#[test]
fn reflection_about_center() {
    let n = 200;
    let p = ChainParams::new(n, 0.9, 1.8).unwrap();
    let branch = PositiveBranch::analytic(&build_mode_basis(&p).unwrap());
    for &a in &[0.05, 0.2, 0.5] {
        let r0 = center_of_mass(&coherent_state(&CoherentSpec::from_polar(a, 0.0), &branch).unwrap()).unwrap();
        let rpi = center_of_mass(&coherent_state(&CoherentSpec::from_polar(a, PI), &branch).unwrap()).unwrap();
        assert!(((r0 + rpi) / (2.0 * n as f64 + 1.0) - 1.0).abs() < 0.01, "{a}");
    }
}

#[test]
fn occupation_converges_with_cutoff() {
    let p = ChainParams::new(200, 0.9, 1.8).unwrap();
    let branch = PositiveBranch::analytic(&build_mode_basis(&p).unwrap());
    let a = 2.0f64;
    let mut errs = Vec::new();
    for m in [2, 4, 8] {
        let spec = CoherentSpec::new(C64::new(a, 0.0))
            .with_cutoff(m * 4)
            .with_tail_tolerance(1.0);
        errs.push((mean_occupation(&spec, &branch).unwrap() - a * a).abs());
    }
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[2] < 1e-10);
}

#[test]
fn analytic_and_exact_trajectories_agree() {
    let p = ChainParams::new(150, 0.9, 1.8).unwrap();
    let h = build_hamiltonian(&p).unwrap();
    let basis = build_mode_basis(&p).unwrap();
    let analytic = PositiveBranch::analytic(&basis);
    let exact = PositiveBranch::exact(&basis, &exact_eigen(&h).unwrap()).unwrap();
    let times = uniform_times(2.0 * PI / linearized_frequency(&p), 201).unwrap();
    for &a in &[0.5, 1.0, 3.0] {
        let spec = CoherentSpec::new(C64::new(a, 0.0));
        let ta = analytic_trajectory(&spec, &analytic, &times).unwrap();
        let te = exact_trajectory(&h, &coherent_state(&spec, &exact).unwrap(), &times, EvolveOptions::default()).unwrap();
        let diff = ta.r_c.iter().zip(&te.r_c).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff <= 0.05 * 300.0, "α={a}: {diff}");
        assert!(te.max_norm_drift() < 0.01);
        // exact propagation returns close to its start after one period
        assert!((te.r_c[0] - te.r_c[200]).abs() <= 0.02 * 300.0, "α={a}");
    }
}

#[test]
fn triangle_matches_piecewise_formula() {
    let p = ChainParams::new(150, 0.9, 1.8).unwrap();
    let w = linearized_frequency(&p);
    for i in 0..50 {
        let t = i as f64 * 0.37 / w;
        let x = w * t / PI;
        let frac = x.rem_euclid(2.0);
        let expect = 300.0 * if frac <= 1.0 { frac } else { 2.0 - frac };
        assert!((triangle_prediction(&p, t) - expect).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hamiltonian_is_pt_symmetric(n in 2usize..30, d in -0.95f64..0.95, g in 0.0f64..2.5) {
        let h = build_hamiltonian(&ChainParams::new(n, d, g).unwrap()).unwrap();
        prop_assert_eq!(pt_defect(h.matrix()).unwrap(), 0.0);
    }

    #[test]
    fn eigenvalues_come_in_conjugate_and_sign_pairs(n in 2usize..12, d in -0.9f64..0.9, g in 0.0f64..2.0) {
        let values = exact_eigen(&build_hamiltonian(&ChainParams::new(n, d, g).unwrap()).unwrap()).unwrap().values;
        let conj: Vec<C64> = values.iter().map(|z| z.conj()).collect();
        let neg: Vec<C64> = values.iter().map(|z| -z).collect();
        prop_assert!(matched_distance(&values, &conj) < 1e-8);
        prop_assert!(matched_distance(&values, &neg) < 1e-8);
    }

    #[test]
    fn expansion_coefficients_are_dirac_projections(mag in 0.0f64..2.5, phase in -PI..PI) {
        let p = ChainParams::new(40, 0.9, 1.8).unwrap();
        let branch = PositiveBranch::analytic(&build_mode_basis(&p).unwrap());
        let spec = CoherentSpec::from_polar(mag, phase);
        let state = coherent_state(&spec, &branch).unwrap();
        let proj = branch.project(&state.amplitudes);
        let coeffs = expansion_coefficients(&spec, 40).unwrap();
        for (n, c) in coeffs.iter().enumerate() {
            prop_assert!((proj[n] - c).norm() < 1e-12);
        }
    }

    #[test]
    fn centroid_is_2pi_periodic_in_phase(mag in 0.0f64..2.0, phase in -PI..PI) {
        let p = ChainParams::new(40, 0.9, 1.8).unwrap();
        let branch = PositiveBranch::analytic(&build_mode_basis(&p).unwrap());
        let a = center_of_mass(&coherent_state(&CoherentSpec::from_polar(mag, phase), &branch).unwrap()).unwrap();
        let b = center_of_mass(&coherent_state(&CoherentSpec::from_polar(mag, phase + 2.0 * PI), &branch).unwrap()).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!((1.0..=80.0).contains(&a));
    }

    #[test]
    fn analytic_state_keeps_its_norm(mag in 0.0f64..2.0, t in 0.0f64..5000.0) {
        let p = ChainParams::new(40, 0.9, 1.8).unwrap();
        let branch = PositiveBranch::analytic(&build_mode_basis(&p).unwrap());
        let spec = CoherentSpec::new(C64::new(mag, 0.0));
        let s0 = ptssh::dynamics::evolve_analytic(&spec, &branch, 0.0).unwrap();
        let st = ptssh::dynamics::evolve_analytic(&spec, &branch, t).unwrap();
        prop_assert!((s0.dirac_norm - st.dirac_norm).abs() < 1e-12);
    }
}
