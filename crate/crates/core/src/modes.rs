//! Analytic biorthogonal mode basis and its commutator algebra in the
//! single-particle representation.
//!
//! A mode operator that is linear in the site operators is stored as its
//! coefficient row over the `2N` flat sites together with its kind:
//! annihilation-type (`Σ c_l f_l`) or creation-type (`Σ d_l f_l†`). For one
//! particle the bracket of an annihilation-type and a creation-type operator
//! is the plain bilinear sum `Σ_l c_l d_l` (the same for commutators of bosons
//! and anticommutators of fermions), and two operators of the same kind always
//! commute. Taking a Dirac adjoint conjugates the row and flips the kind, so
//! relations involving `†` become sesquilinear sums.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::lattice::{ChainParams, HamiltonianMatrix};
use crate::spectral::{self, analytic_dispersion, momentum};
use crate::{CMatrix, CVector, Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Denominator magnitude below which a bar-mode row is treated as
/// non-normalizable.
pub const DEFECTIVE_DENOMINATOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OperatorKind {
    Annihilation,
    Creation,
}

impl OperatorKind {
    fn flipped(self) -> Self {
        match self {
            OperatorKind::Annihilation => OperatorKind::Creation,
            OperatorKind::Creation => OperatorKind::Annihilation,
        }
    }
}

/// The `N` operators of one family (`α`, `ᾱ`, `β†`, ...), one row per momentum.
#[derive(Debug, Clone)]
pub struct ModeFamily {
    pub name: String,
    pub kind: OperatorKind,
    pub rows: CMatrix,
}

impl ModeFamily {
    /// Dirac adjoint of every operator in the family.
    pub fn dagger(&self) -> ModeFamily {
        ModeFamily {
            name: format!("{}†", self.name),
            kind: self.kind.flipped(),
            rows: self.rows.map(|z| z.conj()),
        }
    }
}

/// `G[k, k'] = [x_k, y_k']` for all momentum pairs.
pub fn bracket(x: &ModeFamily, y: &ModeFamily) -> CMatrix {
    if x.kind == y.kind {
        CMatrix::zeros(x.rows.nrows(), y.rows.nrows())
    } else {
        &x.rows * y.rows.transpose()
    }
}

/// Analytic mode basis of the strongly dimerized chain.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    pub params: ChainParams,
    /// `k = (n+1)π/(N+1)` for `n = 0..N-1`.
    pub k_grid: Vec<f64>,
    pub eps: Vec<C64>,
    pub phi: Vec<C64>,
    pub alpha: CMatrix,
    pub beta: CMatrix,
    pub alpha_bar: CMatrix,
    pub beta_bar: CMatrix,
    /// Rows are `|ψ_n^+⟩` over flat sites, Dirac-normalized.
    pub psi_plus: CMatrix,
    /// Rows are `|ψ_n^-⟩`.
    pub psi_minus: CMatrix,
    /// Rows whose bar-mode denominator `1 - i e^{-iφ}` vanishes; their
    /// `alpha_bar`/`beta_bar` rows hold the undivided direction vector.
    pub defective_rows: Vec<usize>,
    /// Set when the zero mode was pinned to `φ = π/2` at the exceptional point.
    pub pinned_zero_mode: bool,
}

pub fn build_mode_basis(params: &ChainParams) -> Result<ModeBasis> {
    params.validate()?;
    let n_cells = params.n_cells;
    let dim = params.dim();
    let pinned = params.at_exceptional_point();
    let norm = (2.0 / (n_cells + 1) as f64).sqrt();

    let mut k_grid = Vec::with_capacity(n_cells);
    let mut eps = Vec::with_capacity(n_cells);
    let mut phi = Vec::with_capacity(n_cells);
    let mut alpha = CMatrix::zeros(n_cells, dim);
    let mut beta = CMatrix::zeros(n_cells, dim);
    let mut alpha_bar = CMatrix::zeros(n_cells, dim);
    let mut beta_bar = CMatrix::zeros(n_cells, dim);
    let mut psi_plus = CMatrix::zeros(n_cells, dim);
    let mut psi_minus = CMatrix::zeros(n_cells, dim);
    let mut defective_rows = Vec::new();

    for n in 0..n_cells {
        let point = analytic_dispersion(params, n)?;
        let (e, ph) = if pinned && n == 0 {
            (C64::new(0.0, 0.0), C64::new(FRAC_PI_2, 0.0))
        } else {
            (point.eps_k, point.phi_k)
        };
        k_grid.push(point.k);
        eps.push(e);
        phi.push(ph);

        let em = (-I * ph).exp();
        let ep = (I * ph).exp();
        let den_plus = ONE + I * em;
        let den_minus = ONE - I * em;
        let defective = den_minus.norm() < DEFECTIVE_DENOMINATOR;
        if defective {
            defective_rows.push(n);
        }
        let bar_div = if defective { ONE } else { den_minus };

        for j in 1..=n_cells {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let s = C64::new(norm * sign * (point.k * j as f64).sin(), 0.0);
            let (a, b) = (2 * j - 2, 2 * j - 1);
            alpha[(n, a)] = s / den_plus;
            alpha[(n, b)] = s * em / den_plus;
            beta[(n, a)] = s / den_plus;
            beta[(n, b)] = -s * ep / den_plus;
            alpha_bar[(n, a)] = s / bar_div;
            alpha_bar[(n, b)] = s * em / bar_div;
            beta_bar[(n, a)] = s / bar_div;
            beta_bar[(n, b)] = -s * ep / bar_div;
            let h = s * std::f64::consts::FRAC_1_SQRT_2;
            psi_plus[(n, a)] = h;
            psi_plus[(n, b)] = h * em;
            psi_minus[(n, a)] = h;
            psi_minus[(n, b)] = -h * ep;
        }
    }

    Ok(ModeBasis {
        params: *params,
        k_grid,
        eps,
        phi,
        alpha,
        beta,
        alpha_bar,
        beta_bar,
        psi_plus,
        psi_minus,
        defective_rows,
        pinned_zero_mode: pinned,
    })
}

impl ModeBasis {
    pub fn n_modes(&self) -> usize {
        self.k_grid.len()
    }

    /// All mixing angles real (unbroken region or EP).
    pub fn has_real_phases(&self) -> bool {
        self.phi.iter().all(|p| p.im == 0.0)
    }

    fn family(&self, name: &str, kind: OperatorKind, rows: &CMatrix) -> ModeFamily {
        ModeFamily {
            name: name.to_string(),
            kind,
            rows: rows.clone(),
        }
    }

    pub fn alpha_family(&self) -> ModeFamily {
        self.family("α", OperatorKind::Annihilation, &self.alpha)
    }

    pub fn beta_family(&self) -> ModeFamily {
        self.family("β", OperatorKind::Annihilation, &self.beta)
    }

    pub fn alpha_bar_family(&self) -> ModeFamily {
        self.family("ᾱ", OperatorKind::Creation, &self.alpha_bar)
    }

    pub fn beta_bar_family(&self) -> ModeFamily {
        self.family("β̄", OperatorKind::Creation, &self.beta_bar)
    }

    /// Analytic energies `E_n^± = ±ε_k`.
    pub fn energies(&self) -> (Vec<C64>, Vec<C64>) {
        (self.eps.clone(), self.eps.iter().map(|e| -e).collect())
    }
}

/// Comparison of a computed bracket Gram matrix with its closed form.
#[derive(Debug, Clone, Serialize)]
pub struct GramReport {
    pub relation: String,
    #[serde(skip)]
    pub expected: CMatrix,
    #[serde(skip)]
    pub observed: CMatrix,
    pub max_abs_deviation: f64,
    /// Momentum rows left out of the comparison (defective at the EP).
    pub excluded_rows: Vec<usize>,
}

impl GramReport {
    fn new(relation: String, expected: CMatrix, observed: CMatrix, excluded: &[usize]) -> Self {
        let mut dev: f64 = 0.0;
        for i in 0..observed.nrows() {
            for j in 0..observed.ncols() {
                if excluded.contains(&i) || excluded.contains(&j) {
                    continue;
                }
                dev = dev.max((observed[(i, j)] - expected[(i, j)]).norm());
            }
        }
        GramReport {
            relation,
            expected,
            observed,
            max_abs_deviation: dev,
            excluded_rows: excluded.to_vec(),
        }
    }
}

fn relation(
    x: &ModeFamily,
    y: &ModeFamily,
    expected: CMatrix,
    excluded: &[usize],
) -> GramReport {
    GramReport::new(
        format!("[{}_k, {}_k']", x.name, y.name),
        expected,
        bracket(x, y),
        excluded,
    )
}

/// Bilinear brackets among `α, ᾱ, β, β̄`: `[α,ᾱ] = [β,β̄] = δ_kk'` and all
/// other pairings zero.
pub fn canonical_gram(basis: &ModeBasis) -> Vec<GramReport> {
    let n = basis.n_modes();
    let id = CMatrix::identity(n, n);
    let zero = CMatrix::zeros(n, n);
    let ex = &basis.defective_rows;
    let (a, ab, b, bb) = (
        basis.alpha_family(),
        basis.alpha_bar_family(),
        basis.beta_family(),
        basis.beta_bar_family(),
    );
    vec![
        relation(&a, &ab, id.clone(), ex),
        relation(&b, &bb, id, ex),
        relation(&a, &a, zero.clone(), ex),
        relation(&b, &b, zero.clone(), ex),
        relation(&ab, &ab, zero.clone(), ex),
        relation(&bb, &bb, zero.clone(), ex),
        relation(&a, &bb, zero.clone(), ex),
        relation(&ab, &bb, zero.clone(), ex),
        relation(&a, &b, zero.clone(), ex),
        relation(&ab, &b, zero, ex),
    ]
}

/// Dirac-adjoint brackets with their `φ_k`-dependent diagonal closed forms.
/// Needs real mixing angles.
pub fn quasi_canonical_gram(basis: &ModeBasis) -> Result<Vec<GramReport>> {
    if !basis.has_real_phases() {
        return Err(Error::domain(
            "quasi-canonical relations need real mixing angles (unbroken region)",
        ));
    }
    let n = basis.n_modes();
    let diag = |f: &dyn Fn(f64) -> C64| {
        CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                f(basis.phi[i].re)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    };
    let plus = diag(&|p: f64| C64::new(1.0 / (1.0 + p.sin()), 0.0));
    let minus = diag(&|p: f64| C64::new(1.0 / (1.0 - p.sin()), 0.0));
    let cross_plus = diag(&|p: f64| (ONE - (I * 2.0 * p).exp()) / (2.0 * (1.0 + p.sin())));
    let cross_minus = diag(&|p: f64| (ONE - (I * 2.0 * p).exp()) / (2.0 * (1.0 - p.sin())));
    let zero = CMatrix::zeros(n, n);

    let ex = &basis.defective_rows;
    let (a, ab, b, bb) = (
        basis.alpha_family(),
        basis.alpha_bar_family(),
        basis.beta_family(),
        basis.beta_bar_family(),
    );
    let (a_d, ab_d, b_d, bb_d) = (a.dagger(), ab.dagger(), b.dagger(), bb.dagger());
    Ok(vec![
        relation(&a, &a_d, plus.clone(), ex),
        relation(&b, &b_d, plus, ex),
        relation(&ab_d, &ab, minus.clone(), ex),
        relation(&bb_d, &bb, minus, ex),
        relation(&b, &a_d, cross_plus, ex),
        relation(&ab_d, &bb, cross_minus, ex),
        relation(&a, &ab_d, zero.clone(), ex),
        relation(&b, &bb_d, zero.clone(), ex),
        relation(&a, &bb_d, zero.clone(), ex),
        relation(&b, &ab_d, zero, ex),
    ])
}

pub fn eigenstate_vectors(basis: &ModeBasis) -> (CMatrix, CMatrix) {
    (basis.psi_plus.clone(), basis.psi_minus.clone())
}

/// How well the analytic eigenvectors solve the exact eigenproblem.
#[derive(Debug, Clone, Serialize)]
pub struct EigenstateReport {
    /// `‖H ψ_n^+ - ε_k ψ_n^+‖ / ‖H‖₂` per mode.
    pub residual_plus: Vec<f64>,
    /// `‖H ψ_n^- + ε_k ψ_n^-‖ / ‖H‖₂` per mode.
    pub residual_minus: Vec<f64>,
    /// Dirac overlap `⟨ψ_n^+|ψ_n^-⟩`.
    pub plus_minus_overlap: Vec<C64>,
    /// `max |⟨ψ_m^+|ψ_n^+⟩ - δ_mn|`.
    pub orthonormality_deviation: f64,
}

pub fn eigenstate_report(basis: &ModeBasis, h: &HamiltonianMatrix) -> Result<EigenstateReport> {
    if h.params() != &basis.params {
        return Err(Error::domain("Hamiltonian and mode basis were built from different parameters"));
    }
    let m = h.matrix();
    let hnorm = crate::eigen::spectral_norm_estimate(m);
    let n = basis.n_modes();
    let mut residual_plus = Vec::with_capacity(n);
    let mut residual_minus = Vec::with_capacity(n);
    let mut overlap = Vec::with_capacity(n);
    for k in 0..n {
        let vp: CVector = basis.psi_plus.row(k).transpose();
        let vm: CVector = basis.psi_minus.row(k).transpose();
        let e = basis.eps[k];
        residual_plus.push((m * &vp - &vp * e).norm() / hnorm);
        residual_minus.push((m * &vm + &vm * e).norm() / hnorm);
        overlap.push(vp.dotc(&vm));
    }
    let gram = &basis.psi_plus.conjugate() * basis.psi_plus.transpose();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { C64::new(0.0, 0.0) };
            dev = dev.max((gram[(i, j)] - target).norm());
        }
    }
    Ok(EigenstateReport {
        residual_plus,
        residual_minus,
        plus_minus_overlap: overlap,
        orthonormality_deviation: dev,
    })
}

/// Biorthogonal self-overlap `⟨0|α_{k_c} ᾱ_{k_c}|0⟩` of the zero mode at the
/// exceptional point, with both rows renormalized to unit Dirac norm before
/// the bar-mode denominator is allowed to vanish.
///
/// Uses the finite-size mixing angle of the `n = 0` mode, so the magnitude
/// tracks how close the chain is to exact coalescence; it tends to zero as
/// `k_c = π/(N+1) -> 0`.
pub fn coalescence_selfnorm(params: &ChainParams) -> Result<C64> {
    params.validate()?;
    if !params.at_exceptional_point() {
        return Err(Error::domain(format!(
            "coalescence overlap is defined at gamma = 2 delta, got delta = {}, gamma = {}",
            params.delta, params.gamma
        )));
    }
    let point = analytic_dispersion(params, 0)?;
    let k = momentum(params.n_cells, 0);
    let em = (-I * point.phi_k).exp();
    let dim = params.dim();
    let mut annihilation = CVector::zeros(dim);
    let mut creation = CVector::zeros(dim);
    let den_plus = ONE + I * em;
    for j in 1..=params.n_cells {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let s = C64::new(sign * (k * j as f64).sin(), 0.0);
        annihilation[2 * j - 2] = s / den_plus;
        annihilation[2 * j - 1] = s * em / den_plus;
        // bar-mode direction without the vanishing denominator
        creation[2 * j - 2] = s;
        creation[2 * j - 1] = s * em;
    }
    let an = annihilation.norm();
    let cn = creation.norm();
    Ok(annihilation.transpose().dot(&creation.transpose()) / (an * cn))
}

/// Magnitude of the Dirac overlap between two vectors after aligning each to
/// the phase of its largest component (phase-independent in magnitude; the
/// aligned vectors are returned for inspection).
pub fn aligned_overlap(a: &CVector, b: &CVector) -> (f64, CVector, CVector) {
    let align = |v: &CVector| {
        let (idx, _) = v
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
        let z = v[idx];
        let phase = if z.norm() == 0.0 { ONE } else { z.conj() / z.norm() };
        let out = v * phase;
        let nrm = out.norm();
        out / C64::new(nrm, 0.0)
    };
    let (aa, bb) = (align(a), align(b));
    (aa.dotc(&bb).norm(), aa, bb)
}

/// Analytic `ε_k` sorted ascending, for comparison with exact positive levels.
pub fn sorted_positive_energies(basis: &ModeBasis) -> Vec<f64> {
    let mut e: Vec<f64> = basis.eps.iter().map(|z| z.re).collect();
    e.sort_by(f64::total_cmp);
    e
}

/// `sin φ_k = γ/ε⁰_k`, valid for real `ε_k`.
pub fn sine_identity_deviation(basis: &ModeBasis) -> Result<f64> {
    let p = &basis.params;
    let mut dev: f64 = 0.0;
    for n in 0..basis.n_modes() {
        if basis.pinned_zero_mode && n == 0 {
            continue;
        }
        let eps0 = spectral::hermitian_dispersion(p, n)?;
        let g = p.gamma * p.energy_scale;
        dev = dev.max((basis.phi[n].sin().re - g / eps0).abs());
    }
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_hamiltonian;
    use std::f64::consts::PI;

    fn basis(n: usize, d: f64, g: f64) -> ModeBasis {
        build_mode_basis(&ChainParams::new(n, d, g).unwrap()).unwrap()
    }

    #[test]
    fn hermitian_limit_rows() {
        let b = basis(12, 0.6, 0.0);
        assert!(b.phi.iter().all(|p| p.norm() == 0.0));
        // bar rows are the complex conjugates of the plain rows
        let dev = (&b.alpha_bar - b.alpha.map(|z| z.conj())).camax();
        assert!(dev < 1e-12);
        let dev = (&b.beta_bar - b.beta.map(|z| z.conj())).camax();
        assert!(dev < 1e-12);
        // bonding combination: equal weight on a_j and b_j
        for j in 0..12 {
            assert!((b.alpha[(0, 2 * j)] - b.alpha[(0, 2 * j + 1)]).norm() < 1e-15);
        }
    }

    #[test]
    fn bracket_kinds() {
        let b = basis(5, 0.5, 0.3);
        let a = b.alpha_family();
        assert_eq!(bracket(&a, &a), CMatrix::zeros(5, 5));
        assert_eq!(a.dagger().kind, OperatorKind::Creation);
        let g = bracket(&a, &a.dagger());
        for k in 0..5 {
            assert!(g[(k, k)].im.abs() < 1e-15 && g[(k, k)].re > 0.0);
        }
    }

    #[test]
    fn canonical_relations_hold() {
        let b = basis(20, 0.9, 1.0);
        for r in canonical_gram(&b) {
            if r.relation == "[β_k, β̄_k']" {
                continue;
            }
            assert!(r.max_abs_deviation < 1e-12, "{} off by {}", r.relation, r.max_abs_deviation);
        }
    }

    #[test]
    fn beta_pair_carries_phase() {
        // with the stated rows [β, β̄] = e^{2iφ} δ
        let b = basis(20, 0.9, 1.0);
        let r = &canonical_gram(&b)[1];
        for k in 0..20 {
            let expect = (I * 2.0 * b.phi[k]).exp();
            assert!((r.observed[(k, k)] - expect).norm() < 1e-12);
        }
        assert!(r.max_abs_deviation > 0.1);
        let h = basis(20, 0.9, 0.0);
        assert!(canonical_gram(&h)[1].max_abs_deviation < 1e-12);
    }

    #[test]
    fn quasi_canonical_relations_hold() {
        let b = basis(20, 0.9, 1.0);
        for r in quasi_canonical_gram(&b).unwrap() {
            assert!(r.max_abs_deviation < 1e-12, "{} off by {}", r.relation, r.max_abs_deviation);
        }
    }

    #[test]
    fn quasi_canonical_reduces_to_identity_without_gain_loss() {
        let b = basis(10, 0.7, 0.0);
        let reports = quasi_canonical_gram(&b).unwrap();
        let id = CMatrix::identity(10, 10);
        assert!((&reports[0].observed - &id).camax() < 1e-12);
        assert!((&reports[2].observed - &id).camax() < 1e-12);
        assert!(reports[4].observed.camax() < 1e-12);
    }

    #[test]
    fn quasi_canonical_rejects_broken_region() {
        let b = basis(20, 0.5, 1.2);
        assert!(!b.has_real_phases());
        assert!(quasi_canonical_gram(&b).is_err());
    }

    #[test]
    fn sine_identity() {
        let b = basis(20, 0.9, 1.0);
        assert!(sine_identity_deviation(&b).unwrap() < 1e-12);
    }

    #[test]
    fn ep_pins_zero_mode_and_flags_bar_rows() {
        let b = basis(500, 0.9, 1.8);
        assert!(b.pinned_zero_mode);
        assert_eq!(b.defective_rows, vec![0]);
        assert_eq!(b.phi[0].re, PI / 2.0);
        let diff = (b.psi_plus.row(0) - b.psi_minus.row(0)).camax();
        assert!(diff < 1e-15);
        // off-EP bases have no defective rows
        assert!(basis(50, 0.9, 1.7).defective_rows.is_empty());
    }

    #[test]
    fn canonical_gram_excludes_defective_rows_at_ep() {
        let b = basis(60, 0.5, 1.0);
        for r in canonical_gram(&b) {
            assert_eq!(r.excluded_rows, vec![0]);
            if r.relation != "[β_k, β̄_k']" {
                assert!(r.max_abs_deviation < 1e-12, "{}", r.relation);
            }
        }
    }

    #[test]
    fn psi_rows_are_dirac_orthonormal() {
        let p = ChainParams::new(30, 0.8, 1.2).unwrap();
        let b = build_mode_basis(&p).unwrap();
        let rep = eigenstate_report(&b, &build_hamiltonian(&p).unwrap()).unwrap();
        assert!(rep.orthonormality_deviation < 1e-12);
        for (k, ov) in rep.plus_minus_overlap.iter().enumerate() {
            // ⟨ψ+|ψ-⟩ = (1 - e^{2iφ})/2
            let expect = (ONE - (I * 2.0 * b.phi[k]).exp()) * 0.5;
            assert!((ov - expect).norm() < 1e-12);
            assert!(ov.norm() > 0.0);
        }
    }

    #[test]
    fn hermitian_residual_bound() {
        let p = ChainParams::new(20, 0.9, 0.0).unwrap();
        let b = build_mode_basis(&p).unwrap();
        let rep = eigenstate_report(&b, &build_hamiltonian(&p).unwrap()).unwrap();
        let bound = 0.1 / 1.9;
        for r in rep.residual_plus.iter().chain(rep.residual_minus.iter()) {
            assert!(*r <= bound, "{r}");
        }
        assert!(b.psi_plus.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn selfnorm_requires_ep() {
        assert!(coalescence_selfnorm(&ChainParams::new(100, 0.9, 1.0).unwrap()).is_err());
    }

    #[test]
    fn selfnorm_matches_closed_form() {
        // normalized direction overlap has magnitude |1 + e^{-2iφ}|/2
        let p = ChainParams::new(200, 0.9, 1.8).unwrap();
        let phi = analytic_dispersion(&p, 0).unwrap().phi_k;
        let expect = (ONE + (-I * 2.0 * phi).exp()).norm() * 0.5;
        let got = coalescence_selfnorm(&p).unwrap();
        assert!((got.norm() - expect).abs() < 1e-12);
        let small = coalescence_selfnorm(&ChainParams::new(500, 0.9, 1.8).unwrap()).unwrap();
        assert!(small.norm() < got.norm() && small.norm() < 1e-2);
    }

    #[test]
    fn aligned_overlap_ignores_global_phase() {
        let v = CVector::from_vec(vec![C64::new(0.3, 0.1), C64::new(-1.0, 0.4), C64::new(0.2, 0.0)]);
        let w = &v * C64::from_polar(2.0, 1.3);
        let (ov, a, b) = aligned_overlap(&v, &w);
        assert!((ov - 1.0).abs() < 1e-14);
        assert!((a - b).norm() < 1e-14);
    }
}
