use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "ptssh", version, about = "PT-symmetric SSH chain simulator")]
pub struct Cli {
    /// Flat key=value file supplying option defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for sweeps and maps (default: available parallelism).
    #[arg(long, global = true, env = "PTSSH_JOBS")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact spectrum and PT-phase classification.
    Spectrum(SpectrumArgs),
    /// Phase classification over a range of gain/loss strengths.
    PhaseSweep(PhaseSweepArgs),
    /// Commutator Gram reports of the analytic mode basis.
    Modes(ModesArgs),
    /// Dirac probability profile of a coherent-like state.
    Profile(ProfileArgs),
    /// Centroid over a grid of coherent amplitudes and phases.
    PhaseMap(PhaseMapArgs),
    /// Time evolution and centroid trajectory.
    Evolve(EvolveArgs),
    /// Fourier fit of a trajectory CSV.
    Fit(FitArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChainArgs {
    /// Number of unit cells N (chain has 2N sites).
    #[arg(long, env = "PTSSH_CELLS")]
    pub cells: usize,
    /// Dimerization δ, |δ| < 1.
    #[arg(long, env = "PTSSH_DELTA", allow_hyphen_values = true)]
    pub delta: f64,
    /// Gain/loss strength γ ≥ 0.
    #[arg(long, env = "PTSSH_GAMMA")]
    pub gamma: f64,
    /// Overall hopping scale J.
    #[arg(long, env = "PTSSH_SCALE", default_value_t = 1.0)]
    pub scale: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// |Im E| below which a level counts as real.
    #[arg(long, env = "PTSSH_REALNESS_TOL", default_value_t = 1e-8)]
    pub realness_tol: f64,
    /// Conjugate-pairing tolerance.
    #[arg(long, env = "PTSSH_PAIRING_TOL", default_value_t = 1e-6)]
    pub pairing_tol: f64,
    /// Near-zero threshold (default: three mean level spacings).
    #[arg(long, env = "PTSSH_GAP_TOL")]
    pub gap_tol: Option<f64>,
    /// Eigenvalue CSV.
    #[arg(long, env = "PTSSH_OUT", default_value = "spectrum.csv")]
    pub out: PathBuf,
    /// Also write the Hamiltonian matrix as CSV.
    #[arg(long, env = "PTSSH_MATRIX_OUT")]
    pub matrix_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PhaseSweepArgs {
    #[arg(long, env = "PTSSH_CELLS")]
    pub cells: usize,
    #[arg(long, env = "PTSSH_DELTA", allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long, env = "PTSSH_SCALE", default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, env = "PTSSH_GAMMA_FROM")]
    pub gamma_from: f64,
    #[arg(long, env = "PTSSH_GAMMA_TO")]
    pub gamma_to: f64,
    /// Number of γ values, endpoints included.
    #[arg(long, env = "PTSSH_STEPS")]
    pub steps: usize,
    #[arg(long, env = "PTSSH_REALNESS_TOL", default_value_t = 1e-8)]
    pub realness_tol: f64,
    #[arg(long, env = "PTSSH_PAIRING_TOL", default_value_t = 1e-6)]
    pub pairing_tol: f64,
    #[arg(long, env = "PTSSH_GAP_TOL")]
    pub gap_tol: Option<f64>,
    #[arg(long, env = "PTSSH_OUT", default_value = "phase_sweep.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModesArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// JSON report of all Gram relations.
    #[arg(long, env = "PTSSH_REPORT", default_value = "grams.json")]
    pub report: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
pub enum BranchArg {
    /// Closed-form standing waves.
    Analytic,
    /// Exact eigenvectors of the finite chain.
    Exact,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoherentArgs {
    /// |α| (required except for random initial states).
    #[arg(long, env = "PTSSH_ALPHA_MAG")]
    pub alpha_mag: Option<f64>,
    /// arg α in radians.
    #[arg(long, env = "PTSSH_ALPHA_PHASE", default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha_phase: f64,
    /// Highest mode kept (default min(N-1, ⌈|α|²+8|α|+10⌉)).
    #[arg(long, env = "PTSSH_CUTOFF")]
    pub cutoff: Option<usize>,
    /// Largest discarded Poisson weight.
    #[arg(long, env = "PTSSH_TAIL_TOL", default_value_t = ptssh::coherent::DEFAULT_TAIL_TOLERANCE)]
    pub tail_tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[command(flatten)]
    pub coherent: CoherentArgs,
    #[arg(long, env = "PTSSH_BRANCH", value_enum, default_value_t = BranchArg::Analytic)]
    pub branch: BranchArg,
    #[arg(long, env = "PTSSH_OUT", default_value = "profile.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PhaseMapArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// |α| values: `start:stop:count` or a comma list.
    #[arg(long, env = "PTSSH_MAG_GRID")]
    pub mag_grid: String,
    /// arg α values in radians: `start:stop:count` or a comma list.
    #[arg(long, env = "PTSSH_PHASE_GRID", allow_hyphen_values = true)]
    pub phase_grid: String,
    #[arg(long, env = "PTSSH_BRANCH", value_enum, default_value_t = BranchArg::Analytic)]
    pub branch: BranchArg,
    #[arg(long, env = "PTSSH_OUT", default_value = "phase_map.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
pub enum MethodArg {
    /// Phase rotation α -> α e^{-iωt}.
    Analytic,
    /// Numerical propagation with the exact Hamiltonian.
    Exact,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
pub enum PropagatorArg {
    Auto,
    Rk4,
    Eigen,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
pub enum InitialArg {
    /// Coherent-like state from the positive branch.
    Coherent,
    /// Seeded random unit vector (broken-phase controls).
    Random,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[command(flatten)]
    pub coherent: CoherentArgs,
    /// Final time in units of 1/J.
    #[arg(long, env = "PTSSH_T_FINAL")]
    pub t_final: f64,
    /// Number of snapshots on [0, t_final].
    #[arg(long, env = "PTSSH_SAMPLES", default_value_t = 401)]
    pub samples: usize,
    /// RK4 step (default 0.02/‖H‖, at most 0.05/‖H‖).
    #[arg(long, env = "PTSSH_DT")]
    pub dt: Option<f64>,
    #[arg(long, env = "PTSSH_METHOD", value_enum, default_value_t = MethodArg::Exact)]
    pub method: MethodArg,
    #[arg(long, env = "PTSSH_PROPAGATOR", value_enum, default_value_t = PropagatorArg::Auto)]
    pub propagator: PropagatorArg,
    /// Positive branch used to build the initial state (exact method only;
    /// the analytic method always uses the closed-form branch).
    #[arg(long, env = "PTSSH_BRANCH", value_enum, default_value_t = BranchArg::Exact)]
    pub branch: BranchArg,
    #[arg(long, env = "PTSSH_INITIAL", value_enum, default_value_t = InitialArg::Coherent)]
    pub initial: InitialArg,
    /// Seed for randomized initial states.
    #[arg(long, env = "PTSSH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "PTSSH_OUT", default_value = "trajectory.csv")]
    pub out: PathBuf,
    /// Optional `t × l` Dirac-profile matrix.
    #[arg(long, env = "PTSSH_PROFILE_OUT")]
    pub profile_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// Trajectory CSV with `t` and `r_c` columns.
    #[arg(long, env = "PTSSH_INPUT")]
    pub input: PathBuf,
    /// Fundamental frequency; estimated from the data when absent.
    #[arg(long, env = "PTSSH_OMEGA")]
    pub omega: Option<f64>,
    #[arg(long, env = "PTSSH_OUT", default_value = "fit.json")]
    pub out: PathBuf,
}
