use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "qmarkov",
    version,
    about = "Stability analysis of finite-dimensional quantum Markov semigroups",
    long_about = "Stability analysis of finite-dimensional quantum Markov semigroups.\n\n\
        Every run writes report.json (plus any series files) to the output directory.\n\
        Exit status: 0 all checks hold, 1 a check fails, 2 a check is inconclusive under\n\
        --strict, 64 usage error, 65 malformed or invalid input, 70 numerical failure,\n\
        73 output cannot be written."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Directory receiving report.json and series files (created if missing).
    #[arg(long, global = true, env = "QMARKOV_OUT_DIR", default_value = ".")]
    pub out: PathBuf,

    /// Seed for every random draw (random initial states, probes).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Numerical tolerance of the checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,

    /// Where time series go: inline in the report (json) or as csv/svg files.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Exit with status 2 when a check is inconclusive.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Expm,
    Rk,
}

/// Hypothesis set for check-lasalle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Hypothesis {
    /// G(V) <= -W with W >= 0 (with --u: G(V) <= U - W).
    #[value(alias = "5")]
    BoundedGenerator,
    /// G(V) <= -W and G(W) <= 0.
    #[value(alias = "6")]
    MonotoneCompanion,
    /// G(V) = W and G(W) <= 0.
    #[value(alias = "7")]
    Equality,
    /// Convergence to the ground space of V.
    #[value(alias = "8")]
    GroundSet,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Invariant states, uniqueness, faithfulness, connectivity and support checks.
    Analyze(AnalyzeArgs),
    /// Stationary states of the Schroedinger-picture generator.
    SteadyState(ModelArgs),
    /// Integrate the master equation and report expectation series.
    Simulate(SimulateArgs),
    /// Strict (G(V) <= 0) or weak (G(V) <= -cV + dI) Lyapunov certificate.
    CheckLyapunov(LyapunovArgs),
    /// LaSalle-type hypotheses for a pair (V, W).
    CheckLasalle(LaSalleArgs),
    /// Engineer coupling operators making V a Lyapunov operator.
    Synthesize(SynthesizeArgs),
    /// Evolve seeded random states and test whether <V> reaches zero.
    ProbeInvariantSet(ProbeArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model file: {"dim", "hamiltonian", "couplings", "labels"?}.
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub model: PathBuf,

    /// Optional Lyapunov candidate, checked for G(V) <= 0 and used as an extra connectivity family.
    #[arg(long)]
    pub v: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,

    /// Initial density matrix; a seeded random state when omitted.
    #[arg(long)]
    pub rho0: Option<PathBuf>,

    /// Observable V whose expectation is recorded.
    #[arg(long)]
    pub v: Option<PathBuf>,

    /// Observable W whose expectation is recorded.
    #[arg(long)]
    pub w: Option<PathBuf>,

    /// Decay constant c of the mean bound <V(t)> <= exp(-ct)<V(0)> + d/c.
    #[arg(long = "c")]
    pub c: Option<f64>,

    /// Offset d of the mean bound (default 0 when --c is given).
    #[arg(long = "d")]
    pub d: Option<f64>,

    #[arg(long)]
    pub t_final: f64,

    /// Number of sample intervals.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,

    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
}

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    #[arg(long)]
    pub model: PathBuf,

    #[arg(long)]
    pub v: PathBuf,

    /// Decay constant of the weak inequality; enables the weak check.
    #[arg(long = "c")]
    pub c: Option<f64>,

    /// Offset of the weak inequality (default 0).
    #[arg(long = "d")]
    pub d: Option<f64>,

    /// Restrict the check to the leading k x k block.
    #[arg(long)]
    pub interior: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LaSalleArgs {
    #[arg(long)]
    pub model: PathBuf,

    #[arg(long)]
    pub v: PathBuf,

    /// Companion W (not used by ground-set).
    #[arg(long)]
    pub w: Option<PathBuf>,

    /// Integrable perturbation U for bounded-generator.
    #[arg(long)]
    pub u: Option<PathBuf>,

    /// Hypothesis set (numeric aliases 5, 6, 7, 8).
    #[arg(long, value_enum)]
    pub theorem: Hypothesis,

    #[arg(long)]
    pub interior: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    /// Target Lyapunov operator V.
    #[arg(long)]
    pub v: PathBuf,

    /// Fixed Hamiltonian to assemble with the engineered couplings.
    #[arg(long)]
    pub hamiltonian: Option<PathBuf>,

    /// Coupled pair HIGH:LOW in the descending eigenbasis of V (repeatable).
    #[arg(long = "pair", value_name = "HIGH:LOW")]
    pub pairs: Vec<String>,

    /// Real part of the coupling strength of every pair.
    #[arg(long, default_value_t = 1.0)]
    pub l: f64,

    /// Imaginary part of the coupling strength of every pair.
    #[arg(long, default_value_t = 0.0)]
    pub l_im: f64,

    /// Do not cancel Hamiltonian cross terms with diagonal coupling entries.
    #[arg(long)]
    pub no_compensate: bool,

    /// Solve for a coupling driving every state into the kernel of V instead.
    #[arg(long)]
    pub ground: bool,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    pub model: PathBuf,

    #[arg(long)]
    pub v: PathBuf,

    /// Number of seeded random initial states.
    #[arg(long, default_value_t = 16)]
    pub samples: usize,

    #[arg(long)]
    pub t_final: f64,

    /// Largest final <V> counted as reaching the zero set.
    #[arg(long, default_value_t = 1e-5)]
    pub threshold: f64,

    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
}
