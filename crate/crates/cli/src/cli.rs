//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "fracstep",
    version,
    about = "Fractional-order solvers: Grünwald-Letnikov and positivity-preserving NSFD schemes",
    after_help = "Steps accept the dyadic shorthand 2^-k. FRACSTEP_SEED sets the default seed.\n\
                  Exit codes: 0 success, 2 configuration error, 3 solver failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Integrate a model and emit one trajectory CSV per (scheme, alpha)
    Simulate(SimulateArgs),
    /// Equilibria, eigenvalues, marginal order and per-alpha verdicts
    Stability(StabilityArgs),
    /// Empirical convergence rates over a dyadic step ladder
    Converge(ConvergeArgs),
    /// Run NSFD and GL side by side and report timings
    Compare(CompareArgs),
    /// Audit the positivity decomposition and quasi-monotonicity of a model
    Validate(ValidateArgs),
}

#[derive(Args, Clone)]
pub struct CommonArgs {
    /// Model name: predator_prey or toy
    #[arg(long)]
    pub model: Option<String>,
    /// Parameter overrides, e.g. s=0.2,K=25,beta=2
    #[arg(long)]
    pub set: Option<String>,
    /// Config file with `key = value` lines (same keys as the long flags)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for sampling validators (default: FRACSTEP_SEED or 0)
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// GL, NSFD or both (default NSFD)
    #[arg(long)]
    pub scheme: Option<String>,
    /// Fractional order(s), comma separated, each in (0, 1]
    #[arg(long)]
    pub alpha: Option<String>,
    /// Initial state, comma separated
    #[arg(long)]
    pub x0: Option<String>,
    /// Start time (default 0)
    #[arg(long)]
    pub t0: Option<f64>,
    /// End time
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    /// Time step
    #[arg(long)]
    pub h: Option<f64>,
    /// Path prefix for CSV files; without it a single run streams to stdout
    #[arg(long)]
    pub output: Option<String>,
    /// Evaluate f at the previous level in the GL scheme (forward-Euler-like)
    #[arg(long)]
    pub gl_explicit: bool,
    /// Newton residual tolerance for the implicit GL solve
    #[arg(long)]
    pub newton_tol: Option<f64>,
    /// Newton iteration cap
    #[arg(long)]
    pub newton_max_iter: Option<usize>,
    /// What to do when an iterate goes negative: record or halt
    #[arg(long)]
    pub negativity: Option<String>,
}

#[derive(Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Orders to classify at, comma separated (default 1.0)
    #[arg(long)]
    pub alpha: Option<String>,
    /// Path prefix for the CSV twin of the report
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Orders, comma separated (default 0.5,0.6,0.7,0.8,0.9)
    #[arg(long)]
    pub alpha: Option<String>,
    /// Dyadic step ladder, comma separated (default 2^-3,...,2^-7)
    #[arg(long)]
    pub ladder: Option<String>,
    /// Reference step h* (default 2^-12)
    #[arg(long)]
    pub h_star: Option<String>,
    /// Initial state (default 0.05,0.05)
    #[arg(long)]
    pub x0: Option<String>,
    /// End time (default 1)
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    /// Path prefix for the rates CSV
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Single fractional order
    #[arg(long)]
    pub alpha: Option<String>,
    /// Initial state, comma separated
    #[arg(long)]
    pub x0: Option<String>,
    /// Start time (default 0)
    #[arg(long)]
    pub t0: Option<f64>,
    /// End time
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    /// NSFD step (an integer multiple of the GL step)
    #[arg(long)]
    pub h_nsfd: Option<f64>,
    /// GL step
    #[arg(long)]
    pub h_gl: Option<f64>,
    /// Use the explicit GL variant
    #[arg(long)]
    pub gl_explicit: bool,
}

#[derive(Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Sample count per audit (default 1000)
    #[arg(long)]
    pub samples: Option<usize>,
    /// Sampling box edge (default 10)
    #[arg(long)]
    pub box_max: Option<f64>,
}
