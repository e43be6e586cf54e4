use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracwave::Potential;

#[derive(Debug, Parser)]
#[command(name = "fracwave", version, about = "Fractional NLS ground states, dynamics and studies")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Flat `key=value` or JSON file whose keys are flag names; flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads for sweeps (default: available cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a ground state and write it with its sidecar.
    Groundstate(GroundstateArgs),
    /// Evolve an initial state with the split-step scheme.
    Evolve(EvolveArgs),
    /// Run a named study.
    Reproduce(ReproduceArgs),
    /// Print diagnostics of a snapshot.
    Diag(DiagArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstraintKind {
    Mass,
    Lp,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Fractional order in (0, 1].
    #[arg(long, default_value_t = 0.8)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Constraint level.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Defaults to `mass` below the critical exponent and `lp` otherwise.
    #[arg(long, value_enum)]
    pub constraint: Option<ConstraintKind>,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    pub omega: f64,
    /// `harmonic` or `harmonic+sine:a=<real>`.
    #[arg(long, default_value_t = Potential::Harmonic)]
    pub potential: Potential,
    #[arg(long = "L", default_value_t = 10.0)]
    pub half_width: f64,
    #[arg(long = "J", default_value_t = 1024)]
    pub nodes: usize,
}

#[derive(Debug, Clone, Args)]
pub struct GroundstateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Gradient-flow step.
    #[arg(long, default_value_t = 0.01)]
    pub tau: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "max-iters", default_value_t = 100_000)]
    pub max_iters: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// `gaussian`, `groundstate`, `snapshot` (with --snapshot) or a snapshot path.
    #[arg(long, default_value = "groundstate")]
    pub init: String,
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3)]
    pub tau: f64,
    #[arg(long = "t-end", default_value_t = 10.0)]
    pub t_end: f64,
    /// Multiplies the initial state.
    #[arg(long = "perturb-scale", default_value_t = 1.0, allow_hyphen_values = true)]
    pub perturb_scale: f64,
    /// Multiplies the initial state by `exp(i k x)`.
    #[arg(long = "phase-k", default_value_t = 0.0, allow_hyphen_values = true)]
    pub phase_k: f64,
    #[arg(long = "checkpoint-every", default_value_t = 100)]
    pub checkpoint_every: usize,
    /// Write a snapshot every N steps (0: final state only).
    #[arg(long = "snapshot-every", default_value_t = 0)]
    pub snapshot_every: usize,
    /// Gradient-flow step used by `--init groundstate`.
    #[arg(long = "ngf-tau", default_value_t = 0.01)]
    pub ngf_tau: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    /// Study name, for example `SSweep` or `LambdaVsC`.
    pub experiment: String,
    /// Use the published resolution (J = 5000).
    #[arg(long = "paper-scale")]
    pub paper_scale: bool,
    /// Override a study parameter; lists are comma separated.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DiagArgs {
    pub snapshot: PathBuf,
    #[arg(long, default_value_t = Potential::Harmonic)]
    pub potential: Potential,
}
