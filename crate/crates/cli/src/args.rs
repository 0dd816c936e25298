use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lqa_core::engine::{AdamParams, Optimizer, SolverConfig};

#[derive(Debug, Parser)]
#[command(name = "lqa", version, about = "Local quantum annealing for Ising and QUBO problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance file and print the result
    Solve(SolveArgs),
    /// Write a generated instance file
    #[command(allow_negative_numbers = true)]
    Generate(GenerateArgs),
    /// Run a benchmark described by a TOML spec and write CSV reports
    Bench(BenchArgs),
    /// Find the exact ground states of a small instance by enumeration
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerArg {
    Vanilla,
    Momentum,
    Adam,
}

/// Value of `--momentum`: a coefficient, or the name of an optimiser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentumArg {
    Coefficient(f64),
    Named(OptimizerArg),
}

fn parse_momentum(s: &str) -> Result<MomentumArg, String> {
    if let Ok(kind) = OptimizerArg::from_str(s, true) {
        return Ok(MomentumArg::Named(kind));
    }
    match s.parse::<f64>() {
        Ok(mu) if (0.0..=1.0).contains(&mu) => Ok(MomentumArg::Coefficient(mu)),
        Ok(mu) => Err(format!("momentum coefficient must lie in [0, 1], got {mu}")),
        Err(_) => Err(format!("expected a number in [0, 1] or one of vanilla, momentum, adam; got {s:?}")),
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Number of annealing steps
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
    /// Coupling scale gamma
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    /// Step size
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Optimiser
    #[arg(long, value_enum, default_value_t = OptimizerArg::Adam, conflicts_with = "momentum")]
    pub optimizer: OptimizerArg,
    /// Momentum coefficient (selects the momentum optimiser), or an optimiser name [default for the momentum optimiser: 0.99]
    #[arg(long, value_name = "MU|NAME", value_parser = parse_momentum)]
    pub momentum: Option<MomentumArg>,
    /// Adam first-moment decay
    #[arg(long, default_value_t = 0.9)]
    pub beta1: f64,
    /// Adam second-moment decay
    #[arg(long, default_value_t = 0.999)]
    pub beta2: f64,
    /// Adam denominator offset
    #[arg(long, default_value_t = 1e-8)]
    pub adam_eps: f64,
    /// Initial weights are drawn uniformly from [-s, s]
    #[arg(long, value_name = "S", default_value_t = 0.1)]
    pub init_scale: f64,
}

impl SolverArgs {
    pub fn optimizer(&self) -> Optimizer {
        let adam = Optimizer::Adam(AdamParams {
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.adam_eps,
        });
        let named = |kind| match kind {
            OptimizerArg::Vanilla => Optimizer::Vanilla,
            OptimizerArg::Momentum => Optimizer::momentum(Optimizer::DEFAULT_MOMENTUM),
            OptimizerArg::Adam => adam,
        };
        match self.momentum {
            Some(MomentumArg::Coefficient(mu)) => Optimizer::momentum(mu),
            Some(MomentumArg::Named(kind)) => named(kind),
            None => named(self.optimizer),
        }
    }

    pub fn config(&self, seed: u64, trace_stride: Option<usize>) -> SolverConfig {
        SolverConfig {
            steps: self.steps,
            gamma: self.gamma,
            step_size: self.eta,
            optimizer: self.optimizer(),
            init_scale: self.init_scale,
            seed,
            trace_stride,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Instance file
    pub instance: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Seed for the initial weights [default: random, printed]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also report the cut value, reading the couplings as edge weights
    #[arg(long)]
    pub maxcut: bool,
    /// Write the annealing trace as CSV (step,t,cost,energy)
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    /// Record every K-th step in the trace
    #[arg(long, value_name = "K", default_value_t = 1, requires = "trace")]
    pub trace_stride: usize,
    /// Write the result here instead of standard output
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    /// Fully connected couplings of +1 or -1 with equal probability
    Pm1,
    /// Fully connected couplings uniform on [low, high]
    Uniform,
    /// Wishart planted ensemble with a known ground state
    Wishart,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Instance family
    #[arg(value_enum)]
    pub generator: Generator,
    /// Number of spins (at least 2)
    #[arg(long, value_parser = clap::value_parser!(i64))]
    pub n: i64,
    /// Wishart aspect ratio m/n
    #[arg(long, required_if_eq("generator", "wishart"))]
    pub alpha: Option<f64>,
    /// Lower coupling bound for uniform instances
    #[arg(long, default_value_t = -1.0)]
    pub low: f64,
    /// Upper coupling bound for uniform instances
    #[arg(long, default_value_t = 1.0)]
    pub high: f64,
    /// Generator seed [default: random, printed]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file
    #[arg(short, long, value_name = "PATH")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Benchmark spec (TOML)
    pub spec: PathBuf,
    /// Worker threads [default: available cores]
    #[arg(long, value_name = "K", env = "LQA_WORKERS", hide_env_values = true)]
    pub workers: Option<usize>,
    /// Base seed, overriding the spec [default: the spec's seed, else random and printed]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, overriding the spec
    #[arg(short, long, value_name = "DIR")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Instance file
    pub instance: PathBuf,
    /// Allow more than 24 spins (up to 40); prints an estimated runtime first
    #[arg(long)]
    pub allow_large: bool,
    /// Print at most this many minimisers
    #[arg(long, value_name = "K", default_value_t = 16)]
    pub max_print: usize,
}
