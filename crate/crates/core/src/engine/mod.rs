//! Local quantum annealing: cost, gradient, optimiser updates and the
//! annealing loop.

mod anneal;
mod config;
mod state;

pub use anneal::{anneal, anneal_batch, solve, write_trace_csv, AnnealOutcome, Solution, TraceRecord};
pub use config::{AdamParams, Optimizer, Schedule, SolverConfig};
pub use state::{cost, gradient, init_weights, SolverState};
