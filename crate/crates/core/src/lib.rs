//! Local quantum annealing: a gradient-based heuristic for Ising and QUBO
//! problems, with instance generators, an exhaustive oracle for small
//! problems and a benchmark harness.

pub mod bench;
pub mod engine;
pub mod error;
pub mod fsutil;
pub mod generate;
pub mod io;
pub mod ising;
pub mod matrix;
pub mod oracle;

pub use engine::{solve, Optimizer, Schedule, Solution, SolverConfig};
pub use error::{Error, Result};
pub use ising::{IsingProblem, QuboProblem, SpinConfig};
pub use matrix::SymMatrix;
