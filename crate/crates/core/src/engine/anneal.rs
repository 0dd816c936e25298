//! The annealing loop.
//!
//! For `i = 1..=N` the loop sets `t = schedule(i)`, evaluates the gradient
//! once and applies one optimiser update; the answer is `sign(w)`. Several
//! independent trials on the same problem can run in lockstep so each row
//! of `J` is read once per step for the whole batch. Every trial's
//! arithmetic is independent of which other trials share its batch.

use std::io::Write;

use crate::engine::config::{Optimizer, SolverConfig};
use crate::engine::state::{cost_from_field, gradient_from_field, init_weights, SolverState};
use crate::error::{Error, Result};
use crate::ising::{absorb_bias, relative_error, strip_ancilla, IsingProblem, SpinConfig};
use crate::matrix::dot;

/// State of one trial after step `step`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub t: f64,
    /// `C(t, w)` at the updated weights.
    pub cost: f64,
    /// Objective of `sign(w)` at the updated weights.
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct AnnealOutcome {
    pub spins: SpinConfig,
    /// Objective of `spins` (`sᵀJs + offset`).
    pub energy: f64,
    pub weights: Vec<f64>,
    pub trace: Option<Vec<TraceRecord>>,
}

struct Lane {
    state: SolverState,
    field: Vec<f64>,
    grad: Vec<f64>,
    trace: Vec<TraceRecord>,
    error: Option<Error>,
}

impl Lane {
    fn fail(&mut self, step: usize, quantity: &'static str) {
        self.error = Some(Error::NonFinite { step, quantity });
    }
}

/// Runs one trial from `w0`. The problem must be bias-free.
pub fn anneal(p: &IsingProblem, cfg: &SolverConfig, w0: Vec<f64>) -> Result<AnnealOutcome> {
    anneal_batch(p, cfg, vec![w0])?
        .pop()
        .expect("one outcome per initial vector")
}

/// Runs one trial per initial vector in lockstep. The outer error covers
/// invalid inputs; a trial that hits a non-finite value fails on its own
/// without disturbing the others.
pub fn anneal_batch(
    p: &IsingProblem,
    cfg: &SolverConfig,
    initial: Vec<Vec<f64>>,
) -> Result<Vec<Result<AnnealOutcome>>> {
    cfg.validate()?;
    if p.has_bias() {
        return Err(Error::BiasPresent);
    }
    let n = p.n();
    for w0 in &initial {
        if w0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: w0.len(),
            });
        }
        if w0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("initial weights must be finite".into()));
        }
    }

    let mut lanes: Vec<Lane> = initial
        .into_iter()
        .map(|w0| Lane {
            state: SolverState::new(w0),
            field: vec![0.0; n],
            grad: vec![0.0; n],
            trace: Vec::new(),
            error: None,
        })
        .collect();

    let j = p.couplings();
    let (gamma, eta) = (cfg.gamma, cfg.step_size);
    for step in 1..=cfg.steps {
        let t = cfg.schedule.t(step, cfg.steps);
        {
            let (zs, mut fields): (Vec<&[f64]>, Vec<&mut [f64]>) = lanes
                .iter_mut()
                .filter(|l| l.error.is_none())
                .map(|l| (l.state.z(), l.field.as_mut_slice()))
                .unzip();
            if zs.is_empty() {
                break;
            }
            j.matvec_batch(&zs, &mut fields);
        }
        for lane in lanes.iter_mut().filter(|l| l.error.is_none()) {
            let c = cost_from_field(&lane.field, lane.state.z(), lane.state.x(), t, gamma);
            if !c.is_finite() {
                lane.fail(step, "cost");
                continue;
            }
            gradient_from_field(&lane.field, &lane.state, t, gamma, &mut lane.grad);
            if lane.grad.iter().any(|g| !g.is_finite()) {
                lane.fail(step, "gradient");
                continue;
            }
            match cfg.optimizer {
                Optimizer::Vanilla => lane.state.update_vanilla(&lane.grad, eta),
                Optimizer::Momentum { momentum } => {
                    lane.state.update_momentum(&lane.grad, eta, momentum)
                }
                Optimizer::Adam(ref params) => lane.state.update_adam(&lane.grad, eta, params),
            }
            if !lane.state.is_finite() {
                lane.fail(step, "weights");
            }
        }
        if let Some(stride) = cfg.trace_stride {
            if step % stride == 0 || step == cfg.steps {
                record_trace(p, &mut lanes, step, t, gamma);
            }
        }
    }

    Ok(lanes
        .into_iter()
        .map(|lane| {
            if let Some(e) = lane.error {
                return Err(e);
            }
            let spins = lane.state.spins();
            let energy = p.objective(&spins)?;
            Ok(AnnealOutcome {
                spins,
                energy,
                weights: lane.state.weights().to_vec(),
                trace: cfg.trace_stride.map(|_| lane.trace),
            })
        })
        .collect())
}

fn record_trace(p: &IsingProblem, lanes: &mut [Lane], step: usize, t: f64, gamma: f64) {
    let j = p.couplings();
    let live: Vec<usize> = (0..lanes.len()).filter(|&i| lanes[i].error.is_none()).collect();
    let spins: Vec<Vec<f64>> = live
        .iter()
        .map(|&i| lanes[i].state.spins().to_f64())
        .collect();
    let mut spin_fields = vec![vec![0.0; p.n()]; live.len()];
    {
        let xs: Vec<&[f64]> = spins.iter().map(|v| v.as_slice()).collect();
        let mut outs: Vec<&mut [f64]> = spin_fields.iter_mut().map(|v| v.as_mut_slice()).collect();
        j.matvec_batch(&xs, &mut outs);
    }
    {
        let (zs, mut fields): (Vec<&[f64]>, Vec<&mut [f64]>) = lanes
            .iter_mut()
            .filter(|l| l.error.is_none())
            .map(|l| (l.state.z(), l.field.as_mut_slice()))
            .unzip();
        j.matvec_batch(&zs, &mut fields);
    }
    for (k, &i) in live.iter().enumerate() {
        let lane = &mut lanes[i];
        let cost = cost_from_field(&lane.field, lane.state.z(), lane.state.x(), t, gamma);
        let energy = dot(&spins[k], &spin_fields[k]) + p.offset();
        lane.trace.push(TraceRecord {
            step,
            t,
            cost,
            energy,
        });
    }
}

/// Result of [`solve`], expressed in the caller's (possibly biased) problem.
#[derive(Debug, Clone)]
pub struct Solution {
    pub spins: SpinConfig,
    pub objective: f64,
    pub relative_error: Option<f64>,
    pub trace: Option<Vec<TraceRecord>>,
}

/// Solves an arbitrary Ising problem: absorbs any bias into an ancilla,
/// draws the initial weights from `cfg.seed`, anneals, and maps the
/// answer back with the ancilla normalised to `+1`.
pub fn solve(p: &IsingProblem, cfg: &SolverConfig) -> Result<Solution> {
    solve_from(p, cfg, |n| init_weights(n, cfg.init_scale, cfg.seed))
}

fn solve_from(
    p: &IsingProblem,
    cfg: &SolverConfig,
    init: impl FnOnce(usize) -> Vec<f64>,
) -> Result<Solution> {
    let (outcome, spins) = if p.has_bias() {
        let ext = absorb_bias(p);
        let outcome = anneal(&ext, cfg, init(ext.n()))?;
        let spins = strip_ancilla(&outcome.spins);
        (outcome, spins)
    } else {
        let outcome = anneal(p, cfg, init(p.n()))?;
        let spins = outcome.spins.clone();
        (outcome, spins)
    };
    let objective = p.objective(&spins)?;
    Ok(Solution {
        relative_error: p.ground_energy().map(|c0| relative_error(objective, c0)),
        objective,
        spins,
        trace: outcome.trace,
    })
}

/// Writes a trace as CSV with columns `step,t,cost,energy`.
pub fn write_trace_csv<W: Write>(records: &[TraceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "t", "cost", "energy"])?;
    for r in records {
        w.write_record([
            r.step.to_string(),
            r.t.to_string(),
            r.cost.to_string(),
            r.energy.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("trace", e))?;
    Ok(())
}
