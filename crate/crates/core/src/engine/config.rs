use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Adam moment-decay constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Parameter update rule applied once per annealing step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    /// `w ← w − η∇`.
    Vanilla,
    /// `ν ← μν − η∇; w ← w + ν`.
    Momentum { momentum: f64 },
    Adam(AdamParams),
}

impl Optimizer {
    pub const DEFAULT_MOMENTUM: f64 = 0.99;

    pub fn momentum(momentum: f64) -> Self {
        Optimizer::Momentum { momentum }
    }

    pub fn adam() -> Self {
        Optimizer::Adam(AdamParams::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Optimizer::Vanilla => "vanilla",
            Optimizer::Momentum { .. } => "momentum",
            Optimizer::Adam(_) => "adam",
        }
    }
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::adam()
    }
}

type ScheduleFn = dyn Fn(usize, usize) -> f64 + Send + Sync;

/// Maps a step index `i ∈ 1..=N` to the annealing parameter `t ∈ [0, 1]`.
#[derive(Clone, Default)]
pub enum Schedule {
    /// `t = i / N`.
    #[default]
    Linear,
    /// Arbitrary monotone map `(i, N) ↦ t`.
    Custom(Arc<ScheduleFn>),
}

impl Schedule {
    pub fn custom(f: impl Fn(usize, usize) -> f64 + Send + Sync + 'static) -> Self {
        Schedule::Custom(Arc::new(f))
    }

    #[inline]
    pub fn t(&self, step: usize, total: usize) -> f64 {
        match self {
            Schedule::Linear => step as f64 / total as f64,
            Schedule::Custom(f) => f(step, total),
        }
    }

    fn validate(&self, total: usize) -> Result<()> {
        let mut prev = self.t(0, total);
        if !(prev >= 0.0) {
            return Err(Error::InvalidConfig(format!("schedule(0) = {prev} is below 0")));
        }
        for i in 1..=total {
            let t = self.t(i, total);
            if !(t >= prev) {
                return Err(Error::InvalidConfig(format!(
                    "schedule decreases at step {i} ({prev} -> {t})"
                )));
            }
            prev = t;
        }
        if prev > 1.0 {
            return Err(Error::InvalidConfig(format!("schedule({total}) = {prev} exceeds 1")));
        }
        Ok(())
    }
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Linear => f.write_str("Linear"),
            Schedule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Hyperparameters for one annealing run.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Number of steps `N`; one gradient evaluation and one update each.
    pub steps: usize,
    /// Relative weight of the problem term in the cost.
    pub gamma: f64,
    /// Step size `η`.
    pub step_size: f64,
    pub optimizer: Optimizer,
    /// Initial weights are `init_scale · U[-1, 1]`.
    pub init_scale: f64,
    pub seed: u64,
    pub schedule: Schedule,
    /// Record a trace entry every `k` steps (and always at the last step).
    pub trace_stride: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            steps: 500,
            gamma: 0.1,
            step_size: 1.0,
            optimizer: Optimizer::default(),
            init_scale: 0.1,
            seed: 0,
            schedule: Schedule::Linear,
            trace_stride: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.steps == 0 {
            return bad("steps must be at least 1".into());
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return bad(format!("step size must be positive, got {}", self.step_size));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return bad(format!("init scale must be non-negative, got {}", self.init_scale));
        }
        if self.trace_stride == Some(0) {
            return bad("trace stride must be at least 1".into());
        }
        match self.optimizer {
            Optimizer::Vanilla => {}
            Optimizer::Momentum { momentum } => {
                if !(0.0..=1.0).contains(&momentum) {
                    return bad(format!("momentum must lie in [0, 1], got {momentum}"));
                }
            }
            Optimizer::Adam(AdamParams { beta1, beta2, eps }) => {
                if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) {
                    return bad(format!("adam betas must lie in [0, 1), got {beta1}, {beta2}"));
                }
                if !(eps > 0.0) {
                    return bad(format!("adam eps must be positive, got {eps}"));
                }
            }
        }
        self.schedule.validate(self.steps)
    }
}
