//! Declarative benchmark description, read from TOML.
//!
//! ```toml
//! version = 1
//! trials = 100
//! seed = 7
//! output = "results/k2000"
//! trace_stride = 50
//!
//! [solver]
//! steps = 5000
//! gamma = 0.1
//! eta = 1.0
//! optimizer = "adam"
//!
//! [[instances]]
//! kind = "pm1"
//! n = 2000
//! seed = 1
//! maxcut = true
//! ```
//!
//! Relative paths (`output`, instance `path`) resolve against the directory
//! containing the spec file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::engine::{AdamParams, Optimizer, Schedule, SolverConfig};
use crate::error::{Error, Result};

pub const SPEC_VERSION: u32 = 1;

fn default_batch_size() -> usize {
    16
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    /// Format version; must equal [`SPEC_VERSION`].
    pub version: u32,
    #[serde(default)]
    pub name: Option<String>,
    /// Trials per instance.
    pub trials: usize,
    /// Base seed for every random draw in the run. Must be set before
    /// [`crate::bench::run_batch`]; the CLI fills in a random one if absent.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Record best-so-far traces every `k` steps.
    #[serde(default)]
    pub trace_stride: Option<usize>,
    /// Output directory for the CSV files.
    pub output: PathBuf,
    /// Draw a fresh generated instance for every trial instead of sharing
    /// one instance across all trials.
    #[serde(default)]
    pub fresh_instance_per_trial: bool,
    /// Trials advanced in lockstep per work item.
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub instances: Vec<InstanceSpec>,
    #[serde(default)]
    pub wishart_sweep: Option<WishartSweep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Vanilla,
    Momentum,
    Adam,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub steps: usize,
    pub gamma: f64,
    pub eta: f64,
    pub optimizer: OptimizerKind,
    pub momentum: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub init_scale: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let cfg = SolverConfig::default();
        let adam = AdamParams::default();
        Self {
            steps: cfg.steps,
            gamma: cfg.gamma,
            eta: cfg.step_size,
            optimizer: OptimizerKind::Adam,
            momentum: Optimizer::DEFAULT_MOMENTUM,
            beta1: adam.beta1,
            beta2: adam.beta2,
            adam_eps: adam.eps,
            init_scale: cfg.init_scale,
        }
    }
}

impl SolverSpec {
    pub fn to_config(&self, eta_override: Option<f64>, trace_stride: Option<usize>) -> SolverConfig {
        let optimizer = match self.optimizer {
            OptimizerKind::Vanilla => Optimizer::Vanilla,
            OptimizerKind::Momentum => Optimizer::momentum(self.momentum),
            OptimizerKind::Adam => Optimizer::Adam(AdamParams {
                beta1: self.beta1,
                beta2: self.beta2,
                eps: self.adam_eps,
            }),
        };
        SolverConfig {
            steps: self.steps,
            gamma: self.gamma,
            step_size: eta_override.unwrap_or(self.eta),
            optimizer,
            init_scale: self.init_scale,
            seed: 0,
            schedule: Schedule::Linear,
            trace_stride,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct InstanceSpec {
    #[serde(default)]
    pub id: Option<String>,
    /// Step size for this instance only.
    #[serde(default)]
    pub eta: Option<f64>,
    /// Treat the couplings as Max-Cut edge weights and report cut values.
    #[serde(default)]
    pub maxcut: bool,
    /// Compute the ground energy by exhaustive search before the trials.
    #[serde(default)]
    pub oracle: bool,
    #[serde(flatten)]
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    File {
        path: PathBuf,
    },
    /// Fully connected `±1` couplings.
    Pm1 { n: usize, seed: u64 },
    /// Fully connected couplings uniform on `[low, high]`.
    Uniform {
        n: usize,
        seed: u64,
        #[serde(default = "default_low")]
        low: f64,
        #[serde(default = "default_high")]
        high: f64,
    },
    Wishart { n: usize, alpha: f64, seed: u64 },
}

fn default_low() -> f64 {
    -1.0
}

fn default_high() -> f64 {
    1.0
}

impl Source {
    pub fn kind(&self) -> &'static str {
        match self {
            Source::File { .. } => "file",
            Source::Pm1 { .. } => "pm1",
            Source::Uniform { .. } => "uniform",
            Source::Wishart { .. } => "wishart",
        }
    }

    pub(crate) fn with_seed(&self, seed: u64) -> Source {
        let mut s = self.clone();
        match &mut s {
            Source::File { .. } => {}
            Source::Pm1 { seed: x, .. }
            | Source::Uniform { seed: x, .. }
            | Source::Wishart { seed: x, .. } => *x = seed,
        }
        s
    }

    pub(crate) fn seed(&self) -> Option<u64> {
        match self {
            Source::File { .. } => None,
            Source::Pm1 { seed, .. } | Source::Uniform { seed, .. } | Source::Wishart { seed, .. } => {
                Some(*seed)
            }
        }
    }
}

/// Evenly spaced Wishart instances, `alpha_k = alpha_min + k·Δ` with seed
/// `seed + k`, for `k = 0..count`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WishartSweep {
    pub n: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub count: usize,
    pub seed: u64,
    /// Per-instance step sizes, one per alpha.
    #[serde(default)]
    pub eta: Option<Vec<f64>>,
}

impl WishartSweep {
    pub fn alphas(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.alpha_min; self.count];
        }
        let step = (self.alpha_max - self.alpha_min) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.alpha_min + k as f64 * step).collect()
    }

    pub fn instances(&self) -> Vec<InstanceSpec> {
        self.alphas()
            .into_iter()
            .enumerate()
            .map(|(k, alpha)| InstanceSpec {
                id: Some(format!("wishart-{k}")),
                eta: self.eta.as_ref().map(|e| e[k]),
                maxcut: false,
                oracle: false,
                source: Source::Wishart {
                    n: self.n,
                    alpha,
                    seed: self.seed + k as u64,
                },
            })
            .collect()
    }
}

impl BenchSpec {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let spec: BenchSpec = toml::from_str(text).map_err(|e| Error::Spec {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        spec.validate(origin)?;
        Ok(spec)
    }

    /// Reads a spec file and resolves its relative paths.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec = Self::parse(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new("."));
        spec.resolve_paths(base);
        Ok(spec)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        if self.output.is_relative() {
            self.output = base.join(&self.output);
        }
        for inst in &mut self.instances {
            if let Source::File { path } = &mut inst.source {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
    }

    /// Explicit instances followed by the sweep, if any.
    pub fn all_instances(&self) -> Vec<InstanceSpec> {
        let mut all = self.instances.clone();
        if let Some(sweep) = &self.wishart_sweep {
            all.extend(sweep.instances());
        }
        all
    }

    /// The identifier used for instance `index` in reports.
    pub fn instance_id(inst: &InstanceSpec, index: usize) -> String {
        inst.id
            .clone()
            .unwrap_or_else(|| format!("{}-{index}", inst.source.kind()))
    }

    pub fn validate(&self, origin: &str) -> Result<()> {
        let fail = |message: String| {
            Err(Error::Spec {
                path: origin.to_string(),
                message,
            })
        };
        if self.version != SPEC_VERSION {
            return fail(format!(
                "unsupported version {} (expected {SPEC_VERSION})",
                self.version
            ));
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.batch_size == 0 {
            return fail("batch_size must be at least 1".into());
        }
        if let Some(sweep) = &self.wishart_sweep {
            if sweep.count == 0 {
                return fail("wishart_sweep.count must be at least 1".into());
            }
            if let Some(eta) = &sweep.eta {
                if eta.len() != sweep.count {
                    return fail(format!(
                        "wishart_sweep.eta has {} entries for {} instances",
                        eta.len(),
                        sweep.count
                    ));
                }
            }
        }
        let all = self.all_instances();
        if all.is_empty() {
            return fail("no instances given".into());
        }
        let mut ids = std::collections::HashSet::new();
        for (k, inst) in all.iter().enumerate() {
            let id = Self::instance_id(inst, k);
            if !ids.insert(id.clone()) {
                return fail(format!("duplicate instance id {id:?}"));
            }
            if self.fresh_instance_per_trial && matches!(inst.source, Source::File { .. }) {
                return fail(format!(
                    "instance {id:?}: fresh_instance_per_trial needs a generated source"
                ));
            }
            let cfg = self.solver.to_config(inst.eta, self.trace_stride);
            if let Err(e) = cfg.validate() {
                return fail(format!("instance {id:?}: {e}"));
            }
        }
        Ok(())
    }
}
