use crate::bench::run::TrialReport;

/// Trials with a relative error at or below this count as optimal.
pub const OPTIMUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    /// Single pass (Welford). `None` for an empty slice.
    pub fn from_values(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut mean = 0.0;
        let mut m2 = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for (k, &v) in values.iter().enumerate() {
            let delta = v - mean;
            mean += delta / (k + 1) as f64;
            m2 += delta * (v - mean);
            min = min.min(v);
            max = max.max(v);
        }
        let count = values.len();
        Some(Stats {
            count,
            mean,
            std: (m2 / count as f64).max(0.0).sqrt(),
            min,
            max,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    RelativeError,
    Cut,
    Energy,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::RelativeError => "relative_error",
            Metric::Cut => "cut",
            Metric::Energy => "energy",
        }
    }

    fn of(&self, r: &TrialReport) -> Option<f64> {
        match self {
            Metric::RelativeError => r.relative_error,
            Metric::Cut => r.cut,
            Metric::Energy => r.final_energy,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSummary {
    pub instance: String,
    pub metric: Metric,
    pub trials: usize,
    pub failed: usize,
    /// `None` when every trial failed.
    pub stats: Option<Stats>,
    /// Share of successful trials that reached the known optimum.
    pub fraction_at_optimum: Option<f64>,
}

/// Per-instance statistics in order of first appearance. The metric is the
/// relative error when the optimum is known, else the cut for Max-Cut
/// instances, else the final energy. Failed trials are counted but left out
/// of the statistics.
pub fn summarize(reports: &[TrialReport]) -> Vec<InstanceSummary> {
    let mut order: Vec<&str> = Vec::new();
    for r in reports {
        if !order.contains(&r.instance.as_str()) {
            order.push(&r.instance);
        }
    }
    order
        .into_iter()
        .map(|id| {
            let group: Vec<&TrialReport> = reports.iter().filter(|r| r.instance == id).collect();
            let ok: Vec<&TrialReport> = group.iter().copied().filter(|r| !r.failed).collect();
            let metric = if group.iter().any(|r| r.relative_error.is_some()) {
                Metric::RelativeError
            } else if group.iter().any(|r| r.cut.is_some()) {
                Metric::Cut
            } else {
                Metric::Energy
            };
            let values: Vec<f64> = ok.iter().filter_map(|r| metric.of(r)).collect();
            let fraction_at_optimum = (metric == Metric::RelativeError && !ok.is_empty()).then(|| {
                let hits = values.iter().filter(|&&v| v <= OPTIMUM_TOLERANCE).count();
                hits as f64 / ok.len() as f64
            });
            InstanceSummary {
                instance: id.to_string(),
                metric,
                trials: group.len(),
                failed: group.len() - ok.len(),
                stats: Stats::from_values(&values),
                fraction_at_optimum,
            }
        })
        .collect()
}

/// Aggregate of the per-trial best-so-far curves at one recorded step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub best_energy: (f64, f64, f64),
    /// `(mean, min, max)` of the best cut so far, for Max-Cut instances.
    pub best_cut: Option<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceTrace {
    pub instance: String,
    pub rows: Vec<TraceRow>,
}

/// Running minimum of a trace's energies.
pub fn best_so_far(energies: &[f64]) -> Vec<f64> {
    energies
        .iter()
        .scan(f64::INFINITY, |best, &e| {
            *best = best.min(e);
            Some(*best)
        })
        .collect()
}

fn mean_min_max(values: &[f64]) -> (f64, f64, f64) {
    let s = Stats::from_values(values).expect("non-empty");
    (s.mean, s.min, s.max)
}

/// Builds the `(mean, min, max)` best-so-far envelope per instance from the
/// successful trials that carry a trace.
pub fn aggregate_traces(reports: &[TrialReport]) -> Vec<InstanceTrace> {
    let mut out: Vec<InstanceTrace> = Vec::new();
    let mut order: Vec<&str> = Vec::new();
    for r in reports {
        if !order.contains(&r.instance.as_str()) {
            order.push(&r.instance);
        }
    }
    for id in order {
        let traced: Vec<&TrialReport> = reports
            .iter()
            .filter(|r| r.instance == id && !r.failed && r.trace.is_some())
            .collect();
        let Some(first) = traced.first() else { continue };
        let steps: Vec<usize> = first.trace.as_ref().unwrap().iter().map(|t| t.step).collect();
        let curves: Vec<Vec<f64>> = traced
            .iter()
            .map(|r| best_so_far(&r.trace.as_ref().unwrap().iter().map(|t| t.energy).collect::<Vec<_>>()))
            .collect();
        let rows = steps
            .iter()
            .enumerate()
            .map(|(k, &step)| {
                let energies: Vec<f64> = curves.iter().map(|c| c[k]).collect();
                let best_cut = first.cut_transform.map(|ct| {
                    let cuts: Vec<f64> = energies.iter().map(|&e| ct.cut(e)).collect();
                    mean_min_max(&cuts)
                });
                TraceRow {
                    step,
                    best_energy: mean_min_max(&energies),
                    best_cut,
                }
            })
            .collect();
        out.push(InstanceTrace {
            instance: id.to_string(),
            rows,
        });
    }
    out
}
