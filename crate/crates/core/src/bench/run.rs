use std::time::Instant;

use rayon::prelude::*;

use crate::bench::spec::{BenchSpec, InstanceSpec, Source};
use crate::engine::{anneal_batch, init_weights, SolverConfig, TraceRecord};
use crate::error::{Error, Result};
use crate::generate::{gen_random_pm1, gen_uniform, gen_wishart};
use crate::io::load_instance;
use crate::ising::{absorb_bias, relative_error, strip_ancilla, IsingProblem};
use crate::oracle::brute_force_ground;

/// Maps an energy of a Max-Cut encoded problem (`J = w`, no offset) to the
/// weight of the corresponding cut: `sᵀJs = 2·Σ_{i<j} w_ij s_i s_j`, so
/// `cut = (W − E/2)/2` with `W` the total edge weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutTransform {
    pub total_weight: f64,
}

impl CutTransform {
    pub fn for_problem(p: &IsingProblem) -> Self {
        Self {
            total_weight: p.couplings().upper_pairs().map(|(_, _, w)| w).sum(),
        }
    }

    pub fn cut(&self, energy: f64) -> f64 {
        (self.total_weight - energy / 2.0) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub instance: String,
    pub trial: usize,
    pub steps: usize,
    /// Objective of the returned configuration; `None` if the trial failed.
    pub final_energy: Option<f64>,
    pub relative_error: Option<f64>,
    pub cut: Option<f64>,
    /// Wall time of the trial's batch divided by the batch size.
    pub wall_ms: f64,
    pub failed: bool,
    pub error: Option<String>,
    pub trace: Option<Vec<TraceRecord>>,
    pub cut_transform: Option<CutTransform>,
}

/// Seed of trial `trial` on instance `instance` for base seed `base`.
pub fn trial_seed(base: u64, instance: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ instance) ^ trial)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A problem ready for the annealer.
struct Prepared {
    /// The problem as given, used for reporting.
    problem: IsingProblem,
    /// Bias-free form that is actually annealed.
    annealed: IsingProblem,
    ancilla: bool,
    cut: Option<CutTransform>,
}

fn materialise(source: &Source) -> Result<IsingProblem> {
    match source {
        Source::File { path } => load_instance(path),
        Source::Pm1 { n, seed } => gen_random_pm1(*n, *seed),
        Source::Uniform { n, seed, low, high } => gen_uniform(*n, *low, *high, *seed),
        Source::Wishart { n, alpha, seed } => Ok(gen_wishart(*n, *alpha, *seed)?.problem),
    }
}

fn prepare(inst: &InstanceSpec, id: &str, source: &Source) -> Result<Prepared> {
    let mut problem = materialise(source)?;
    if inst.oracle {
        let ground = brute_force_ground(&problem)?;
        problem = problem.with_ground_energy(Some(ground.energy));
    }
    let cut = if inst.maxcut {
        if problem.has_bias() || problem.offset() != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "instance {id:?}: Max-Cut instances must have no bias and no offset"
            )));
        }
        Some(CutTransform::for_problem(&problem))
    } else {
        None
    };
    let ancilla = problem.has_bias();
    let annealed = if ancilla {
        absorb_bias(&problem)
    } else {
        problem.clone()
    };
    Ok(Prepared {
        problem,
        annealed,
        ancilla,
        cut,
    })
}

fn fresh_source(source: &Source, trial: usize) -> Source {
    let seed = source.seed().expect("fresh instances are generated");
    source.with_seed(splitmix64(seed ^ splitmix64(trial as u64)))
}

/// One unit of parallel work: consecutive trials of one instance.
struct WorkItem {
    instance: usize,
    trials: std::ops::Range<usize>,
}

/// Runs every trial of `spec` on a pool of `workers` threads. Results come
/// back in instance order, then trial order, and do not depend on the
/// number of workers or on the batch size. Instance preparation errors
/// abort the run; a trial that diverges is reported with `failed` set.
pub fn run_batch(spec: &BenchSpec, workers: usize) -> Result<Vec<TrialReport>> {
    let base = spec
        .seed
        .ok_or_else(|| Error::InvalidConfig("bench seed must be set before running".into()))?;
    let instances = spec.all_instances();
    let ids: Vec<String> = instances
        .iter()
        .enumerate()
        .map(|(k, inst)| BenchSpec::instance_id(inst, k))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;

    pool.install(|| {
        let shared: Vec<Option<Prepared>> = if spec.fresh_instance_per_trial {
            instances.iter().map(|_| None).collect()
        } else {
            instances
                .par_iter()
                .zip(&ids)
                .map(|(inst, id)| prepare(inst, id, &inst.source).map(Some))
                .collect::<Result<_>>()?
        };

        let batch = if spec.fresh_instance_per_trial {
            1
        } else {
            spec.batch_size
        };
        let items: Vec<WorkItem> = (0..instances.len())
            .flat_map(|instance| {
                (0..spec.trials)
                    .step_by(batch)
                    .map(move |start| WorkItem {
                        instance,
                        trials: start..(start + batch).min(spec.trials),
                    })
            })
            .collect();

        let chunks: Vec<Vec<TrialReport>> = items
            .par_iter()
            .map(|item| {
                let inst = &instances[item.instance];
                let id = &ids[item.instance];
                let cfg = spec.solver.to_config(inst.eta, spec.trace_stride);
                let seeds: Vec<u64> = item
                    .trials
                    .clone()
                    .map(|t| trial_seed(base, item.instance as u64, t as u64))
                    .collect();
                match &shared[item.instance] {
                    Some(prepared) => run_item(prepared, &cfg, id, item, &seeds),
                    None => {
                        let source = fresh_source(&inst.source, item.trials.start);
                        let prepared = prepare(inst, id, &source)?;
                        run_item(&prepared, &cfg, id, item, &seeds)
                    }
                }
            })
            .collect::<Result<_>>()?;
        Ok(chunks.concat())
    })
}

fn run_item(
    prepared: &Prepared,
    cfg: &SolverConfig,
    id: &str,
    item: &WorkItem,
    seeds: &[u64],
) -> Result<Vec<TrialReport>> {
    let n = prepared.annealed.n();
    let initial = seeds
        .iter()
        .map(|&s| init_weights(n, cfg.init_scale, s))
        .collect();
    let start = Instant::now();
    let outcomes = anneal_batch(&prepared.annealed, cfg, initial)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3 / outcomes.len() as f64;

    item.trials
        .clone()
        .zip(outcomes)
        .map(|(trial, outcome)| {
            let mut report = TrialReport {
                instance: id.to_string(),
                trial,
                steps: cfg.steps,
                final_energy: None,
                relative_error: None,
                cut: None,
                wall_ms,
                failed: false,
                error: None,
                trace: None,
                cut_transform: prepared.cut,
            };
            match outcome {
                Ok(out) => {
                    let spins = if prepared.ancilla {
                        strip_ancilla(&out.spins)
                    } else {
                        out.spins
                    };
                    let e = prepared.problem.objective(&spins)?;
                    report.final_energy = Some(e);
                    report.relative_error = prepared
                        .problem
                        .ground_energy()
                        .map(|c0| relative_error(e, c0));
                    report.cut = prepared.cut.map(|c| c.cut(e));
                    report.trace = out.trace;
                }
                Err(e) => {
                    report.failed = true;
                    report.error = Some(e.to_string());
                }
            }
            Ok(report)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{cut_value, graph_to_ising, SpinConfig};
    use crate::matrix::SymMatrix;

    fn spec(text: &str) -> BenchSpec {
        BenchSpec::parse(text, "test").unwrap()
    }

    const SMALL: &str = r#"
version = 1
trials = 7
seed = 3
output = "unused"
batch_size = 3
trace_stride = 10

[solver]
steps = 60
eta = 0.5

[[instances]]
kind = "uniform"
n = 10
seed = 1
oracle = true

[[instances]]
kind = "pm1"
n = 12
seed = 2
maxcut = true
"#;

    #[test]
    fn seeds_are_distinct() {
        let mut all: Vec<u64> = (0..4)
            .flat_map(|i| (0..50).map(move |t| trial_seed(9, i, t)))
            .collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 200);
        assert_ne!(trial_seed(1, 0, 0), trial_seed(2, 0, 0));
    }

    #[test]
    fn cut_transform_matches_graph_encoding() {
        let p = gen_random_pm1(9, 4).unwrap();
        let ct = CutTransform::for_problem(&p);
        let (graph, total) = graph_to_ising(p.couplings()).unwrap();
        for mask in [0u64, 5, 77, 300, 511] {
            let s = SpinConfig::from_mask(mask, 9);
            let e = p.objective(&s).unwrap();
            assert_eq!(ct.cut(e), cut_value(&graph, &s, total).unwrap());
        }
    }

    #[test]
    fn order_and_reports() {
        let reports = run_batch(&spec(SMALL), 2).unwrap();
        assert_eq!(reports.len(), 14);
        for (k, r) in reports.iter().enumerate() {
            assert_eq!(r.trial, k % 7);
            assert!(!r.failed);
            assert_eq!(r.trace.as_ref().unwrap().len(), 6);
        }
        assert_eq!(reports[0].instance, "uniform-0");
        assert!(reports[..7].iter().all(|r| r.relative_error.unwrap() >= -1e-12));
        assert!(reports[7..].iter().all(|r| r.cut.unwrap().fract() == 0.0));
    }

    fn strip_wall(mut r: Vec<TrialReport>) -> Vec<TrialReport> {
        r.iter_mut().for_each(|t| t.wall_ms = 0.0);
        r
    }

    #[test]
    fn independent_of_workers_and_batch() {
        let a = strip_wall(run_batch(&spec(SMALL), 1).unwrap());
        let b = strip_wall(run_batch(&spec(SMALL), 4).unwrap());
        let mut s = spec(SMALL);
        s.batch_size = 1;
        let c = strip_wall(run_batch(&s, 3).unwrap());
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn biased_file_instance() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.txt");
        std::fs::write(&path, "0 1 1\n1 2 -0.5\nb 0 0.75\nb 2 -1\n").unwrap();
        let text = format!(
            "version = 1\ntrials = 4\nseed = 1\noutput = \"o\"\n[[instances]]\nkind = \"file\"\npath = {:?}\noracle = true\n",
            path
        );
        let reports = run_batch(&spec(&text), 1).unwrap();
        for r in &reports {
            assert!(r.final_energy.is_some());
            assert!(r.relative_error.unwrap() >= 0.0);
        }
    }

    #[test]
    fn maxcut_rejects_bias() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.txt");
        std::fs::write(&path, "0 1 1\nb 0 1\n").unwrap();
        let text = format!(
            "version = 1\ntrials = 1\nseed = 1\noutput = \"o\"\n[[instances]]\nkind = \"file\"\npath = {:?}\nmaxcut = true\n",
            path
        );
        assert!(matches!(run_batch(&spec(&text), 1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn fresh_instances_differ_per_trial() {
        let text = "version = 1\ntrials = 3\nseed = 5\noutput = \"o\"\nfresh_instance_per_trial = true\n[solver]\nsteps = 30\n[[instances]]\nkind = \"wishart\"\nn = 12\nalpha = 0.5\nseed = 8\n";
        let reports = run_batch(&spec(text), 2).unwrap();
        assert_eq!(reports.len(), 3);
        assert!(reports.iter().all(|r| r.relative_error.is_some()));
        let again = strip_wall(run_batch(&spec(text), 1).unwrap());
        assert_eq!(strip_wall(reports), again);
    }

    #[test]
    fn missing_seed_is_rejected() {
        let mut s = spec(SMALL);
        s.seed = None;
        assert!(run_batch(&s, 1).is_err());
    }

    #[test]
    fn divergent_trial_is_reported() {
        let p = IsingProblem::from_couplings(SymMatrix::from_rows(&[vec![0.0, 1e308], vec![1e308, 0.0]]).unwrap())
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("huge.txt");
        crate::io::save_instance(&path, &p, &[]).unwrap();
        let text = format!(
            "version = 1\ntrials = 2\nseed = 1\noutput = \"o\"\n[solver]\ngamma = 1e10\n[[instances]]\nkind = \"file\"\npath = {:?}\n",
            path
        );
        let reports = run_batch(&spec(&text), 1).unwrap();
        assert!(reports.iter().all(|r| r.failed && r.error.as_ref().unwrap().contains("non-finite")));
    }
}
