use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use lqa_core::bench::{run_batch, summarize, write_reports, BenchSpec, CutTransform, Metric};
use lqa_core::engine::{solve, write_trace_csv};
use lqa_core::fsutil::atomic_write;
use lqa_core::generate::{gen_random_pm1, gen_uniform, gen_wishart};
use lqa_core::io::{load_instance, save_instance};
use lqa_core::oracle::{brute_force_ground_capped, estimated_runtime, MAX_SPINS};

use crate::args::{BenchArgs, GenerateArgs, Generator, OracleArgs, SolveArgs};

/// Largest instance `oracle --allow-large` accepts.
const LARGE_SPINS: usize = 40;

/// Bad command-line input detected after parsing; exits with status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

fn write_text(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => atomic_write(path, |w| {
            w.write_all(text.as_bytes())
                .map_err(|e| lqa_core::Error::Io {
                    path: path.to_path_buf(),
                    source: e,
                })
        })?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let problem = load_instance(&args.instance)?;
    let seed = args.seed.unwrap_or_else(rand::random);
    let stride = args.trace.as_ref().map(|_| args.trace_stride);
    let cfg = args.solver.config(seed, stride);
    cfg.validate()?;
    let cut = if args.maxcut {
        if problem.has_bias() || problem.offset() != 0.0 {
            return Err(usage("--maxcut needs an instance without biases or offset"));
        }
        Some(CutTransform::for_problem(&problem))
    } else {
        None
    };

    let solution = solve(&problem, &cfg)?;
    let mut text = String::new();
    writeln!(text, "instance: {}", args.instance.display())?;
    writeln!(text, "n: {}", problem.n())?;
    writeln!(text, "seed: {seed}")?;
    writeln!(text, "optimizer: {}", cfg.optimizer.name())?;
    writeln!(text, "steps: {}", cfg.steps)?;
    writeln!(text, "energy: {}", solution.objective)?;
    if let Some(c0) = problem.ground_energy() {
        writeln!(text, "ground_energy: {c0}")?;
    }
    if let Some(rel) = solution.relative_error {
        writeln!(text, "relative_error: {rel}")?;
    }
    if let Some(ct) = cut {
        writeln!(text, "cut: {}", ct.cut(solution.objective))?;
    }
    writeln!(text, "spins: {}", solution.spins)?;

    if let (Some(path), Some(trace)) = (&args.trace, &solution.trace) {
        atomic_write(path, |w| write_trace_csv(trace, w))?;
    }
    write_text(&text, args.output.as_deref())
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    if args.n < 2 {
        return Err(usage(format!("--n must be at least 2, got {}", args.n)));
    }
    let n = args.n as usize;
    let seed = args.seed.unwrap_or_else(rand::random);
    let mut meta = vec![
        ("generator", format!("{:?}", args.generator).to_lowercase()),
        ("seed", seed.to_string()),
    ];
    let problem = match args.generator {
        Generator::Pm1 => gen_random_pm1(n, seed)?,
        Generator::Uniform => {
            meta.push(("low", args.low.to_string()));
            meta.push(("high", args.high.to_string()));
            gen_uniform(n, args.low, args.high, seed)?
        }
        Generator::Wishart => {
            let alpha = args.alpha.expect("clap requires --alpha for wishart");
            let inst = gen_wishart(n, alpha, seed)?;
            meta.push(("alpha", alpha.to_string()));
            meta.push(("planted", inst.planted.to_string()));
            inst.problem
        }
    };
    save_instance(&args.output, &problem, &meta)?;
    println!("seed: {seed}");
    println!("wrote {}", args.output.display());
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let mut spec = BenchSpec::from_path(&args.spec)?;
    if let Some(seed) = args.seed {
        spec.seed = Some(seed);
    }
    let seed = *spec.seed.get_or_insert_with(rand::random);
    if let Some(dir) = &args.output {
        spec.output = dir.clone();
    }
    let workers = match args.workers {
        Some(0) => return Err(usage("--workers must be at least 1")),
        Some(k) => k,
        None => std::thread::available_parallelism().map_or(1, |k| k.get()),
    };
    println!("seed: {seed}");

    let start = Instant::now();
    let reports = run_batch(&spec, workers)?;
    let files = write_reports(&reports, &spec.output)
        .with_context(|| format!("writing reports to {}", spec.output.display()))?;

    let mut failed = 0;
    for s in summarize(&reports) {
        failed += s.failed;
        let mut line = format!("{}: {} over {} trials", s.instance, s.metric.name(), s.trials - s.failed);
        if let Some(st) = s.stats {
            write!(line, ", mean {} std {} min {} max {}", st.mean, st.std, st.min, st.max)?;
        }
        if let (Metric::RelativeError, Some(f)) = (s.metric, s.fraction_at_optimum) {
            write!(line, ", at optimum {:.1}%", 100.0 * f)?;
        }
        if s.failed > 0 {
            write!(line, ", {} failed", s.failed)?;
        }
        println!("{line}");
    }
    println!("failed trials: {failed} of {}", reports.len());
    println!("wrote {}", files.trials.display());
    println!("wrote {}", files.summary.display());
    for t in &files.traces {
        println!("wrote {}", t.display());
    }
    eprintln!("elapsed: {:.1} s on {workers} worker(s)", start.elapsed().as_secs_f64());
    Ok(())
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<()> {
    let problem = load_instance(&args.instance)?;
    let n = problem.n();
    let estimate = estimated_runtime(n);
    let cap = if args.allow_large {
        eprintln!("estimated runtime: {:.1} s", estimate.as_secs_f64());
        LARGE_SPINS
    } else {
        if n > MAX_SPINS {
            return Err(usage(format!(
                "{n} spins exceeds the default cap of {MAX_SPINS} (estimated runtime {:.1} s); pass --allow-large to run anyway",
                estimate.as_secs_f64()
            )));
        }
        MAX_SPINS
    };
    let ground = brute_force_ground_capped(&problem, cap)?;
    println!("n: {n}");
    println!("energy: {}", ground.energy);
    if let Some(c0) = problem.ground_energy() {
        println!("ground_energy (file): {c0}");
    }
    println!("minimisers: {}", ground.minimisers.len());
    for s in ground.minimisers.iter().take(args.max_print) {
        println!("{s}");
    }
    if ground.minimisers.len() > args.max_print {
        println!("... {} more", ground.minimisers.len() - args.max_print);
    }
    Ok(())
}
