use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use lqa_core::io::load_instance;
use lqa_core::oracle::brute_force_ground;

fn lqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lqa"))
        .args(args)
        .env_remove("LQA_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn help_matches_golden() {
    for sub in ["", "solve", "generate", "bench", "oracle"] {
        let mut args: Vec<&str> = sub.split_whitespace().collect();
        args.push("--help");
        let out = lqa(&args);
        assert_eq!(out.status.code(), Some(0));
        let name = if sub.is_empty() { "lqa" } else { sub };
        let path = golden_dir().join(format!("{name}.help"));
        let text = stdout(&out);
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::create_dir_all(golden_dir()).unwrap();
            std::fs::write(&path, &text).unwrap();
        }
        let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
        assert_eq!(text, expected, "help for {name:?} changed; rerun with UPDATE_GOLDEN=1");
    }
}

#[test]
fn solve_help_lists_every_flag() {
    let text = stdout(&lqa(&["solve", "--help"]));
    for flag in [
        "--steps", "--gamma", "--eta", "--optimizer", "--momentum", "--beta1", "--beta2", "--adam-eps",
        "--init-scale", "--seed", "--maxcut", "--trace", "--trace-stride", "--output",
    ] {
        assert!(text.contains(flag), "{flag}");
    }
    assert!(text.contains("[default: 0.1]"));
}

#[test]
fn solves_ferromagnetic_pair() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "ferro.txt", "# ground_energy: -2\n0 1 -1\n");
    let out = lqa(&["solve", path.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("energy: -2\n"));
    assert!(text.contains("relative_error: 0\n"));
    assert!(text.contains("spins: ++\n") || text.contains("spins: --\n"));
}

#[test]
fn random_seed_is_printed_and_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "u.txt", "0 1 0.3\n0 2 -0.7\n1 2 0.2\n2 3 0.9\n");
    let path = path.to_str().unwrap();
    let first = stdout(&lqa(&["solve", path]));
    let seed = first
        .lines()
        .find_map(|l| l.strip_prefix("seed: "))
        .expect("seed line");
    assert_eq!(stdout(&lqa(&["solve", path, "--seed", seed])), first);
}

#[test]
fn missing_instance_names_path() {
    let out = lqa(&["solve", "/no/such/instance.txt"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("/no/such/instance.txt"));
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn parse_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.txt", "0 1 1\n1 1 2\n");
    let out = lqa(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains(":2: self-coupling"));
    assert_eq!(lqa(&["solve"]).status.code(), Some(1));
    assert_eq!(lqa(&["solve", "x", "--steps", "many"]).status.code(), Some(1));
    assert_eq!(lqa(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(lqa(&["--version"]).status.code(), Some(0));
}

#[test]
fn invalid_solver_settings_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "p.txt", "0 1 1\n");
    let out = lqa(&["solve", path.to_str().unwrap(), "--steps", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("steps"));
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "p.txt", "0 1 1\n");
    let blocker = write(dir.path(), "file", "");
    let target = blocker.join("result.txt");
    let out = lqa(&["solve", path.to_str().unwrap(), "--seed", "1", "-o", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn solve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("w.txt");
    let gen = lqa(&["generate", "wishart", "--n", "40", "--alpha", "0.8", "--seed", "5", "-o", inst.to_str().unwrap()]);
    assert_eq!(gen.status.code(), Some(0));
    let run = |tag: &str| {
        let out = dir.path().join(format!("{tag}.txt"));
        let trace = dir.path().join(format!("{tag}.csv"));
        let o = lqa(&[
            "solve", inst.to_str().unwrap(), "--steps", "500", "--gamma", "0.1", "--eta", "1", "--momentum", "adam",
            "--seed", "7", "--trace", trace.to_str().unwrap(), "--trace-stride", "25", "-o", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        (std::fs::read(out).unwrap(), std::fs::read(trace).unwrap())
    };
    let (a, ta) = run("a");
    let (b, tb) = run("b");
    assert_eq!(a, b);
    assert_eq!(ta, tb);
    assert!(String::from_utf8(ta).unwrap().starts_with("step,t,cost,energy\n25,"));
}

#[test]
fn generated_wishart_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w12.txt");
    let out = lqa(&["generate", "wishart", "--n", "12", "--alpha", "1.0", "--seed", "3", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    for key in ["# generator: wishart", "# seed: 3", "# alpha: 1", "# planted: "] {
        assert!(text.contains(key), "{key}");
    }
    let p = load_instance(&path).unwrap();
    let c0 = p.ground_energy().unwrap();
    let ground = brute_force_ground(&p).unwrap();
    assert!((ground.energy - c0).abs() <= 1e-9 * c0.abs());

    let oracle = lqa(&["oracle", path.to_str().unwrap()]);
    assert_eq!(oracle.status.code(), Some(0));
    assert!(stdout(&oracle).contains("minimisers: 2\n"));
}

#[test]
fn generated_pm1_line_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.txt");
    let out = lqa(&["generate", "pm1", "--n", "2000", "--seed", "1", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let couplings = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(couplings, 1_999_000);
}

#[test]
fn invalid_sizes_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    for n in ["0", "-3", "1"] {
        let path = dir.path().join(format!("n{n}.txt"));
        let out = lqa(&["generate", "pm1", "--n", n, "--seed", "1", "-o", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1), "n = {n}");
        assert!(!path.exists());
    }
    let path = dir.path().join("w.txt");
    let out = lqa(&["generate", "wishart", "--n", "10", "--alpha", "-1", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!path.exists());
    assert_eq!(lqa(&["generate", "wishart", "--n", "10", "-o", path.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn oracle_cap_needs_flag() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.txt");
    assert!(lqa(&["generate", "pm1", "--n", "26", "--seed", "1", "-o", path.to_str().unwrap()]).status.success());
    let out = lqa(&["oracle", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--allow-large"));
}

fn bench_spec(dir: &Path, body: &str) -> PathBuf {
    write(dir, "spec.toml", &format!("version = 1\noutput = \"out\"\n{body}"))
}

#[test]
fn one_trial_bench_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "ferro.txt", "0 1 -1\n");
    let spec = bench_spec(
        dir.path(),
        "trials = 1\nseed = 4\n[[instances]]\nkind = \"file\"\npath = \"ferro.txt\"\noracle = true\n",
    );
    let out = lqa(&["bench", spec.to_str().unwrap(), "--workers", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let trials = std::fs::read_to_string(dir.path().join("out/trials.csv")).unwrap();
    let rows: Vec<&str> = trials.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("file-0,0,500,-2,0,,"));
}

#[test]
fn small_momentum_bench_is_quick() {
    let dir = tempfile::tempdir().unwrap();
    let spec = bench_spec(
        dir.path(),
        "trials = 50\nseed = 9\n[solver]\nsteps = 500\neta = 0.1\noptimizer = \"momentum\"\nmomentum = 0.99\n\
         [[instances]]\nkind = \"uniform\"\nn = 20\nseed = 3\noracle = true\n",
    );
    let start = Instant::now();
    let out = lqa(&["bench", spec.to_str().unwrap()]);
    assert!(start.elapsed().as_secs_f64() < 10.0);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("at optimum"));
    let summary = std::fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    let row: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "relative_error");
    let fraction: f64 = row[8].parse().unwrap();
    assert!((0.0..=1.0).contains(&fraction));
}

#[test]
fn invalid_spec_runs_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let spec = bench_spec(dir.path(), "trials = 0\nseed = 1\n[[instances]]\nkind = \"pm1\"\nn = 10\nseed = 1\n");
    let out = lqa(&["bench", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("trials"));
    assert!(!dir.path().join("out").exists());

    let spec = bench_spec(dir.path(), "trials = 2\nseed = 1\n[[instances]]\nkind = \"file\"\npath = \"gone.txt\"\n");
    let out = lqa(&["bench", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("gone.txt"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn bench_workers_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let spec = bench_spec(dir.path(), "trials = 2\nseed = 1\n[solver]\nsteps = 20\n[[instances]]\nkind = \"pm1\"\nn = 8\nseed = 1\n");
    let out = Command::new(env!("CARGO_BIN_EXE_lqa"))
        .args(["bench", spec.to_str().unwrap()])
        .env("LQA_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("on 3 worker(s)"));
    let out = Command::new(env!("CARGO_BIN_EXE_lqa"))
        .args(["bench", spec.to_str().unwrap()])
        .env("LQA_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
