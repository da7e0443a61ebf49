//! End-to-end tests driving the compiled binary.

use std::path::Path;
use std::process::Command;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn fracstep(args: &[&str], envs: &[(&str, &str)], cwd: Option<&Path>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fracstep"));
    cmd.args(args).env_remove("FRACSTEP_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    if let Some(dir) = cwd {
        cmd.current_dir(dir);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

#[test]
fn simulate_streams_csv_and_round_trips() {
    let run = fracstep(
        &[
            "simulate", "--model", "toy", "--set", "a=2,b=1,c=6", "--alpha", "0.8", "--x0",
            "6,2", "--h", "0.25", "--T", "5",
        ],
        &[],
        None,
    );
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let mut lines = run.stdout.lines();
    assert_eq!(lines.next().unwrap(), "t,x1,x2");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 21);

    // Full-precision rendering: parsing and re-rendering reproduces the
    // exact byte content of every cell.
    for row in rows {
        for cell in row.split(',') {
            let value: f64 = cell.parse().expect("parseable float");
            assert_eq!(format!("{value:.16e}"), cell);
        }
    }
    assert!(run.stderr.contains("negativity events: 0"));
}

#[test]
fn simulate_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "--model", "predator_prey", "--set",
        "s=0.2,K=25,q=1,q1=0.1,beta=2,s0=0.5,E=1.3", "--scheme", "both", "--alpha", "0.65",
        "--x0", "6.5,5.4", "--h", "0.1", "--T", "10", "--output", "a",
    ];
    let first = fracstep(&args, &[], Some(dir.path()));
    assert_eq!(first.code, 0, "stderr: {}", first.stderr);
    let mut second_args = args;
    second_args[second_args.len() - 1] = "b";
    let second = fracstep(&second_args, &[], Some(dir.path()));
    assert_eq!(second.code, 0);

    for scheme in ["GL", "NSFD"] {
        let a = std::fs::read(dir.path().join(format!("a_{scheme}_a0.65.csv"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b_{scheme}_a0.65.csv"))).unwrap();
        assert_eq!(a, b, "{scheme} runs differ");
    }
}

#[test]
fn zero_length_run_emits_single_row() {
    let run = fracstep(
        &[
            "simulate", "--model", "toy", "--alpha", "0.8", "--x0", "1.5,2.5", "--h", "0.1",
            "--t0", "3", "--T", "3",
        ],
        &[],
        None,
    );
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let lines: Vec<&str> = run.stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "t,x1,x2");
    assert!(lines[1].starts_with("3.0"));
}

#[test]
fn configuration_errors_exit_2() {
    // Order out of range.
    let run = fracstep(
        &["simulate", "--model", "toy", "--alpha", "1.5", "--x0", "1,1", "--h", "0.1", "--T", "1"],
        &[],
        None,
    );
    assert_eq!(run.code, 2, "stderr: {}", run.stderr);
    assert!(run.stderr.contains("fractional order"));
    assert!(run.stdout.is_empty());

    // Missing required option.
    let run = fracstep(
        &["simulate", "--model", "toy", "--alpha", "0.5", "--h", "0.1", "--T", "1"],
        &[],
        None,
    );
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("--x0"));

    // Unknown model.
    let run = fracstep(
        &["simulate", "--model", "lorenz", "--alpha", "0.5", "--x0", "1,1", "--h", "0.1", "--T", "1"],
        &[],
        None,
    );
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("lorenz"));

    // Multiple runs need an output prefix.
    let run = fracstep(
        &[
            "simulate", "--model", "toy", "--scheme", "both", "--alpha", "0.5", "--x0", "1,1",
            "--h", "0.1", "--T", "1",
        ],
        &[],
        None,
    );
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("--output"));

    // Unknown flag is a usage error (clap).
    let run = fracstep(&["simulate", "--frobnicate"], &[], None);
    assert_eq!(run.code, 2);
}

#[test]
fn negativity_halt_exits_3() {
    let run = fracstep(
        &[
            "simulate", "--model", "toy", "--set", "a=2,b=1,c=0.2", "--scheme", "GL",
            "--gl-explicit", "--negativity", "halt", "--alpha", "0.8", "--x0", "0.3,3.5",
            "--h", "0.4", "--T", "20",
        ],
        &[],
        None,
    );
    assert_eq!(run.code, 3, "stderr: {}", run.stderr);
    assert!(run.stderr.contains("negative state"));
}

#[test]
fn stability_reproduces_quoted_values() {
    let run = fracstep(
        &[
            "stability", "--model", "predator_prey", "--set",
            "s=0.2,K=25,q=1,q1=0.1,beta=2,s0=0.5,E=1.3", "--alpha", "0.65",
        ],
        &[],
        None,
    );
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert!(run.stdout.contains("R0 = 7.9365"));
    assert!(run.stdout.contains("(0.9890, 0.2111)"));
    assert!(run.stdout.contains("marginal order = 0.9947"));
    assert!(run.stdout.contains("alpha 0.65: stable"));

    let run = fracstep(
        &[
            "stability", "--set", "s=0.5,K=5,q=1,q1=2,beta=0.02,s0=0.7,E=0.3", "--alpha", "1.0",
        ],
        &[],
        None,
    );
    assert_eq!(run.code, 0);
    assert!(run.stdout.contains("does not exist (R0 = 0.0091"));

    let run = fracstep(&["stability", "--model", "toy"], &[], None);
    assert_eq!(run.code, 2);
}

#[test]
fn converge_handles_ladders() {
    let dir = tempfile::tempdir().unwrap();
    let run = fracstep(
        &[
            "converge", "--alpha", "0.8", "--ladder", "2^-3,2^-4", "--h-star", "2^-8",
            "--T", "1", "--output", "conv",
        ],
        &[],
        Some(dir.path()),
    );
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let csv = std::fs::read_to_string(dir.path().join("conv_rates.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "alpha,h,xi,rho");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with(','), "coarsest step has no rate");
    assert!(!lines[2].ends_with(','), "one rho value expected");

    let bad = fracstep(
        &["converge", "--alpha", "0.8", "--ladder", "0.125,0.1", "--h-star", "2^-8"],
        &[],
        None,
    );
    assert_eq!(bad.code, 2);
    assert!(bad.stderr.contains("0.1"));
}

#[test]
fn compare_degenerate_span_succeeds() {
    let run = fracstep(
        &[
            "compare", "--model", "toy", "--alpha", "0.8", "--x0", "1,1", "--h-nsfd", "0.1",
            "--h-gl", "0.01", "--t0", "2", "--T", "2",
        ],
        &[],
        None,
    );
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert!(run.stdout.contains("empty comparison"));
}

#[test]
fn compare_reports_timings_and_node_difference() {
    let run = fracstep(
        &[
            "compare", "--model", "toy", "--set", "a=2,b=1,c=6", "--alpha", "0.8", "--x0",
            "15,0.1", "--h-nsfd", "0.05", "--h-gl", "0.01", "--T", "2",
        ],
        &[],
        None,
    );
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert!(run.stdout.contains("max node difference"));
    assert!(run.stdout.contains("wall-clock ratio GL/NSFD"));

    let bad = fracstep(
        &[
            "compare", "--model", "toy", "--alpha", "0.8", "--x0", "1,1", "--h-nsfd", "0.05",
            "--h-gl", "0.04", "--T", "2",
        ],
        &[],
        None,
    );
    assert_eq!(bad.code, 2);
    assert!(bad.stderr.contains("integer multiple"));
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    std::fs::write(
        &config,
        "model = toy\nset = a=2,b=1,c=6\nalpha = 0.8\nx0 = 6,2\nh = 0.5\nT = 2\n",
    )
    .unwrap();

    // Config alone: 4 steps of h = 0.5.
    let from_config = fracstep(
        &["simulate", "--config", config.to_str().unwrap()],
        &[],
        Some(dir.path()),
    );
    assert_eq!(from_config.code, 0, "stderr: {}", from_config.stderr);
    assert_eq!(from_config.stdout.lines().count(), 6);

    // Flag overrides the file: 8 steps of h = 0.25.
    let overridden = fracstep(
        &["simulate", "--config", config.to_str().unwrap(), "--h", "0.25"],
        &[],
        Some(dir.path()),
    );
    assert_eq!(overridden.code, 0);
    assert_eq!(overridden.stdout.lines().count(), 10);
}

#[test]
fn seed_env_matches_flag() {
    let via_env = fracstep(
        &["validate", "--model", "predator_prey", "--samples", "200"],
        &[("FRACSTEP_SEED", "7")],
        None,
    );
    let via_flag = fracstep(
        &["validate", "--model", "predator_prey", "--samples", "200", "--seed", "7"],
        &[],
        None,
    );
    assert_eq!(via_env.code, 0, "stderr: {}", via_env.stderr);
    assert_eq!(via_env.stdout, via_flag.stdout);
    assert!(via_env.stdout.contains("decomposition check over 200 samples: PASS"));
    assert!(via_env.stdout.contains("quasi-monotone check over 200 samples: FAIL"));
}
