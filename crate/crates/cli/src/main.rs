use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use vmghe::params::Preset;
use vmghe::scheme::KeyMode;
use vmghe_cli::*;

#[derive(Parser)]
#[command(name = "vmghe", version, about = "Run verifiable multigroup HE scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Master seed, overriding the scenario's.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Key mode: crs or crs_free.
    #[arg(long, global = true)]
    mode: Option<KeyMode>,
    /// Replication parameter (number of authenticator slots).
    #[arg(long, global = true)]
    lambda: Option<usize>,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Keygen, setgen, one session, distributed decryption and verification.
    Run {
        scenario: PathBuf,
        /// Save the transcript for later replay.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Detection rate over independently seeded trials.
    Stats {
        scenario: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
    /// Timing table for the scheme operations.
    Bench {
        #[arg(long, default_value = "TEST-S")]
        preset: String,
        #[arg(long, default_value_t = 3)]
        iterations: usize,
    },
    /// Re-run a saved transcript and check it reproduces byte for byte.
    Replay { transcript: PathBuf },
}

fn print_run(r: &RunReport) {
    println!("scenario   {} ({}, {}, lambda {})", r.scenario, r.preset, r.mode, r.lambda);
    println!("tamper     {}", r.tamper);
    match (&r.value, &r.reject_reason) {
        (Some(v), _) => println!("verdict    accept {v} (expected {}, correct: {})", r.expected, r.correct),
        (None, Some(reason)) => println!("verdict    reject: {reason}"),
        _ => {}
    }
    println!("components {}", r.ciphertext_components);
    println!("noise      {:.1} bits of budget left", r.noise_budget_bits);
    for c in &r.complaints {
        println!("complaint  {c}");
    }
    for t in &r.timings {
        println!("time       {:<8} {:>10.2} ms", t.name, t.millis);
    }
}

fn print_stats(r: &StatsReport) {
    println!("scenario   {} (tamper {}, lambda {})", r.scenario, r.tamper, r.lambda);
    println!(
        "detected   {}/{} = {:.4}, {:.0}% interval [{:.4}, {:.4}]",
        r.detected,
        r.trials,
        r.detection_rate,
        r.confidence * 100.0,
        r.interval.0,
        r.interval.1
    );
    println!(
        "bound      1 - 1/C(lambda, lambda/2) = {:.4} ({})",
        r.guess_bound,
        if r.bound_in_interval { "inside interval" } else { "outside interval" }
    );
    for (reason, n) in &r.reasons {
        println!("reason     {reason}: {n}");
    }
}

fn print_bench(r: &BenchReport) {
    println!("preset {} (N = {}), mode {}, {} iterations", r.preset, r.degree, r.mode, r.iterations);
    println!("{:<10} {:>12} {:>12} {:>12}", "operation", "median ms", "min ms", "max ms");
    for row in &r.rows {
        println!(
            "{:<10} {:>12.3} {:>12.3} {:>12.3}",
            row.operation, row.median_millis, row.min_millis, row.max_millis
        );
    }
}

fn emit(out: Option<&Path>, body: ReportBody) -> Result<()> {
    let json = Report::new(body).to_json();
    match out {
        Some(p) if p == Path::new("-") => println!("{json}"),
        Some(p) => std::fs::write(p, json + "\n")?,
        None => {}
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let c = cli.common;
    let overrides = Overrides {
        seed: c.seed,
        mode: c.mode,
        lambda: c.lambda,
    };
    let quiet = c.out.as_deref() == Some(Path::new("-"));
    match cli.command {
        Command::Run { scenario, transcript } => {
            let s = load_scenario(&scenario, &overrides)?;
            let (report, text) = run(&s)?;
            if let Some(path) = transcript {
                std::fs::write(path, text)?;
            }
            if !quiet {
                print_run(&report);
            }
            emit(c.out.as_deref(), ReportBody::Run(report))
        }
        Command::Replay { transcript } => {
            let report = replay_file(&transcript)?;
            if !quiet {
                println!("replay     identical");
                print_run(&report);
            }
            emit(c.out.as_deref(), ReportBody::Run(report))
        }
        Command::Stats { scenario, trials } => {
            let s = load_scenario(&scenario, &overrides)?;
            let report = stats(&s, trials)?;
            if !quiet {
                print_stats(&report);
            }
            emit(c.out.as_deref(), ReportBody::Stats(report))
        }
        Command::Bench { preset, iterations } => {
            let mut p = Preset::by_name(&preset)?;
            if let Some(l) = overrides.lambda {
                p.lambda = l;
            }
            let report = bench(&p, overrides.mode.unwrap_or(KeyMode::Crs), overrides.seed.unwrap_or(0), iterations)?;
            if !quiet {
                print_bench(&report);
            }
            emit(c.out.as_deref(), ReportBody::Bench(report))
        }
    }
}
