//! `spectre`: run scenario files through the spectral-diagnostics pipeline.

use clap::{Parser, Subcommand};
use spectre_core::pipeline::{
    generate_sweep, golden_suite, run_scenario, run_sweep, scenarios_in, write_outputs, Command, RunOptions,
    Scenario,
};
use spectre_core::{par, Parallelism, SpectreError};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "spectre", version, about = "Time-domain spectral diagnostics for wave equations")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (defaults to the scenario's `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel regions.
    #[arg(long)]
    threads: Option<usize>,
    /// Replaces every seed in the scenario.
    #[arg(long)]
    seed_override: Option<u64>,
    /// Exit with code 4 when a detector disagrees with the oracle.
    #[arg(long)]
    test_mode: bool,
    /// Disable data parallelism.
    #[arg(long)]
    sequential: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Build the operator and its spectral oracle.
    Build(Common),
    /// Integrate the wave problem and export the trajectory.
    Evolve(Common),
    /// Run every check requested by the scenario.
    Diagnose(Common),
    /// Limiting amplitude (and absorption) at the scenario's `amplitude_k`.
    Amplitude(Common),
    /// Run the built-in golden instances.
    Verify {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run a directory of scenarios, or seed variants of one scenario.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Number of seed variants generated from a single scenario file.
        #[arg(long, default_value_t = 8)]
        count: u64,
    },
}

fn fail(e: &SpectreError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn options(c: &Common, command: Command) -> RunOptions {
    if let Some(n) = c.threads {
        par::set_threads(n);
    }
    RunOptions {
        command,
        out_dir: c.out.clone(),
        seed_override: c.seed_override,
        test_mode: c.test_mode,
        exec: if c.sequential { Parallelism::Sequential } else { Parallelism::Parallel },
    }
}

fn run_one(c: &Common, command: Command) -> ExitCode {
    let opts = options(c, command);
    let result = Scenario::load(&c.scenario)
        .and_then(|s| run_scenario(s, &opts))
        .and_then(|r| write_outputs(&r).map(|_| r));
    match result {
        Ok(report) => {
            for note in &report.failures {
                eprintln!("failure in {}: {}", note.stage, note.reason);
            }
            for note in &report.skipped {
                eprintln!("skipped {}: {}", note.stage, note.reason);
            }
            println!("{}", report.out_dir.join("report.json").display());
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => fail(&e),
    }
}

fn verify(out: Option<&Path>, threads: Option<usize>) -> ExitCode {
    if let Some(n) = threads {
        par::set_threads(n);
    }
    let checks = golden_suite();
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        match &c.error {
            Some(e) => println!("{status}  {}  error: {e}", c.name),
            None => println!("{status}  {}  {:.3e} (tolerance {:.1e})", c.name, c.value, c.tolerance),
        }
    }
    if let Some(dir) = out {
        let body = serde_json::json!({ "schema": 1, "checks": checks });
        let written = std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::write(dir.join("verify.json"), serde_json::to_string_pretty(&body).unwrap() + "\n"));
        if let Err(e) = written {
            return fail(&e.into());
        }
    }
    if checks.iter().all(|c| c.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    }
}

fn sweep(c: &Common, count: u64) -> ExitCode {
    let opts = options(c, Command::Diagnose);
    let paths = if c.scenario.is_dir() {
        scenarios_in(&c.scenario)
    } else {
        let dir = c.out.clone().unwrap_or_else(|| {
            let stem = c.scenario.file_stem().map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
            c.scenario.with_file_name(format!("{stem}_sweep"))
        });
        let base = c.seed_override.unwrap_or(1);
        let seeds: Vec<u64> = (0..count).map(|i| base + i).collect();
        Scenario::load(&c.scenario).and_then(|s| generate_sweep(&s, &seeds, &dir))
    };
    let paths = match paths {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let opts = RunOptions { seed_override: None, ..opts };
    let entries = run_sweep(&paths, &opts);
    let mut worst = 0;
    for e in &entries {
        match &e.error {
            Some(err) => println!("{}  exit {}  {err}", e.scenario.display(), e.exit_code),
            None => println!("{}  exit {}", e.scenario.display(), e.exit_code),
        }
        worst = worst.max(e.exit_code);
    }
    ExitCode::from(worst as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match &cli.command {
        Cmd::Build(c) => run_one(c, Command::Build),
        Cmd::Evolve(c) => run_one(c, Command::Evolve),
        Cmd::Diagnose(c) => run_one(c, Command::Diagnose),
        Cmd::Amplitude(c) => run_one(c, Command::Amplitude),
        Cmd::Verify { scenario: _, out, threads } => verify(out.as_deref(), *threads),
        Cmd::Sweep { common, count } => sweep(common, *count),
    }
}
