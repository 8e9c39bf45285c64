use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use wrt_core::engine::Mode;
use wrt_core::exec::Execution;
use wrt_core::harness::{self, Config, Level, LoadedConfig};

#[derive(Parser)]
#[command(name = "wrt", version, about = "Weighted recursive trees: simulation, exact walk identities, height theory")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides [output] dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 = all cores, 1 = sequential.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    HeightOnly,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Grow replicas and write per-replica heights.
    Simulate {
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<u64>>,
        #[arg(long)]
        replicas: Option<u64>,
    },
    /// Run the exact identity suite; exits non-zero on any failure.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        level: LevelArg,
    },
    /// Dump the regime schedule.
    Schedule,
    /// Theory comparison table, optionally joined with a simulation file.
    Theory {
        #[arg(long)]
        simulation: Option<PathBuf>,
    },
    /// Walk pmf and moment report.
    Walk,
}

fn load(common: &Common) -> Result<LoadedConfig> {
    let path = common.config.as_deref().context("--config is required for this subcommand")?;
    let mut loaded = Config::load(path)?;
    if let Some(seed) = common.seed {
        loaded.config.simulate.seed = seed;
    }
    Ok(loaded)
}

fn out_dir(common: &Common, loaded: &LoadedConfig) -> PathBuf {
    common.out.clone().unwrap_or_else(|| loaded.config.output.dir.clone())
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<bool> {
    let common = &cli.common;
    match cli.command {
        Command::Simulate { mode, n, replicas } => {
            let mut loaded = load(common)?;
            let s = &mut loaded.config.simulate;
            if let Some(m) = mode {
                s.mode = match m {
                    ModeArg::HeightOnly => Mode::HeightOnly,
                    ModeArg::Full => Mode::Full,
                };
            }
            if let Some(n) = n {
                s.n = n;
            }
            if let Some(r) = replicas {
                s.replicas = r;
            }
            if let Some(t) = common.threads {
                s.threads = t;
            }
            loaded.config.validate()?;
            let exec = Execution::from_threads(loaded.config.simulate.threads);
            print_paths(&harness::run_simulate(&loaded, &out_dir(common, &loaded), exec)?);
            Ok(true)
        }
        Command::Verify { level } => {
            let level = match level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            };
            let checks = harness::run_verify(level, common.seed.unwrap_or(0))?;
            println!("{:<55} {:>7} {:>12} {:>10}  result", "check", "cases", "worst", "tolerance");
            for c in &checks {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                println!("{:<55} {:>7} {:>12.3e} {:>10.1e}  {verdict}", c.name, c.cases, c.value, c.tolerance);
            }
            if let Some(dir) = &common.out {
                std::fs::create_dir_all(dir)?;
                let p = dir.join("verify.json");
                harness::report::write_json(&p, &checks)?;
                print_paths(&[p]);
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        Command::Schedule => {
            let loaded = load(common)?;
            print_paths(&harness::run_schedule(&loaded, &out_dir(common, &loaded))?);
            Ok(true)
        }
        Command::Theory { simulation } => {
            let loaded = load(common)?;
            let (rows, paths) = harness::run_theory(&loaded, &out_dir(common, &loaded), simulation.as_deref())?;
            let flagged = rows.iter().filter(|r| r.flag_above_upper || r.flag_below_lower).count();
            println!("{} rows, {flagged} flagged", rows.len());
            print_paths(&paths);
            Ok(true)
        }
        Command::Walk => {
            let loaded = load(common)?;
            print_paths(&harness::run_walk(&loaded, &out_dir(common, &loaded))?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

