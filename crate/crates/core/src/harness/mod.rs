//! Experiment orchestration behind the command-line tool.

pub mod config;
pub mod report;
pub mod simulate;
pub mod verify;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{Config, LoadedConfig};
pub use report::{theory_table, TheoryRow};
pub use simulate::{simulate, ReplicaRow};
pub use verify::{run_verify, Check, Level};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::schedules::make_schedule;

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let f = File::create(&path)?;
    Ok((path, BufWriter::new(f)))
}

#[derive(Serialize)]
struct SimulateResults {
    n: Vec<u64>,
    replicas: u64,
    mode: crate::engine::Mode,
    sizes: Vec<simulate::SizeSummary>,
}

/// Run the configured simulation; writes `simulate.csv` and `simulate.json` into `out`.
pub fn run_simulate(loaded: &LoadedConfig, out: &Path, exec: Execution) -> Result<Vec<PathBuf>> {
    let c = &loaded.config;
    let s = &c.simulate;
    let rows = simulate(&c.sequence, &s.n, s.replicas, s.seed, s.mode, exec)?;
    let label = c.sequence.label();
    let (csv_path, w) = create(out, "simulate.csv")?;
    simulate::write_simulation_csv(w, &label, &rows)?;
    let json_path = out.join("simulate.json");
    let mut n = s.n.clone();
    n.sort_unstable();
    n.dedup();
    report::write_json(
        &json_path,
        &report::RunSummary {
            schema: "wrt-summary/1",
            command: "simulate",
            git: report::git_hash(),
            config_digest: loaded.digest.clone(),
            sequence: label,
            seed: s.seed,
            results: SimulateResults { n, replicas: s.replicas, mode: s.mode, sizes: simulate::summarize(&rows) },
        },
    )?;
    Ok(vec![csv_path, json_path])
}

/// Theory table, joined with the configured or given simulation file.
pub fn run_theory(loaded: &LoadedConfig, out: &Path, simulation: Option<&Path>) -> Result<(Vec<TheoryRow>, Vec<PathBuf>)> {
    let c = &loaded.config;
    let label = c.sequence.label();
    let sim_path = simulation.map(Path::to_path_buf).or_else(|| c.theory.simulation.clone());
    let sim_rows = match &sim_path {
        Some(p) => {
            let (file_label, rows) = simulate::read_simulation_csv(p)?;
            if file_label != label {
                return Err(Error::Config(format!(
                    "{}: simulated sequence {file_label} does not match configured {label}",
                    p.display()
                )));
            }
            Some(rows)
        }
        None => None,
    };
    let rows = theory_table(&c.sequence, c.regime.as_ref(), &c.theory.n, c.theory.delta, c.theory.eps, sim_rows.as_deref())?;
    let (path, w) = create(out, "theory.csv")?;
    report::write_theory_csv(w, &label, &rows)?;
    Ok((rows, vec![path]))
}

/// Schedule dump for the configured regime.
pub fn run_schedule(loaded: &LoadedConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let c = &loaded.config;
    let regime = c.regime.as_ref().ok_or_else(|| Error::Config("[regime] section required for schedules".into()))?;
    let sched = make_schedule(regime, &c.sequence, c.schedule.n_max)?;
    let rows = report::schedule_rows(&sched, &c.sequence)?;
    let (path, w) = create(out, "schedule.csv")?;
    report::write_schedule_csv(w, &sched, &rows)?;
    Ok(vec![path])
}

/// Walk pmf and (with a regime) the moment report.
pub fn run_walk(loaded: &LoadedConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let c = &loaded.config;
    let sched = match &c.regime {
        Some(r) => Some(make_schedule(r, &c.sequence, c.walk.n.max(3))?),
        None => None,
    };
    let (pmf, rep) = report::walk_outputs(&c.sequence, sched.as_ref(), c.walk.n, c.walk.window)?;
    let (pmf_path, w) = create(out, "walk_pmf.csv")?;
    report::write_pmf_csv(w, &pmf)?;
    let mut paths = vec![pmf_path];
    if let Some(rep) = rep {
        let p = out.join("moments.json");
        report::write_json(&p, &rep)?;
        paths.push(p);
    }
    Ok(paths)
}
