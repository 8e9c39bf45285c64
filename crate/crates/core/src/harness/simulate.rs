//! Replica simulation and its CSV/JSON outputs.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{Mode, WrtState};
use crate::error::{Error, Result};
use crate::exec::{map_replicas, replica_seed, Execution};
use crate::weights::WeightSequence;

pub const SIMULATE_SCHEMA: &str = "wrt-simulate/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicaRow {
    pub replica: u64,
    pub seed: u64,
    pub n: u64,
    pub max_height: u32,
    pub weighted_depth_mean: f64,
    pub greedy_length: u64,
    /// Most populated height level and its vertex count.
    pub modal_height: u32,
    pub modal_count: u64,
}

/// Grow `replicas` trees through the sizes `ns` (sorted ascending), one row per (replica, n).
pub fn simulate(
    seq: &WeightSequence,
    ns: &[u64],
    replicas: u64,
    seed: u64,
    mode: Mode,
    exec: Execution,
) -> Result<Vec<ReplicaRow>> {
    let mut sizes = ns.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let per_replica = map_replicas(exec, replicas, |r| -> Result<Vec<ReplicaRow>> {
        let rs = replica_seed(seed, r);
        let mut st = WrtState::new(seq, rs, mode)?;
        let mut rows = Vec::with_capacity(sizes.len());
        for &n in &sizes {
            st.extend_to(n)?;
            let stats = st.height_stats();
            let (modal_height, modal_count) = stats
                .histogram
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                .map(|(h, c)| (h as u32, *c))
                .unwrap_or((0, 0));
            rows.push(ReplicaRow {
                replica: r,
                seed: rs,
                n,
                max_height: stats.max_height,
                weighted_depth_mean: stats.weighted_depth_mean,
                greedy_length: st.greedy_first_child_path().length() as u64,
                modal_height,
                modal_count,
            });
        }
        Ok(rows)
    });
    let mut out = Vec::new();
    for rows in per_replica {
        out.extend(rows?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeSummary {
    pub n: u64,
    pub replicas: u64,
    pub mean_max_height: f64,
    pub sd_max_height: f64,
    pub min_max_height: u32,
    pub max_max_height: u32,
    pub mean_weighted_depth: f64,
    pub mean_greedy_length: f64,
}

pub fn summarize(rows: &[ReplicaRow]) -> Vec<SizeSummary> {
    let mut sizes: Vec<u64> = rows.iter().map(|r| r.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|n| {
            let sel: Vec<&ReplicaRow> = rows.iter().filter(|r| r.n == n).collect();
            let k = sel.len() as f64;
            let mean = sel.iter().map(|r| r.max_height as f64).sum::<f64>() / k;
            let var = if sel.len() > 1 {
                sel.iter().map(|r| (r.max_height as f64 - mean).powi(2)).sum::<f64>() / (k - 1.0)
            } else {
                0.0
            };
            SizeSummary {
                n,
                replicas: sel.len() as u64,
                mean_max_height: mean,
                sd_max_height: var.sqrt(),
                min_max_height: sel.iter().map(|r| r.max_height).min().unwrap_or(0),
                max_max_height: sel.iter().map(|r| r.max_height).max().unwrap_or(0),
                mean_weighted_depth: sel.iter().map(|r| r.weighted_depth_mean).sum::<f64>() / k,
                mean_greedy_length: sel.iter().map(|r| r.greedy_length as f64).sum::<f64>() / k,
            }
        })
        .collect()
}

/// CSV with a leading `# schema=... sequence=...` line.
pub fn write_simulation_csv<W: Write>(mut w: W, sequence_label: &str, rows: &[ReplicaRow]) -> Result<()> {
    writeln!(w, "# schema={SIMULATE_SCHEMA} sequence={sequence_label}")?;
    let mut cw = csv::Writer::from_writer(w);
    for r in rows {
        cw.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    cw.flush()?;
    Ok(())
}

/// Rows and sequence label of a simulation CSV.
pub fn read_simulation_csv(path: &Path) -> Result<(String, Vec<ReplicaRow>)> {
    let file = std::fs::File::open(path)?;
    let mut reader = BufReader::new(file);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let label = header
        .trim()
        .strip_prefix(&format!("# schema={SIMULATE_SCHEMA} sequence="))
        .ok_or_else(|| Error::Config(format!("{}: not a {SIMULATE_SCHEMA} file", path.display())))?
        .to_string();
    let mut cr = csv::Reader::from_reader(reader);
    let rows = cr
        .deserialize()
        .collect::<std::result::Result<Vec<ReplicaRow>, _>>()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok((label, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_vertex_trees_have_height_one() {
        let rows = simulate(&WeightSequence::harmonic(), &[2], 5, 1, Mode::HeightOnly, Execution::Sequential).unwrap();
        assert!(rows.iter().all(|r| r.max_height == 1));
    }

    #[test]
    fn deterministic_across_execution_modes() {
        let seq = WeightSequence::power_law(2.0);
        let a = simulate(&seq, &[500, 100], 6, 3, Mode::HeightOnly, Execution::Sequential).unwrap();
        let b = simulate(&seq, &[100, 500], 6, 3, Mode::Full, Execution::Threads(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].n, 100);
    }

    #[test]
    fn csv_round_trip() {
        let rows = simulate(&WeightSequence::harmonic(), &[50], 3, 0, Mode::HeightOnly, Execution::Sequential).unwrap();
        let dir = std::env::temp_dir().join(format!("wrt-sim-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("s.csv");
        write_simulation_csv(std::fs::File::create(&path).unwrap(), "harmonic", &rows).unwrap();
        let (label, back) = read_simulation_csv(&path).unwrap();
        assert_eq!(label, "harmonic");
        assert_eq!(back, rows);
        std::fs::remove_dir_all(dir).ok();
    }
}
