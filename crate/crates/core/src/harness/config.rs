//! Experiment configuration (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::Mode;
use crate::error::{Error, Result};
use crate::schedules::Regime;
use crate::weights::WeightSequence;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub sequence: WeightSequence,
    #[serde(default)]
    pub regime: Option<Regime>,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub theory: TheoryConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub walk: WalkConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub n: Vec<u64>,
    pub replicas: u64,
    pub seed: u64,
    pub mode: Mode,
    /// 0 = all available cores.
    pub threads: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig { n: vec![10_000], replicas: 10, seed: 0, mode: Mode::HeightOnly, threads: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TheoryConfig {
    pub n: Vec<u64>,
    pub delta: f64,
    /// Failure budget for the greedy-path thresholds.
    pub eps: f64,
    /// Simulation CSV to join.
    pub simulation: Option<PathBuf>,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        TheoryConfig { n: vec![10_000, 100_000, 1_000_000], delta: 0.01, eps: 0.01, simulation: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub n_max: u64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig { n_max: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkConfig {
    pub n: u64,
    /// Window `T` for the moment report; the regime default when absent.
    pub window: Option<u64>,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig { n: 1_000, window: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

/// A parsed config together with the SHA-256 of its source text.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedConfig {
    pub config: Config,
    pub digest: String,
}

impl Config {
    pub fn parse(text: &str) -> Result<LoadedConfig> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        let digest = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        Ok(LoadedConfig { config, digest })
    }

    pub fn load(path: &Path) -> Result<LoadedConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.sequence.validate().map_err(|e| Error::Config(format!("[sequence]: {e}")))?;
        if let Some(r) = &self.regime {
            r.validate().map_err(|e| Error::Config(format!("[regime]: {e}")))?;
        }
        let s = &self.simulate;
        if s.n.is_empty() || s.n.contains(&0) {
            return Err(Error::Config("[simulate] n: need a non-empty list of sizes >= 1".into()));
        }
        if s.replicas == 0 {
            return Err(Error::Config("[simulate] replicas: must be >= 1".into()));
        }
        let t = &self.theory;
        if t.n.contains(&0) {
            return Err(Error::Config("[theory] n: sizes must be >= 1".into()));
        }
        if !(t.delta > 0.0) {
            return Err(Error::Config("[theory] delta: must be positive".into()));
        }
        if !(t.eps > 0.0 && t.eps < 1.0) {
            return Err(Error::Config("[theory] eps: must lie in (0, 1)".into()));
        }
        if self.schedule.n_max < 3 {
            return Err(Error::Config("[schedule] n_max: must be >= 3".into()));
        }
        if self.walk.n == 0 {
            return Err(Error::Config("[walk] n: must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = Config::parse("[sequence]\nfamily = \"harmonic\"\n").unwrap();
        assert_eq!(c.config.sequence, WeightSequence::harmonic());
        assert_eq!(c.config.simulate.replicas, 10);
        assert_eq!(c.digest.len(), 64);
    }

    #[test]
    fn full_config() {
        let text = r#"
[sequence]
family = "power_law"
alpha = 2.0
first = 3.0

[regime]
regime = "quick_beta_eq1"
alpha = 2.0
kappa = 1.5
j = { kind = "constant", c = 0.6 }

[simulate]
n = [100, 1000]
replicas = 4
seed = 9
mode = "full"
"#;
        let c = Config::parse(text).unwrap().config;
        assert_eq!(c.sequence.weight_at(1).unwrap(), 3.0);
        assert_eq!(c.simulate.mode, Mode::Full);
        assert!(matches!(c.regime, Some(Regime::QuickBetaEq1 { .. })));
    }

    #[test]
    fn errors_carry_context() {
        let e = Config::parse("[sequence]\nfamily = \"harmonic\"\n[simulate]\nreplicas = 0\n").unwrap_err();
        assert!(e.to_string().contains("replicas"));
        let e = Config::parse("[sequence]\nfamily = \"harmonic\"\n[simulate]\nreplica = 3\n").unwrap_err();
        assert!(e.to_string().contains("replica"), "{e}");
        let e = Config::parse("[sequence]\nfamily = \"power_law\"\nalpha = 0.5\n").unwrap_err();
        assert!(e.to_string().contains("[sequence]"), "{e}");
    }
}
