//! Run configuration: one TOML file, every key optional, unknown keys
//! rejected.
//!
//! ```toml
//! scenario = "scenario.toml"   # relative to this file
//! duration = 300.0
//! seeds = [0, 1, 2]
//! latency = "metro"
//! reaction = "hd"
//!
//! [detector.vehicle]
//! t2c = 10.0
//! s2c = 5.0
//! ```

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::detector::DetectorParams;
use crate::mobility::{ArrivalConfig, Scenario};
use crate::netmodel::{LatencyProfile, LoopOptions, ReactionProfile};
use crate::time::SimTime;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrids {
    pub t2c: Vec<f64>,
    pub s2c: Vec<f64>,
    pub lambda_v: Vec<f64>,
    pub lambda_p: Vec<f64>,
}

impl Default for SweepGrids {
    fn default() -> Self {
        SweepGrids {
            t2c: (1..=10).map(f64::from).collect(),
            s2c: (1..=8).map(f64::from).collect(),
            lambda_v: (0..=15).map(|k| f64::from(k) / 10.0).collect(),
            lambda_p: vec![0.0, 0.05, 0.1, 0.15, 0.2],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Scenario file; the built-in layout when absent.
    pub scenario: Option<PathBuf>,
    /// Seconds per run.
    pub duration: f64,
    pub seeds: Vec<u64>,
    pub lambda_v: f64,
    pub lambda_p: f64,
    pub detector: DetectorParams,
    /// "metro" or "cloud".
    pub latency: String,
    /// "hd" or "av".
    pub reaction: String,
    pub backhaul_ms: Option<f64>,
    pub radio_ms: Option<f64>,
    pub processing_ms: Option<f64>,
    pub human_reaction_ms: Option<f64>,
    pub out: PathBuf,
    pub alerts_enabled: bool,
    /// Alerted entities brake in the simulation.
    pub closed_loop: bool,
    /// Seconds a recipient keeps braking after acting.
    pub reaction_hold: f64,
    pub trajectory_decimation: u64,
    pub sweep: SweepGrids,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: None,
            duration: 300.0,
            seeds: (0..10).collect(),
            lambda_v: 0.7,
            lambda_p: 0.1,
            detector: DetectorParams::default(),
            latency: "metro".into(),
            reaction: "hd".into(),
            backhaul_ms: None,
            radio_ms: None,
            processing_ms: None,
            human_reaction_ms: None,
            out: PathBuf::from("out"),
            alerts_enabled: true,
            closed_loop: false,
            reaction_hold: 2.0,
            trajectory_decimation: 10,
            sweep: SweepGrids::default(),
        }
    }
}

fn ms(v: f64, name: &str) -> Result<SimTime, ConfigError> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(ConfigError::Invalid(format!("{name} must be a non-negative number of ms, got {v}")));
    }
    Ok(SimTime::from_secs(v / 1000.0))
}

impl RunConfig {
    /// Parses `path`; a relative scenario path is resolved against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|source| ConfigError::Parse { path: path.to_path_buf(), source })?;
        if let (Some(s), Some(dir)) = (&cfg.scenario, path.parent()) {
            if s.is_relative() {
                cfg.scenario = Some(dir.join(s));
            }
        }
        Ok(cfg)
    }

    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        toml::from_str(s).map_err(|source| ConfigError::Parse { path: PathBuf::from("<string>"), source })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(ConfigError::Invalid(format!("duration must be positive, got {}", self.duration)));
        }
        if self.seeds.is_empty() {
            return Err(ConfigError::Invalid("at least one seed is required".into()));
        }
        for (name, v) in [("lambda_v", self.lambda_v), ("lambda_p", self.lambda_p)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(self.reaction_hold >= 0.0 && self.reaction_hold.is_finite()) {
            return Err(ConfigError::Invalid("reaction_hold must be non-negative".into()));
        }
        if self.trajectory_decimation == 0 {
            return Err(ConfigError::Invalid("trajectory_decimation must be at least 1".into()));
        }
        if let Some(p) = &self.scenario {
            if !p.is_file() {
                return Err(ConfigError::Invalid(format!("scenario file {} does not exist", p.display())));
            }
        }
        self.detector.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.latency_profile()?;
        self.reaction_profile()?;
        self.load_scenario()?;
        Ok(())
    }

    pub fn load_scenario(&self) -> Result<Scenario, ConfigError> {
        let sc = match &self.scenario {
            Some(p) => Scenario::load(p).map_err(|e| ConfigError::Invalid(e.to_string()))?,
            None => Scenario::default(),
        };
        sc.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(sc)
    }

    pub fn latency_profile(&self) -> Result<LatencyProfile, ConfigError> {
        let mut p = LatencyProfile::by_name(&self.latency)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown latency profile {:?}", self.latency)))?;
        if let Some(v) = self.backhaul_ms {
            p.backhaul = ms(v, "backhaul_ms")?;
        }
        if let Some(v) = self.radio_ms {
            p.radio = ms(v, "radio_ms")?;
        }
        Ok(p)
    }

    pub fn reaction_profile(&self) -> Result<ReactionProfile, ConfigError> {
        let mut p = ReactionProfile::by_name(&self.reaction)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown reaction profile {:?}", self.reaction)))?;
        if let Some(v) = self.processing_ms {
            p.processing = ms(v, "processing_ms")?;
        }
        if let Some(v) = self.human_reaction_ms {
            p.human_reaction = ms(v, "human_reaction_ms")?;
        }
        Ok(p)
    }

    pub fn arrivals(&self, seed: u64) -> ArrivalConfig {
        ArrivalConfig { lambda_v: self.lambda_v, lambda_p: self.lambda_p, seed }
    }

    pub fn loop_options(&self) -> Result<LoopOptions, ConfigError> {
        Ok(LoopOptions {
            latency: self.latency_profile()?,
            reaction: self.reaction_profile()?,
            alerts_enabled: self.alerts_enabled,
            closed_loop: self.closed_loop,
            reaction_hold: SimTime::from_secs(self.reaction_hold),
            trajectory_decimation: self.trajectory_decimation,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        cfg.validate().unwrap();
        assert_eq!(cfg.seeds.len(), 10);
        assert_eq!(cfg.duration, 300.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml_str("durration = 10.0").is_err());
        assert!(RunConfig::from_toml_str("[detector]\nt2c = 3.0").is_err());
        assert!(RunConfig::from_toml_str("duration = \"long\"").is_err());
    }

    #[test]
    fn invalid_values() {
        let bad = |s: &str| RunConfig::from_toml_str(s).unwrap().validate().is_err();
        assert!(bad("duration = 0.0"));
        assert!(bad("seeds = []"));
        assert!(bad("latency = \"edge\""));
        assert!(bad("scenario = \"/nonexistent/scenario.toml\""));
        assert!(bad("[detector.vehicle]\nt2c = -1.0\ns2c = 5.0"));
    }

    #[test]
    fn overrides_apply_on_top_of_presets() {
        let cfg = RunConfig::from_toml_str("latency = \"cloud\"\nradio_ms = 2.5\nreaction = \"av\"").unwrap();
        let l = cfg.latency_profile().unwrap();
        assert_eq!(l.backhaul, SimTime::from_millis(20));
        assert_eq!(l.radio, SimTime::from_micros(2500));
        assert_eq!(cfg.reaction_profile().unwrap(), ReactionProfile::AUTOMATED);
    }
}
