//! Experiment configuration files (JSON).
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "scenario": { "kind": "circle", "n_agents": 12, "n_rings": 1,
//!                 "base_radius": 100.0, "ring_gap": 30.0 },
//!   "sim": { "policy": "lac_nav", "lac": { "lambda": 0.5 } },
//!   "output": "out/circle",
//!   "emit": { "trace": true, "results": true, "plot": false }
//! }
//! ```
//!
//! Every field of `sim` is optional and falls back to the defaults of
//! [`SimConfig`]. When `sim.learn.gamma` is absent it is filled in per
//! scenario kind (0.95 for crowd, 0.75 otherwise).

use std::path::{Path, PathBuf};

use lacnav_core::{ScenarioSpec, SimConfig, SimError};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LACNAV_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Emit {
    pub trace: bool,
    pub results: bool,
    pub plot: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Emit {
            trace: true,
            results: true,
            plot: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub emit: Emit,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config at `{field}`: {message}")]
    Parse { field: String, message: String },
    #[error("invalid config: `{field}` {reason}")]
    Invalid { field: String, reason: String },
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioSpec, mut sim: SimConfig) -> Self {
        sim.learn.gamma = SimConfig::gamma_for(scenario.kind());
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            scenario,
            sim,
            output: None,
            emit: Emit::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            field: "<document>".into(),
            message: e.to_string(),
        })?;
        let gamma_given = value.pointer("/sim/learn/gamma").is_some();
        let mut config: ExperimentConfig =
            serde_path_to_error::deserialize(value).map_err(|e| ConfigError::Parse {
                field: e.path().to_string(),
                message: e.into_inner().to_string(),
            })?;
        if !gamma_given {
            config.sim.learn.gamma = SimConfig::gamma_for(config.scenario.kind());
        }
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every parameter domain and that the scenario can be generated.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Invalid {
                field: "schema_version".into(),
                reason: format!("must be {SCHEMA_VERSION}, got {}", self.schema_version),
            });
        }
        match self.sim.validate() {
            Ok(()) => {}
            Err(SimError::InvalidConfig { field, reason }) => {
                return Err(ConfigError::Invalid {
                    field: format!("sim.{field}"),
                    reason,
                })
            }
            Err(e) => {
                return Err(ConfigError::Invalid {
                    field: "sim".into(),
                    reason: e.to_string(),
                })
            }
        }
        self.scenario
            .generate(self.sim.lac.r)
            .map_err(|e| ConfigError::Invalid {
                field: "scenario".into(),
                reason: e.to_string(),
            })?;
        Ok(())
    }

    /// Output directory: the config's own, else `$LACNAV_OUT_DIR`, else `out`.
    pub fn output_dir(&self) -> PathBuf {
        self.output
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CIRCLE: &str = r#"{
        "schema_version": 1,
        "scenario": {"kind": "circle", "n_agents": 12, "n_rings": 1, "base_radius": 100.0, "ring_gap": 30.0}
    }"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = ExperimentConfig::from_json(CIRCLE).unwrap();
        assert_eq!(c.sim.lac, lacnav_core::LacParams::default());
        assert_eq!(c.sim.learn.gamma, 0.75);
        assert_eq!(c.emit, Emit::default());
        c.validate().unwrap();
    }

    #[test]
    fn crowd_gamma_defaults_to_095_unless_given() {
        let crowd = r#"{"schema_version": 1, "scenario": {"kind": "crowd", "n_agents": 5, "area_side": 600.0}}"#;
        assert_eq!(ExperimentConfig::from_json(crowd).unwrap().sim.learn.gamma, 0.95);
        let crowd = r#"{"schema_version": 1, "scenario": {"kind": "crowd", "n_agents": 5, "area_side": 600.0},
                        "sim": {"learn": {"gamma": 0.5}}}"#;
        assert_eq!(ExperimentConfig::from_json(crowd).unwrap().sim.learn.gamma, 0.5);
    }

    #[test]
    fn unknown_field_is_named() {
        let bad = CIRCLE.replace("\"n_rings\"", "\"n_ringz\"");
        let err = ExperimentConfig::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("n_ringz"), "{err}");

        let bad = r#"{"schema_version": 1, "scenario": {"kind": "crowd", "n_agents": 5, "area_side": 600.0},
                      "sim": {"lac": {"lamda": 0.3}}}"#;
        let err = ExperimentConfig::from_json(bad).unwrap_err().to_string();
        assert!(err.contains("sim.lac") && err.contains("lamda"), "{err}");
    }

    #[test]
    fn wrong_type_is_named() {
        let bad = r#"{"schema_version": 1, "scenario": {"kind": "crowd", "n_agents": 5, "area_side": 600.0},
                      "sim": {"lac": {"tau": "slow"}}}"#;
        let err = ExperimentConfig::from_json(bad).unwrap_err().to_string();
        assert!(err.contains("sim.lac.tau"), "{err}");
    }

    #[test]
    fn out_of_domain_lambda_cites_range() {
        let mut c = ExperimentConfig::from_json(CIRCLE).unwrap();
        c.sim.lac.lambda = 1.5;
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("sim.lac.lambda") && err.contains("[0, 1]"), "{err}");
    }

    #[test]
    fn tau_below_delta_is_rejected() {
        let mut c = ExperimentConfig::from_json(CIRCLE).unwrap();
        c.sim.lac.tau = 0.001;
        assert!(c.validate().unwrap_err().to_string().contains("sim.lac.tau"));
    }

    #[test]
    fn wrong_schema_version() {
        let c = ExperimentConfig::from_json(&CIRCLE.replace("\"schema_version\": 1", "\"schema_version\": 9")).unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("schema_version"));
    }

    #[test]
    fn infeasible_scenario_is_reported() {
        let bad = CIRCLE.replace("100.0", "20.0");
        let c = ExperimentConfig::from_json(&bad).unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("scenario"));
    }
}
