//! Scenario files.
//!
//! A scenario is one JSON document. Only `m` is required:
//!
//! ```json
//! {
//!   "m": 3,
//!   "agents": [{"id": "Charlie", "protocol": "ekert91"}, {"id": "Dick", "protocol": "qsdc"}],
//!   "collaborators": ["Charlie", "Dick"],
//!   "key_mode": "single_bit",
//!   "trials": 100,
//!   "master_seed": 7,
//!   "input_mode": "haar_random",
//!   "eve": {"ekert_forward": {"strategy": "intercept_resend", "intercept_probability": 0.5}},
//!   "ekert": {"pairs": 2000, "chsh_threshold": 2.3, "retries": 3},
//!   "qsdc": {"batch": 512, "check_fraction": 0.25, "qber_threshold": 0.05, "retries": 3}
//! }
//! ```
//!
//! Defaults: no agents; every agent collaborates; `single_bit` keys; one
//! trial; seed 0; Haar-random inputs; no eavesdropping; the Ekert91 and QSDC
//! defaults of [`E91Config`] and [`QsdcConfig`]. Fixed inputs are given as
//! `{"fixed": [[alpha_re, alpha_im, beta_re, beta_im], ...]}`, one entry per
//! message qubit.

use serde::Deserialize;
use thiserror::Error;

use crate::announce::KeyMode;
use crate::ekert91::E91Config;
use crate::netsim::{AgentSpec, EveConfig, InputMode, ScenarioConfig};
use crate::qsdc::QsdcConfig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid field `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl ConfigError {
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Validation { field, .. } => Some(field),
            ConfigError::Parse { .. } => None,
        }
    }
}

/// The document as written; optional fields not yet defaulted.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    m: usize,
    #[serde(default)]
    agents: Vec<AgentSpec>,
    #[serde(default)]
    collaborators: Option<Vec<String>>,
    #[serde(default)]
    key_mode: KeyMode,
    #[serde(default = "one")]
    trials: usize,
    #[serde(default)]
    master_seed: u64,
    #[serde(default)]
    input_mode: InputMode,
    #[serde(default)]
    eve: EveConfig,
    #[serde(default)]
    ekert: E91Config,
    #[serde(default)]
    qsdc: QsdcConfig,
}

fn one() -> usize {
    1
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let collaborators = file
        .collaborators
        .unwrap_or_else(|| file.agents.iter().map(|a| a.id.clone()).collect());
    let config = ScenarioConfig {
        m: file.m,
        agents: file.agents,
        collaborators,
        key_mode: file.key_mode,
        trials: file.trials,
        master_seed: file.master_seed,
        input_mode: file.input_mode,
        eve: file.eve,
        ekert: file.ekert,
        qsdc: file.qsdc,
    };
    config.validate()?;
    Ok(config)
}
