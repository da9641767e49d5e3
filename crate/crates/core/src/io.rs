//! TOML file formats for scenario configs and explicit instances.
//!
//! Instance files number subareas from 1; everything else is 0-based.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, ScenarioConfig};
use crate::model::{ModelError, NetworkParams, ProblemInstance, UserProfile};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot serialize: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("user {user}: subareas are numbered from 1 in instance files")]
    SubareaZero { user: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Config(#[from] ChannelError),
}

/// One user as written in an instance file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserRecord {
    pub id: usize,
    pub sensing_rate: f64,
    pub tx_power: f64,
    /// 1-based.
    pub subarea: usize,
    pub gains: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub bandwidths: Vec<f64>,
    pub noise_density: f64,
    pub task_bits: f64,
    pub n_subareas: usize,
    pub weight: f64,
    pub scale: f64,
    pub users: Vec<UserRecord>,
}

impl InstanceFile {
    pub fn from_instance(instance: &ProblemInstance) -> Self {
        let p = instance.params();
        Self {
            bandwidths: p.bandwidths.clone(),
            noise_density: p.noise_density,
            task_bits: p.task_bits,
            n_subareas: p.n_subareas,
            weight: p.weight,
            scale: p.scale,
            users: instance
                .users()
                .iter()
                .map(|u| UserRecord {
                    id: u.id,
                    sensing_rate: u.sensing_rate,
                    tx_power: u.tx_power,
                    subarea: u.subarea + 1,
                    gains: u.gains.clone(),
                })
                .collect(),
        }
    }

    pub fn into_instance(self) -> Result<ProblemInstance, IoError> {
        let users = self
            .users
            .into_iter()
            .map(|u| {
                let subarea = u
                    .subarea
                    .checked_sub(1)
                    .ok_or(IoError::SubareaZero { user: u.id })?;
                Ok(UserProfile {
                    id: u.id,
                    sensing_rate: u.sensing_rate,
                    tx_power: u.tx_power,
                    subarea,
                    gains: u.gains,
                })
            })
            .collect::<Result<Vec<_>, IoError>>()?;
        let params = NetworkParams {
            bandwidths: self.bandwidths,
            noise_density: self.noise_density,
            task_bits: self.task_bits,
            n_subareas: self.n_subareas,
            weight: self.weight,
            scale: self.scale,
        };
        Ok(ProblemInstance::new(users, params)?)
    }
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}

pub fn instance_from_toml(text: &str) -> Result<ProblemInstance, IoError> {
    toml::from_str::<InstanceFile>(text)?.into_instance()
}

pub fn instance_to_toml(instance: &ProblemInstance) -> Result<String, IoError> {
    Ok(toml::to_string(&InstanceFile::from_instance(instance))?)
}

pub fn read_instance(path: &Path) -> Result<ProblemInstance, IoError> {
    instance_from_toml(&read(path)?)
}

/// Parses a scenario config; missing keys take their defaults, unknown keys
/// are rejected.
pub fn config_from_toml(text: &str) -> Result<ScenarioConfig, IoError> {
    let config: ScenarioConfig = toml::from_str(text)?;
    config.validate()?;
    Ok(config)
}

pub fn config_to_toml(config: &ScenarioConfig) -> Result<String, IoError> {
    Ok(toml::to_string(config)?)
}

pub fn read_config(path: &Path) -> Result<ScenarioConfig, IoError> {
    config_from_toml(&read(path)?)
}
