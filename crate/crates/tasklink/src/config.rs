//! Configuration files: quantization table, vehicle configurations and
//! executor settings. Copies of the shipped files are compiled in; a
//! directory named by `TASKLINK_CONFIG_DIR` overrides them file by file.

use std::path::{Path, PathBuf};

use tasklink_core::error::CodecError;
use tasklink_core::codec::{QuantTable, QUANT_TABLE_VERSION};
use tasklink_core::error::VehicleError;
use tasklink_core::executor::ExecutorConfig;
use tasklink_core::vehicle::VehicleParams;

pub const CONFIG_DIR_ENV: &str = "TASKLINK_CONFIG_DIR";

pub const QUANTIZATION_FILE: &str = "quantization.toml";
pub const MISSION_FILE: &str = "mission.toml";

const EMBEDDED: &[(&str, &str)] = &[
    (QUANTIZATION_FILE, include_str!("../../../config/quantization.toml")),
    (MISSION_FILE, include_str!("../../../config/mission.toml")),
    ("vehicles/cfg1.toml", include_str!("../../../config/vehicles/cfg1.toml")),
    ("vehicles/cfg2.toml", include_str!("../../../config/vehicles/cfg2.toml")),
    ("vehicles/cfg3.toml", include_str!("../../../config/vehicles/cfg3.toml")),
];

pub const VEHICLE_IDS: [&str; 3] = ["cfg1", "cfg2", "cfg3"];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing {origin}: {source}")]
    Parse { origin: String, source: toml::de::Error },
    #[error("{origin}: {source}")]
    Table { origin: String, source: CodecError },
    #[error("{origin}: {source}")]
    Vehicle { origin: String, source: VehicleError },
    #[error("no configuration file {0}")]
    Missing(String),
    #[error("{origin}: {message}")]
    Invalid { origin: String, message: String },
}

/// Where configuration files come from.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfigSource {
    dir: Option<PathBuf>,
}

impl ConfigSource {
    /// Compiled-in files only.
    pub fn embedded() -> Self {
        ConfigSource { dir: None }
    }

    pub fn dir(path: impl Into<PathBuf>) -> Self {
        ConfigSource { dir: Some(path.into()) }
    }

    /// Directory from `TASKLINK_CONFIG_DIR` if set, else embedded.
    pub fn from_env() -> Self {
        match std::env::var_os(CONFIG_DIR_ENV) {
            Some(d) if !d.is_empty() => Self::dir(d),
            _ => Self::embedded(),
        }
    }

    pub fn directory(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// File text and a label for error messages.
    fn read(&self, rel: &str) -> Result<(String, String), ConfigError> {
        if let Some(dir) = &self.dir {
            let path = dir.join(rel);
            if path.exists() {
                let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
                return Ok((text, path.display().to_string()));
            }
        }
        EMBEDDED
            .iter()
            .find(|(name, _)| *name == rel)
            .map(|(name, text)| (text.to_string(), format!("<builtin>/{name}")))
            .ok_or_else(|| ConfigError::Missing(rel.to_string()))
    }

    fn parse<T: serde::de::DeserializeOwned>(&self, rel: &str) -> Result<(T, String), ConfigError> {
        let (text, origin) = self.read(rel)?;
        match toml::from_str(&text) {
            Ok(v) => Ok((v, origin)),
            Err(source) => Err(ConfigError::Parse { origin, source }),
        }
    }

    /// Quantization table; refuses any version but the compiled one.
    pub fn quant_table(&self) -> Result<QuantTable, ConfigError> {
        let (table, origin): (QuantTable, _) = self.parse(QUANTIZATION_FILE)?;
        table
            .check_version(QUANT_TABLE_VERSION)
            .and_then(|_| table.validate())
            .map_err(|source| ConfigError::Table { origin, source })?;
        Ok(table)
    }

    pub fn vehicle(&self, id: &str) -> Result<VehicleParams, ConfigError> {
        let rel = format!("vehicles/{id}.toml");
        let (params, origin): (VehicleParams, _) = self.parse(&rel)?;
        params.validate().map_err(|source| ConfigError::Vehicle { origin, source })?;
        Ok(params)
    }

    pub fn mission(&self) -> Result<ExecutorConfig, ConfigError> {
        let (cfg, origin): (ExecutorConfig, _) = self.parse(MISSION_FILE)?;
        if !(cfg.dt > 0.0 && cfg.dt <= tasklink_core::vehicle::MAX_DT) {
            return Err(ConfigError::Invalid { origin, message: format!("dt {} outside (0, 0.1]", cfg.dt) });
        }
        if !(cfg.arrival_radius > 0.0 && cfg.patterns.row_spacing > 0.0) {
            return Err(ConfigError::Invalid { origin, message: "arrival_radius and row_spacing must be positive".into() });
        }
        Ok(cfg)
    }
}
