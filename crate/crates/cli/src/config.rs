use std::path::{Path, PathBuf};

use heritage_kg::tabular::{TableProfile, DEFAULT_SEPARATOR};
use serde::Deserialize;

use crate::CliError;

pub const HOST_ENV: &str = "HERITAGE_KG_HOST";
pub const PORT_ENV: &str = "HERITAGE_KG_PORT";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    tables: RawTables,
    mapping: PathBuf,
    #[serde(default = "default_separator")]
    separator: String,
    output: Output,
    #[serde(default)]
    serve: Serve,
    stories: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTables {
    object: TableSource,
    process: TableSource,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSource {
    pub path: PathBuf,
    pub profile: TableProfile,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub ntriples: PathBuf,
    pub turtle: PathBuf,
    pub report: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Serve {
    #[serde(default = "default_host")]
    pub host: String,
    #[serde(default = "default_port")]
    pub port: u16,
    #[serde(default = "default_assets")]
    pub assets: PathBuf,
}

impl Default for Serve {
    fn default() -> Self {
        Serve {
            host: default_host(),
            port: default_port(),
            assets: default_assets(),
        }
    }
}

fn default_separator() -> String {
    DEFAULT_SEPARATOR.to_string()
}

fn default_host() -> String {
    "127.0.0.1".into()
}

fn default_port() -> u16 {
    8080
}

fn default_assets() -> PathBuf {
    "assets".into()
}

/// The pipeline configuration with every path resolved against the
/// directory holding the config file.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub object: TableSource,
    pub process: TableSource,
    pub mapping: PathBuf,
    pub separator: String,
    pub output: Output,
    pub serve: Serve,
    pub stories: PathBuf,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut config = Self::from_json(&text, base)?;
        config.apply_env()?;
        Ok(config)
    }

    /// Applies the host and port environment overrides.
    pub fn apply_env(&mut self) -> Result<(), CliError> {
        if let Ok(host) = std::env::var(HOST_ENV) {
            self.serve.host = host;
        }
        if let Ok(port) = std::env::var(PORT_ENV) {
            self.serve.port = port
                .parse()
                .ok()
                .filter(|&p| p != 0)
                .ok_or_else(|| CliError::Config(format!("{PORT_ENV}={port:?} is not a port number")))?;
        }
        Ok(())
    }

    pub fn from_json(text: &str, base: &Path) -> Result<Self, CliError> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("pipeline config: {e}")))?;
        let at = |p: &Path| base.join(p);
        let config = PipelineConfig {
            object: TableSource {
                path: at(&raw.tables.object.path),
                profile: raw.tables.object.profile,
            },
            process: TableSource {
                path: at(&raw.tables.process.path),
                profile: raw.tables.process.profile,
            },
            mapping: at(&raw.mapping),
            separator: raw.separator,
            output: Output {
                ntriples: at(&raw.output.ntriples),
                turtle: at(&raw.output.turtle),
                report: at(&raw.output.report),
            },
            serve: Serve {
                assets: at(&raw.serve.assets),
                ..raw.serve
            },
            stories: at(&raw.stories),
        };
        if config.serve.port == 0 {
            return Err(CliError::Config("serve.port must be in 1..=65535".into()));
        }
        if config.separator.is_empty() {
            return Err(CliError::Config("separator must not be empty".into()));
        }
        Ok(config)
    }
}

/// Fails with a "<what> file not found" diagnostic if `path` is missing.
pub fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::NotFound(format!("{what} file not found: {}", path.display())))
    }
}
