use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assistant::{HttpConfig, MockBackend, ModelBackend};
use crate::dialog::Features;
use crate::runtime::WorldBounds;

/// Name of the built-in deterministic backend.
pub const MOCK_BACKEND: &str = "mock";

/// Session settings, usually read from a TOML file.
///
/// ```toml
/// seed = 42
/// backend = "local"
///
/// [world]
/// min_pxcor = -16
/// max_pxcor = 16
/// min_pycor = -16
/// max_pycor = 16
///
/// [features]
/// assistant = true
///
/// [backends.local]
/// kind = "http"
/// endpoint = "http://localhost:8080/v1"
/// model = "some-model"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    /// Fixed seed; a random one is drawn and recorded when absent.
    pub seed: Option<u64>,
    pub backend: String,
    pub world: WorldBounds,
    pub features: Features,
    pub backends: BTreeMap<String, BackendSpec>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            seed: None,
            backend: MOCK_BACKEND.to_owned(),
            world: WorldBounds::default(),
            features: Features::default(),
            backends: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BackendSpec {
    Mock {
        /// Rules file replacing the built-in table.
        #[serde(default)]
        rules: Option<PathBuf>,
    },
    Http(HttpConfig),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("unknown backend `{0}`")]
    UnknownBackend(String),
    #[error("backend `{name}` is unavailable: {reason}")]
    Backend { name: String, reason: String },
    #[error("invalid world: {0}")]
    World(#[from] crate::runtime::WorldError),
}

impl SessionConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Backend names this config can select.
    pub fn backend_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.backends.keys().cloned().collect();
        if !self.backends.contains_key(MOCK_BACKEND) {
            names.insert(0, MOCK_BACKEND.to_owned());
        }
        names
    }

    /// Instantiates the selected backend.
    pub fn build_backend(&self) -> Result<Arc<dyn ModelBackend>, ConfigError> {
        let name = self.backend.as_str();
        let spec = match self.backends.get(name) {
            Some(spec) => spec.clone(),
            None if name == MOCK_BACKEND => BackendSpec::Mock { rules: None },
            None => return Err(ConfigError::UnknownBackend(name.to_owned())),
        };
        match spec {
            BackendSpec::Mock { rules: None } => Ok(Arc::new(MockBackend::builtin())),
            BackendSpec::Mock { rules: Some(path) } => {
                let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io { path, source })?;
                let mock = MockBackend::from_toml_str(&text).map_err(|e| ConfigError::Backend {
                    name: name.to_owned(),
                    reason: e.to_string(),
                })?;
                Ok(Arc::new(mock))
            }
            BackendSpec::Http(http) => http_backend(name, http),
        }
    }
}

#[cfg(feature = "http-backend")]
fn http_backend(name: &str, config: HttpConfig) -> Result<Arc<dyn ModelBackend>, ConfigError> {
    crate::assistant::HttpBackend::new(config)
        .map(|b| Arc::new(b) as Arc<dyn ModelBackend>)
        .map_err(|e| ConfigError::Backend {
            name: name.to_owned(),
            reason: e.to_string(),
        })
}

#[cfg(not(feature = "http-backend"))]
fn http_backend(name: &str, _config: HttpConfig) -> Result<Arc<dyn ModelBackend>, ConfigError> {
    Err(ConfigError::Backend {
        name: name.to_owned(),
        reason: "built without the http-backend feature".into(),
    })
}
