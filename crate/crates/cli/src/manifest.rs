use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::args::Common;
use crate::CliError;

pub const SEED_ENV: &str = "PCSEMI_SEED";

/// Record of one run, sufficient to replay it with `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    pub version: String,
    /// Milliseconds since the Unix epoch.
    pub started_at_ms: u64,
    pub finished_at_ms: u64,
    /// sha256 of the primary output, hex.
    pub output_digest: String,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad manifest {}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Resolves parameters as flag, then `--config` manifest, then default, and
/// records every resolved value for the run manifest.
pub struct Params {
    flags: BTreeMap<String, Value>,
    config: BTreeMap<String, Value>,
    pub used: BTreeMap<String, Value>,
}

impl Params {
    pub fn new(
        subcommand: &str,
        common: &Common,
        positional: Option<(&str, Value)>,
    ) -> Result<Self, CliError> {
        let mut flags: BTreeMap<String, Value> =
            match serde_json::to_value(common).expect("flags serialize") {
                Value::Object(map) => map.into_iter().collect(),
                _ => BTreeMap::new(),
            };
        if let Some((name, value)) = positional {
            if !value.is_null() {
                flags.insert(name.into(), value);
            }
        }
        let config = match &common.config {
            Some(path) => {
                let manifest = RunManifest::read(path)?;
                if manifest.subcommand != subcommand {
                    return Err(CliError::Usage(format!(
                        "manifest {} is for `{}`, not `{subcommand}`",
                        path.display(),
                        manifest.subcommand
                    )));
                }
                manifest.params
            }
            None => BTreeMap::new(),
        };
        Ok(Self {
            flags,
            config,
            used: BTreeMap::new(),
        })
    }

    fn lookup<T: DeserializeOwned + Serialize>(
        &mut self,
        name: &str,
    ) -> Result<Option<T>, CliError> {
        let Some(raw) = self.flags.get(name).or_else(|| self.config.get(name)) else {
            return Ok(None);
        };
        let value: T = serde_json::from_value(raw.clone())
            .map_err(|e| CliError::Usage(format!("bad value for {name}: {e}")))?;
        self.used.insert(name.into(), raw.clone());
        Ok(Some(value))
    }

    pub fn get<T: DeserializeOwned + Serialize>(
        &mut self,
        name: &str,
    ) -> Result<Option<T>, CliError> {
        self.lookup(name)
    }

    pub fn or<T: DeserializeOwned + Serialize>(
        &mut self,
        name: &str,
        default: T,
    ) -> Result<T, CliError> {
        match self.lookup(name)? {
            Some(v) => Ok(v),
            None => {
                self.used.insert(
                    name.into(),
                    serde_json::to_value(&default).expect("param serializes"),
                );
                Ok(default)
            }
        }
    }

    pub fn required<T: DeserializeOwned + Serialize>(&mut self, name: &str) -> Result<T, CliError> {
        self.lookup(name)?
            .ok_or_else(|| CliError::Usage(format!("missing required parameter --{name}")))
    }

    pub fn path(&mut self, name: &str) -> Result<Option<PathBuf>, CliError> {
        self.lookup(name)
    }

    /// Flag, then manifest, then `PCSEMI_SEED`, then 0.
    pub fn seed(&mut self) -> Result<u64, CliError> {
        if let Some(seed) = self.lookup("seed")? {
            return Ok(seed);
        }
        let seed = match std::env::var(SEED_ENV) {
            Ok(text) => text.trim().parse().map_err(|_| {
                CliError::Usage(format!("{SEED_ENV} is not an unsigned integer: {text:?}"))
            })?,
            Err(_) => 0,
        };
        self.used.insert("seed".into(), Value::from(seed));
        Ok(seed)
    }
}
