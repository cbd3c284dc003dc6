//! key=value config files and command manifests.
//!
//! Every command resolves its parameters as: command-line flag, then config
//! file value, then built-in default. The resolved values are echoed into a
//! manifest file next to the outputs; rerunning a command with
//! `--config <manifest>` reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anthrokit_core::error::{Error, Result};

pub const MANIFEST_FORMAT: &str = "anthrokit-manifest-v1";

/// Ordered key=value map.
#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    values: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::InvalidInput(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("config line {}: expected key=value, got {line:?}", i + 1))
            })?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(KvConfig { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.values.insert(key.to_string(), value.to_string());
    }

    /// Rejects configs recorded by a different subcommand.
    pub fn check_command(&self, expected: &str) -> Result<()> {
        if let Some(cmd) = self.get("command") {
            if cmd != expected {
                return Err(Error::InvalidInput(format!(
                    "config was recorded by command {cmd:?}, not {expected:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn write_manifest(&self, path: &Path, command: &str) -> Result<()> {
        let mut text = format!("# {MANIFEST_FORMAT}\ncommand={command}\n");
        for (k, v) in &self.values {
            if k != "command" {
                text.push_str(&format!("{k}={v}\n"));
            }
        }
        fs::write(path, text)?;
        Ok(())
    }
}

/// Flag, then config, then default.
pub fn resolve<T: FromStr>(
    flag: Option<T>,
    cfg: &KvConfig,
    key: &str,
    default: T,
) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match cfg.get(key) {
        Some(raw) => raw
            .parse::<T>()
            .map_err(|_| Error::Parse(format!("config key {key}: bad value {raw:?}"))),
        None => Ok(default),
    }
}

/// Like [`resolve`] but without a default; the value must come from the flag
/// or the config.
pub fn resolve_required<T: FromStr>(
    flag: Option<T>,
    cfg: &KvConfig,
    key: &str,
) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match cfg.get(key) {
        Some(raw) => raw
            .parse::<T>()
            .map_err(|_| Error::Parse(format!("config key {key}: bad value {raw:?}"))),
        None => Err(Error::InvalidInput(format!(
            "missing required parameter: --{} (config key {key})",
            key.replace('_', "-")
        ))),
    }
}

pub fn require_file(path: &Path, what: &str) -> Result<()> {
    if !path.is_file() {
        return Err(Error::InvalidInput(format!(
            "{what} not found: {}",
            path.display()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.manifest");
        let mut kv = KvConfig::new();
        kv.set("seed", 7u64);
        kv.set("threshold_mm", 10.0f64);
        kv.write_manifest(&path, "select").unwrap();

        let loaded = KvConfig::load(&path).unwrap();
        loaded.check_command("select").unwrap();
        assert!(loaded.check_command("train").is_err());
        assert_eq!(resolve(None, &loaded, "seed", 0u64).unwrap(), 7);
        assert_eq!(resolve(Some(9u64), &loaded, "seed", 0).unwrap(), 9);
        assert_eq!(resolve(None, &loaded, "missing", 3u64).unwrap(), 3);
        assert!(resolve_required::<u64>(None, &loaded, "missing").is_err());
    }
}
