//! Layered configuration: built-in defaults, then the config file (top-level
//! `seed`, then the command's own table), then `SEMSIGHT_SEED`, then flags.
//! The effective table is written back out as the run manifest, which is a
//! valid config file for `foresight replay`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SEED_ENV: &str = "SEMSIGHT_SEED";
pub const MANIFEST_NAME: &str = "manifest.toml";

const TOP_LEVEL_KEYS: [&str; 4] = ["seed", "jobs", "tool_version", "command"];

pub trait Section: Serialize + DeserializeOwned + Default {
    const NAME: &'static str;
    const HAS_SEED: bool = true;
}

/// Parsed config file.
#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    pub table: toml::Table,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::from(e).context(path.display()))?;
        Self::parse(&text).map_err(|e| e.context(path.display()))
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::config(e.message().to_string()))?;
        for (key, value) in &table {
            if !TOP_LEVEL_KEYS.contains(&key.as_str()) && !value.is_table() {
                return Err(CliError::config(format!("unknown top-level key `{key}`")));
            }
        }
        Ok(ConfigFile { table })
    }

    pub fn command(&self) -> Option<&str> {
        self.table.get("command").and_then(|v| v.as_str())
    }

    pub fn jobs(&self) -> CliResult<Option<usize>> {
        match self.table.get("jobs") {
            None => Ok(None),
            Some(v) => v
                .as_integer()
                .and_then(|n| usize::try_from(n).ok())
                .map(Some)
                .ok_or_else(|| CliError::config("`jobs` must be a non-negative integer")),
        }
    }
}

fn to_table<T: Serialize>(value: &T) -> CliResult<toml::Table> {
    toml::Table::try_from(value).map_err(|e| CliError::config(e.to_string()))
}

fn overlay(base: &mut toml::Table, top: &toml::Table) {
    for (k, v) in top {
        base.insert(k.clone(), v.clone());
    }
}

pub fn env_seed() -> CliResult<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::config(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

/// Effective config for one command.
pub fn resolve<S: Section, F: Serialize>(file: Option<&ConfigFile>, env_seed: Option<u64>, flags: &F) -> CliResult<S> {
    let mut table = to_table(&S::default())?;
    if let Some(file) = file {
        if S::HAS_SEED {
            if let Some(seed) = file.table.get("seed") {
                table.insert("seed".into(), seed.clone());
            }
        }
        match file.table.get(S::NAME) {
            Some(toml::Value::Table(section)) => overlay(&mut table, section),
            Some(_) => return Err(CliError::config(format!("`{}` must be a table", S::NAME))),
            None => {}
        }
    }
    if let (true, Some(seed)) = (S::HAS_SEED, env_seed) {
        let seed = i64::try_from(seed).map_err(|_| CliError::config(format!("{SEED_ENV} must be below 2^63")))?;
        table.insert("seed".into(), toml::Value::Integer(seed));
    }
    overlay(&mut table, &to_table(flags)?);
    S::deserialize(toml::Value::Table(table))
        .map_err(|e| CliError::config(format!("[{}] {}", S::NAME, e.message())))
}

pub fn write_manifest<S: Section>(path: &Path, effective: &S) -> CliResult<()> {
    let mut table = toml::Table::new();
    table.insert("tool_version".into(), TOOL_VERSION.into());
    table.insert("command".into(), S::NAME.into());
    table.insert(S::NAME.into(), toml::Value::Table(to_table(effective)?));
    let text = toml::to_string(&table).map_err(|e| CliError::config(e.to_string()))?;
    fs::write(path, text)?;
    Ok(())
}
