//! Option resolution: command-line flag, then config file, then default.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use alterlda_core::config::{RunConfig, Schema};

use crate::error::CliError;

pub const SEED_ENV: &str = "ALTERLDA_SEED";

pub const SCHEMA: Schema<'static> = &[
    ("", &["seed"]),
    (
        "ingest",
        &["input", "out", "keep_punct", "stopwords", "seed"],
    ),
    (
        "classify",
        &[
            "corpus",
            "lemmas",
            "vectors",
            "paratext_patterns",
            "max_dist",
            "style_threshold",
            "unknown_hand",
            "out",
            "out_corpus",
            "seed",
        ],
    ),
    (
        "train",
        &[
            "corpus",
            "k",
            "alpha",
            "eta",
            "xi",
            "sweeps",
            "burn_in",
            "lag",
            "split",
            "test_fraction",
            "seed",
            "out",
        ],
    ),
    (
        "suggest",
        &[
            "model",
            "corpus",
            "group_by",
            "threshold",
            "foldin_sweeps",
            "foldin_burn_in",
            "seed",
            "format",
            "out",
        ],
    ),
    (
        "eval",
        &[
            "model",
            "corpus",
            "split",
            "test_fraction",
            "group_by",
            "threshold",
            "foldin_sweeps",
            "foldin_burn_in",
            "seed",
            "format",
            "out",
        ],
    ),
    (
        "synth",
        &[
            "grid_alpha",
            "grid_eta",
            "grid_xi",
            "sizes",
            "runs",
            "k",
            "vocab",
            "doc_len",
            "sweeps",
            "burn_in",
            "lag",
            "rule",
            "seed",
            "format",
            "out",
        ],
    ),
    ("report", &["input", "format", "out"]),
    ("run", &["stages"]),
];

/// Loaded config file with the directory its relative paths resolve from.
pub struct ConfigFile {
    pub config: RunConfig,
    pub path: PathBuf,
    pub dir: PathBuf,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        crate::error::require_exists(path)?;
        let config = RunConfig::load(path, SCHEMA)?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(ConfigFile {
            config,
            path: path.to_owned(),
            dir,
        })
    }
}

/// Resolves the options of one subcommand and remembers the effective
/// values for the metadata sidecar.
pub struct Params<'a> {
    file: Option<&'a ConfigFile>,
    section: &'static str,
    resolved: BTreeMap<String, String>,
}

impl<'a> Params<'a> {
    pub fn new(file: Option<&'a ConfigFile>, section: &'static str) -> Self {
        Params {
            file,
            section,
            resolved: BTreeMap::new(),
        }
    }

    pub fn section(&self) -> &'static str {
        self.section
    }

    fn configured(&self, key: &str) -> Option<&'a str> {
        self.file.and_then(|f| f.config.get(self.section, key))
    }

    fn parse<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        raw.trim()
            .parse()
            .map_err(|e| CliError::config(format!("invalid value `{raw}` for `{key}`: {e}")))
    }

    fn record(&mut self, key: &str, value: impl Display) {
        self.resolved.insert(key.to_owned(), value.to_string());
    }

    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => self
                .configured(key)
                .map(|raw| Self::parse(key, raw))
                .transpose()?,
        };
        if let Some(v) = &value {
            self.record(key, v);
        }
        Ok(value)
    }

    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.optional(key, flag)?.unwrap_or(default);
        self.record(key, &v);
        Ok(v)
    }

    fn missing(&self, key: &str) -> CliError {
        CliError::config(format!(
            "missing --{} (or `{key}` in [{}])",
            key.replace('_', "-"),
            self.section
        ))
    }

    pub fn flag(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        let v = if flag {
            true
        } else {
            self.configured(key)
                .map(|raw| Self::parse::<bool>(key, raw))
                .transpose()?
                .unwrap_or(false)
        };
        self.record(key, v);
        Ok(v)
    }

    /// Relative paths from the config file resolve against its directory.
    pub fn optional_path(&mut self, key: &str, flag: Option<PathBuf>) -> Option<PathBuf> {
        let path = flag.or_else(|| {
            let raw = self.configured(key)?;
            let dir = &self.file?.dir;
            Some(dir.join(raw))
        });
        if let Some(p) = &path {
            self.record(key, p.display());
        }
        path
    }

    pub fn path(&mut self, key: &str, flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
        self.optional_path(key, flag)
            .ok_or_else(|| self.missing(key))
    }

    /// Flag, then config, then the environment, then `default`.
    pub fn seed(&mut self, flag: Option<u64>, default: u64) -> Result<u64, CliError> {
        let seed = match self.optional("seed", flag)? {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(raw) => Self::parse(SEED_ENV, &raw)?,
                Err(_) => default,
            },
        };
        self.record("seed", seed);
        Ok(seed)
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }

    pub fn config_file(&self) -> Option<&Path> {
        self.file.map(|f| f.path.as_path())
    }
}

/// Comma-separated list.
pub fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>, CliError>
where
    T::Err: Display,
{
    let items: Result<Vec<T>, CliError> = raw
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| Params::parse(key, s))
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(CliError::config(format!(
            "`{key}` needs at least one value"
        )));
    }
    Ok(items)
}
