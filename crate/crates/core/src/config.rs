//! `key = value` run configuration with `[section]` headers.
//!
//! Keys before the first header are global. Each lookup falls back from
//! the section to the global table.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value` or `[section]`")]
    Syntax { line: usize },
    #[error("line {line}: unknown section `[{section}]`")]
    UnknownSection { line: usize, section: String },
    #[error("line {line}: unknown key `{key}` in {section}")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Allowed keys per section; the global section is named "".
pub type Schema<'a> = &'a [(&'a str, &'a [&'a str])];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl RunConfig {
    pub fn parse(text: &str, schema: Schema<'_>) -> Result<Self, ConfigError> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        let mut allowed = keys_of(schema, "");
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') || content.starts_with(';') {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                allowed = keys_of(schema, name)
                    .ok_or_else(|| ConfigError::UnknownSection {
                        line,
                        section: name.to_owned(),
                    })
                    .map(Some)?;
                current = name.to_owned();
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), unquote(value.trim()));
            if key.is_empty() {
                return Err(ConfigError::Syntax { line });
            }
            if !allowed.is_some_and(|keys| keys.contains(&key)) {
                return Err(ConfigError::UnknownKey {
                    line,
                    section: if current.is_empty() {
                        "global section".to_owned()
                    } else {
                        format!("[{current}]")
                    },
                    key: key.to_owned(),
                });
            }
            let table = sections.entry(current.clone()).or_default();
            if table.insert(key.to_owned(), value.to_owned()).is_some() {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_owned(),
                });
            }
        }
        Ok(RunConfig { sections })
    }

    pub fn load(path: &Path, schema: Schema<'_>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, schema)
    }

    /// Sets a value without schema checks.
    pub fn set(&mut self, section: &str, key: &str, value: &str) {
        self.sections
            .entry(section.to_owned())
            .or_default()
            .insert(key.to_owned(), value.to_owned());
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|t| t.get(key))
            .or_else(|| self.sections.get("").and_then(|t| t.get(key)))
            .map(String::as_str)
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    /// SHA-256 over the normalised entries, independent of layout,
    /// comments and key order.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (section, table) in &self.sections {
            for (k, v) in table {
                h.update(format!("{section}\u{1f}{k}\u{1f}{v}\n").as_bytes());
            }
        }
        format!("{:x}", h.finalize())
    }
}

fn keys_of<'a>(schema: Schema<'a>, section: &str) -> Option<&'a [&'a str]> {
    schema.iter().find(|(s, _)| *s == section).map(|(_, k)| *k)
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(v)
}
